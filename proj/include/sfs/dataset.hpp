#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/tensor.hpp"

namespace sfs {

enum class TaskKind { Classification, Regression };

inline const char* task_kind_name(TaskKind k) {
    return k == TaskKind::Classification ? "classification" : "regression";
}

inline TaskKind task_kind_from_name(const std::string& s) {
    if (s == "classification") return TaskKind::Classification;
    if (s == "regression") return TaskKind::Regression;
    throw ArgumentError("unknown task kind '" + s + "'");
}

struct Dataset {
    Tensor X;  // n x r
    TaskKind task = TaskKind::Classification;
    std::vector<int> labels;          // classification targets, indices in [0, C)
    std::vector<double> targets;      // regression targets
    std::size_t num_classes = 0;
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    std::optional<std::vector<bool>> relevant_mask;  // ground truth, synthetic data only

    std::size_t n() const { return X.rows(); }
    std::size_t r() const { return X.cols(); }

    void validate() const {
        if (n() == 0 || r() == 0) throw ContractError("dataset must have n >= 1 and r >= 1");
        if (feature_names.size() != r()) throw ContractError("feature name count mismatch");
        if (task == TaskKind::Classification) {
            if (labels.size() != n()) throw ContractError("label count mismatch");
            for (int c : labels)
                if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
                    throw ContractError("class index out of range");
        } else if (targets.size() != n()) {
            throw ContractError("target count mismatch");
        }
        if (relevant_mask) {
            if (relevant_mask->size() != r()) throw ContractError("relevant mask length mismatch");
            if (std::find(relevant_mask->begin(), relevant_mask->end(), true) ==
                relevant_mask->end())
                throw ContractError("relevant mask has no true entry");
        }
    }

    // n x C one-hot matrix for classification, n x 1 for regression.
    Tensor target_matrix() const {
        if (task == TaskKind::Classification) {
            Tensor y(Shape{n(), num_classes});
            for (std::size_t i = 0; i < n(); ++i)
                y[i * num_classes + static_cast<std::size_t>(labels[i])] = 1.0;
            return y;
        }
        Tensor y(Shape{n(), 1});
        for (std::size_t i = 0; i < n(); ++i) y[i] = targets[i];
        return y;
    }
};

inline Tensor one_hot(const std::vector<int>& labels, std::size_t num_classes) {
    Tensor y(Shape{labels.size(), num_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
            throw ContractError("one_hot: class index out of range");
        y[i * num_classes + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return y;
}

// ============================================================================
// Dense CSV
// ============================================================================

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& tok, const std::string& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, line, "not a number: '" + tok + "'");
    }
}

}  // namespace detail

// First row is the header; the target column is selected by name and the
// remaining columns become features in file order. Classification labels are
// mapped to contiguous indices in order of first appearance.
inline Dataset load_dense_csv(const std::string& path, const std::string& target_column,
                              TaskKind kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::size_t target_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == target_column) target_idx = i;
    if (target_idx == header.size())
        throw ParseError(path, 1, "target column '" + target_column + "' not in header");

    Dataset ds;
    ds.task = kind;
    ds.target_name = target_column;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != target_idx) ds.feature_names.push_back(header[i]);
    const std::size_t r = ds.feature_names.size();
    if (r == 0) throw ParseError(path, 1, "no feature columns");

    std::vector<double> values;
    std::map<std::string, int> class_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path, line_no,
                             "expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == target_idx) continue;
            values.push_back(detail::parse_number(cells[i], path, line_no));
        }
        const std::string& t = cells[target_idx];
        if (kind == TaskKind::Classification) {
            auto it = class_ids.emplace(t, static_cast<int>(class_ids.size())).first;
            ds.labels.push_back(it->second);
        } else {
            ds.targets.push_back(detail::parse_number(t, path, line_no));
        }
    }

    const std::size_t n = values.size() / r;
    if (n == 0) throw ParseError(path, 1, "no data rows");
    ds.X = Tensor(Shape{n, r}, std::move(values));
    ds.num_classes = class_ids.size();
    ds.validate();
    return ds;
}

inline void save_dense_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t j = 0; j < ds.r(); ++j) out << ds.feature_names[j] << ",";
    out << ds.target_name << "\n";
    char buf[40];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.r(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.X.at(i, j));
            out << buf << ",";
        }
        if (ds.task == TaskKind::Classification) {
            out << ds.labels[i];
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", ds.targets[i]);
            out << buf;
        }
        out << "\n";
    }
}

inline void save_dense_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    save_dense_csv(ds, out);
}

// ============================================================================
// NIPS 2003 challenge format
// ============================================================================

// The challenge ships three layouts; sniffing is avoided on purpose.
enum class NipsFormat {
    SparseBinary,  // per line: 1-based indices of the active features
    SparseValue,   // per line: index:value tokens, 1-based indices
    Dense,         // per line: one value per feature
};

inline NipsFormat nips_format_from_name(const std::string& s) {
    if (s == "sparse_binary") return NipsFormat::SparseBinary;
    if (s == "sparse_value") return NipsFormat::SparseValue;
    if (s == "dense") return NipsFormat::Dense;
    throw ArgumentError("unknown nips format '" + s + "'");
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline std::size_t parse_feature_index(const std::string& tok, std::size_t n_features,
                                       const std::string& path, std::size_t line) {
    std::size_t used = 0;
    long idx = 0;
    try {
        idx = std::stol(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(path, line, "bad feature index '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError(path, line, "bad feature index '" + tok + "'");
    if (idx < 1 || static_cast<std::size_t>(idx) > n_features)
        throw ParseError(path, line,
                         "feature index " + std::to_string(idx) + " outside [1, " +
                             std::to_string(n_features) + "]");
    return static_cast<std::size_t>(idx - 1);
}

}  // namespace detail

// Labels file holds one +-1 per line; -1 maps to class 0 and +1 to class 1.
inline Dataset load_nips_sparse(const std::string& data_path, const std::string& labels_path,
                                std::size_t n_features, NipsFormat format) {
    if (n_features == 0) throw ArgumentError("n_features must be positive");
    std::ifstream din(data_path);
    if (!din) throw IoError("cannot open '" + data_path + "'");
    std::ifstream lin(labels_path);
    if (!lin) throw IoError("cannot open '" + labels_path + "'");

    Dataset ds;
    ds.task = TaskKind::Classification;
    ds.num_classes = 2;

    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(din, line)) {
        ++line_no;
        const std::size_t base = values.size();
        values.resize(base + n_features, 0.0);
        const std::vector<std::string> toks = detail::split_ws(line);
        if (format == NipsFormat::Dense) {
            if (toks.size() != n_features)
                throw ParseError(data_path, line_no,
                                 "expected " + std::to_string(n_features) + " values, got " +
                                     std::to_string(toks.size()));
            for (std::size_t j = 0; j < n_features; ++j)
                values[base + j] = detail::parse_number(toks[j], data_path, line_no);
        } else if (format == NipsFormat::SparseBinary) {
            for (const std::string& t : toks)
                values[base + detail::parse_feature_index(t, n_features, data_path, line_no)] = 1.0;
        } else {
            for (const std::string& t : toks) {
                const std::size_t colon = t.find(':');
                if (colon == std::string::npos)
                    throw ParseError(data_path, line_no, "expected index:value, got '" + t + "'");
                const std::size_t j =
                    detail::parse_feature_index(t.substr(0, colon), n_features, data_path, line_no);
                values[base + j] = detail::parse_number(t.substr(colon + 1), data_path, line_no);
            }
        }
    }
    const std::size_t n = line_no;

    std::size_t label_no = 0;
    while (std::getline(lin, line)) {
        ++label_no;
        const std::vector<std::string> toks = detail::split_ws(line);
        if (toks.size() != 1 || (toks[0] != "1" && toks[0] != "+1" && toks[0] != "-1"))
            throw ParseError(labels_path, label_no, "label must be +1 or -1, got '" + line + "'");
        ds.labels.push_back(toks[0] == "-1" ? 0 : 1);
    }
    if (label_no != n)
        throw ParseError(labels_path, label_no,
                         "label count " + std::to_string(label_no) + " does not match " +
                             std::to_string(n) + " data rows");
    if (n == 0) throw ParseError(data_path, 1, "no data rows");

    ds.X = Tensor(Shape{n, n_features}, std::move(values));
    ds.feature_names.reserve(n_features);
    for (std::size_t j = 0; j < n_features; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.validate();
    return ds;
}

// ============================================================================
// Synthetic benchmark with known relevant features
// ============================================================================

// Features are i.i.d. standard normal; the target is a fixed random linear
// form over k relevant columns plus Gaussian noise (sign of it for
// classification). The relevant set is a seeded random subset so rankings
// cannot profit from index order.
inline Dataset generate_synthetic(std::size_t n, std::size_t r, std::size_t k, TaskKind task,
                                  double noise, std::uint64_t seed) {
    if (n == 0 || r == 0) throw ArgumentError("n and r must be positive");
    if (k == 0 || k > r) throw ArgumentError("k must satisfy 1 <= k <= r");
    if (noise < 0.0) throw ArgumentError("noise must be >= 0");

    Rng rng(mix64(seed));
    Dataset ds;
    ds.task = task;
    ds.X = Tensor(Shape{n, r});
    for (std::size_t i = 0; i < n * r; ++i) ds.X[i] = rng.normal();

    std::vector<std::size_t> idx(r);
    for (std::size_t j = 0; j < r; ++j) idx[j] = j;
    rng.shuffle(idx);
    std::vector<bool> mask(r, false);
    std::vector<double> w(r, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        mask[idx[j]] = true;
        const double mag = rng.uniform(0.5, 1.5);
        w[idx[j]] = rng.uniform01() < 0.5 ? -mag : mag;
    }
    ds.relevant_mask = std::move(mask);

    if (task == TaskKind::Classification) {
        ds.num_classes = 2;
        ds.labels.reserve(n);
    } else {
        ds.targets.reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        for (std::size_t j = 0; j < r; ++j) score += w[j] * ds.X.at(i, j);
        score += noise * rng.normal();
        if (task == TaskKind::Classification)
            ds.labels.push_back(score > 0.0 ? 1 : 0);
        else
            ds.targets.push_back(score);
    }

    ds.feature_names.reserve(r);
    for (std::size_t j = 0; j < r; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.validate();
    return ds;
}

// Rows [from, to) as a new dataset; metadata and mask carry over.
inline Dataset slice_rows(const Dataset& ds, std::size_t from, std::size_t to) {
    if (from >= to || to > ds.n()) throw ArgumentError("slice_rows: bad range");
    Dataset out;
    out.task = ds.task;
    out.num_classes = ds.num_classes;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.relevant_mask = ds.relevant_mask;
    const std::size_t r = ds.r();
    out.X = Tensor(Shape{to - from, r});
    for (std::size_t i = from; i < to; ++i)
        for (std::size_t j = 0; j < r; ++j) out.X.at(i - from, j) = ds.X.at(i, j);
    if (ds.task == TaskKind::Classification)
        out.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(from),
                          ds.labels.begin() + static_cast<std::ptrdiff_t>(to));
    else
        out.targets.assign(ds.targets.begin() + static_cast<std::ptrdiff_t>(from),
                           ds.targets.begin() + static_cast<std::ptrdiff_t>(to));
    out.validate();
    return out;
}

// ============================================================================
// Standardization and class balancing
// ============================================================================

struct StandardizeStats {
    std::vector<double> mean;
    std::vector<double> std;  // population convention, floored at 1e-8
};

inline constexpr double kStdFloor = 1e-8;

// Zero mean, unit population std per column. Constant columns come out as all
// zeros, which makes the ranker's column-zeroing equal to mean imputation.
inline std::pair<Dataset, StandardizeStats> standardize(const Dataset& ds) {
    const std::size_t n = ds.n();
    const std::size_t r = ds.r();
    StandardizeStats st;
    st.mean.assign(r, 0.0);
    st.std.assign(r, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += ds.X.at(i, j);
        st.mean[j] = s / static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ds.X.at(i, j) - st.mean[j];
            v += d * d;
        }
        st.std[j] = std::max(std::sqrt(v / static_cast<double>(n)), kStdFloor);
    }
    Dataset out = ds;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r; ++j)
            out.X.at(i, j) = (ds.X.at(i, j) - st.mean[j]) / st.std[j];
    return {std::move(out), std::move(st)};
}

inline Tensor apply_standardize(const Tensor& X, const StandardizeStats& st) {
    if (X.cols() != st.mean.size()) throw ShapeError("standardize stats do not match X");
    Tensor out = X;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j)
            out.at(i, j) = (X.at(i, j) - st.mean[j]) / st.std[j];
    return out;
}

// Replicates minority-class samples (cycling through a seeded shuffle) until
// every class matches the largest one. Originals are all kept, copies are
// appended.
inline Dataset balance_by_replication(const Dataset& ds, std::uint64_t seed) {
    if (ds.task != TaskKind::Classification)
        throw ContractError("balance_by_replication requires a classification dataset");
    const std::size_t r = ds.r();

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.n(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    std::size_t target = 0;
    for (const auto& v : by_class) target = std::max(target, v.size());

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.n(); ++i) rows.push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].empty() || by_class[c].size() == target) continue;
        std::vector<std::size_t> pool = by_class[c];
        Rng rng(combine_seed(seed, c));
        rng.shuffle(pool);
        std::size_t need = target - by_class[c].size();
        for (std::size_t i = 0; need > 0; i = (i + 1) % pool.size(), --need)
            rows.push_back(pool[i]);
    }

    Dataset out;
    out.task = ds.task;
    out.num_classes = ds.num_classes;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.relevant_mask = ds.relevant_mask;
    out.X = Tensor(Shape{rows.size(), r});
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < r; ++j) out.X.at(i, j) = ds.X.at(rows[i], j);
        out.labels.push_back(ds.labels[rows[i]]);
    }
    out.validate();
    return out;
}

}  // namespace sfs
