#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfs/common.hpp"
#include "sfs/dataset.hpp"
#include "sfs/eval.hpp"
#include "sfs/gain.hpp"
#include "sfs/model.hpp"
#include "sfs/ranking.hpp"
#include "sfs/saliency.hpp"
#include "sfs/tensor.hpp"

namespace sfs {

using json = nlohmann::json;

// ---- config <-> json -------------------------------------------------------

inline json to_json(const GainSpec& g) {
    return {{"kind", gain_kind_name(g.kind)}, {"alpha", g.alpha}, {"epsilon", g.epsilon}};
}

inline GainSpec gain_spec_from_json(const json& j) {
    GainSpec g;
    g.kind = gain_kind_from_name(j.at("kind").get<std::string>());
    g.alpha = j.at("alpha").get<double>();
    g.epsilon = j.at("epsilon").get<double>();
    return g;
}

inline json to_json(const ModelSpec& s) {
    return {{"kind", model_kind_name(s.kind)},
            {"hidden_layers", s.hidden_layers},
            {"input_dim", s.input_dim},
            {"output_dim", s.output_dim},
            {"l2_weight_decay", s.l2_weight_decay}};
}

inline ModelSpec model_spec_from_json(const json& j) {
    ModelSpec s;
    s.kind = model_kind_from_name(j.at("kind").get<std::string>());
    s.hidden_layers = j.at("hidden_layers").get<std::vector<std::size_t>>();
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.output_dim = j.at("output_dim").get<std::size_t>();
    s.l2_weight_decay = j.at("l2_weight_decay").get<double>();
    return s;
}

inline json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd"},
            {"learning_rate", c.learning_rate},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_eps", c.adam_eps},
            {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.optimizer = j.at("optimizer").get<std::string>() == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline json to_json(const SfsConfig& c) {
    return {{"gamma", c.gamma},
            {"epsilon_stop", c.epsilon_stop},
            {"reps", c.reps},
            {"gain", to_json(c.gain)},
            {"model_spec", to_json(c.model_spec)},
            {"train_config", to_json(c.train_config)},
            {"seed", c.seed},
            {"threads", c.threads}};
}

// ---- atomic file output -----------------------------------------------------

// Write-to-temp then rename, so consumers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

// FNV-1a, for manifest digests of input files.
inline std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for digest");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

// ---- model binary format -----------------------------------------------------
// "SFSM" magic, u32 little-endian header length, JSON header, then one
// little-endian f64 block per parameter tensor in declaration order.

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

}  // namespace detail

inline std::string serialize_model(const TrainedModel& m) {
    json header = {{"format_version", 1},
                   {"spec", to_json(m.spec)},
                   {"loss_kind", loss_kind_name(m.loss_kind)},
                   {"seed", m.init_seed},
                   {"param_shapes", json::array()}};
    for (const Tensor& p : m.params) header["param_shapes"].push_back(p.shape());
    const std::string head = header.dump();

    std::string out = "SFSM";
    detail::put_u32_le(out, static_cast<std::uint32_t>(head.size()));
    out += head;
    for (const Tensor& p : m.params)
        for (std::size_t i = 0; i < p.size(); ++i) detail::put_f64_le(out, p[i]);
    return out;
}

inline void save_model(const TrainedModel& m, const std::string& path) {
    write_file_atomic(path, serialize_model(m));
}

inline TrainedModel deserialize_model(const std::string& bytes) {
    if (bytes.size() < 8 || bytes.compare(0, 4, "SFSM") != 0)
        throw ParseError("not an SFS model file (bad magic)");
    std::uint32_t head_len = 0;
    for (int i = 0; i < 4; ++i)
        head_len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
    if (bytes.size() < 8 + static_cast<std::size_t>(head_len))
        throw ParseError("model file truncated in header");

    json header;
    try {
        header = json::parse(bytes.substr(8, head_len));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad model header: ") + e.what());
    }
    if (header.at("format_version").get<int>() != 1)
        throw ParseError("unsupported model format version");

    TrainedModel m;
    m.spec = model_spec_from_json(header.at("spec"));
    m.spec.validate();
    m.init_seed = header.at("seed").get<std::uint64_t>();
    m.loss_kind = m.spec.loss_kind();
    if (loss_kind_name(m.loss_kind) != header.at("loss_kind").get<std::string>())
        throw ParseError("model header loss kind does not match spec");

    std::size_t offset = 8 + head_len;
    for (const auto& js : header.at("param_shapes")) {
        Shape shape = js.get<Shape>();
        Tensor t(shape);
        const std::size_t bytes_needed = t.size() * 8;
        if (bytes.size() < offset + bytes_needed) throw ParseError("model file truncated in data");
        const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = detail::get_f64_le(p + 8 * i);
        if (!t.all_finite()) throw NumericError("model parameters contain non-finite values");
        m.params.push_back(std::move(t));
        offset += bytes_needed;
    }
    if (offset != bytes.size()) throw ParseError("trailing bytes after model data");

    // cross-check against the spec-derived layout
    const TrainedModel probe = init(m.spec, 0);
    if (probe.params.size() != m.params.size()) throw ParseError("parameter count mismatch");
    for (std::size_t i = 0; i < m.params.size(); ++i)
        if (probe.params[i].shape() != m.params[i].shape())
            throw ParseError("parameter shape mismatch at block " + std::to_string(i));
    return m;
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

// ---- result exports -----------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json ranking_to_json(const FeatureRanking& ranking, const SfsConfig& cfg) {
    json hist = json::array();
    for (const RankingRound& h : ranking.history)
        hist.push_back({{"alive", h.alive_count}, {"saliency", h.saliency}});
    return {{"order", ranking.order}, {"history", hist}, {"config", to_json(cfg)}};
}

inline std::string ranking_to_csv(const FeatureRanking& ranking,
                                  const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    out << "rank,feature_index,feature_name\n";
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        const std::size_t f = ranking.order[i];
        out << i << "," << f << "," << (f < feature_names.size() ? feature_names[f] : "") << "\n";
    }
    return out.str();
}

inline std::string saliency_to_csv(const SaliencyMap& map,
                                   const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        out << (j ? "," : "") << feature_names[j];
    out << "\n";
    const std::size_t r = map.per_sample.cols();
    for (std::size_t i = 0; i < map.per_sample.rows(); ++i) {
        for (std::size_t j = 0; j < r; ++j)
            out << (j ? "," : "") << format_double(map.per_sample.at(i, j));
        out << "\n";
    }
    return out.str();
}

inline json saliency_summary_json(const SaliencyMap& map, const GainSpec& gain,
                                  const ModelSpec& model) {
    std::vector<double> agg(map.aggregated.data().begin(), map.aggregated.data().end());
    return {{"aggregated", agg},
            {"n_samples", map.per_sample.rows()},
            {"gain", to_json(gain)},
            {"model", to_json(model)}};
}

inline std::string curve_to_csv(const FeatureCurve& curve) {
    std::ostringstream out;
    out << "k,score\n";
    for (std::size_t i = 0; i < curve.ks.size(); ++i)
        out << curve.ks[i] << "," << format_double(curve.scores[i]) << "\n";
    return out.str();
}

inline json curve_to_json(const FeatureCurve& curve) {
    return {{"metric", curve.metric},
            {"ks", curve.ks},
            {"scores", curve.scores},
            {"ranker", curve.ranker_desc},
            {"classifier", curve.classifier_desc}};
}

}  // namespace sfs
