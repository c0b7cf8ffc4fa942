#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sfs/autodiff.hpp"
#include "sfs/common.hpp"
#include "sfs/dataset.hpp"
#include "sfs/gain.hpp"
#include "sfs/model.hpp"
#include "sfs/tensor.hpp"

namespace sfs {

struct SaliencyMap {
    Tensor per_sample;  // n x r, absolute input gradients
    Tensor aggregated;  // length r
};

namespace detail {

inline void check_gain_model(const GainSpec& gain, const TrainedModel& model) {
    const LossKind lk = model.loss_kind;
    const bool ok = (gain.kind == GainKind::CrossEntropyComplement &&
                     lk == LossKind::CategoricalCrossEntropy) ||
                    (gain.kind == GainKind::HingeLog && lk == LossKind::Hinge) ||
                    (gain.kind == GainKind::MseInverse && lk == LossKind::Mse);
    if (!ok)
        throw ContractError(std::string("gain '") + gain_kind_name(gain.kind) +
                            "' is incompatible with a model trained on '" +
                            loss_kind_name(lk) + "' loss");
}

// Gain-of-one-sample graph reused across samples: x is the tracked input,
// the label row and the parameters are plain data.
struct SampleGainGraph {
    ForwardGraph fg;
    NodeId gain = -1;
    NodeId probs = -1;  // model_output, useful for confidence readouts

    SampleGainGraph(const TrainedModel& model, const GainSpec& gain_spec) {
        build_forward(fg, model.spec, 1, /*trainable=*/false, /*input_leaf=*/true);
        const std::size_t out_dim = model.spec.output_dim;
        fg.y = fg.graph.data(Shape{1, out_dim}, "y");
        NodeId pred = gain_spec.kind == GainKind::CrossEntropyComplement ? fg.model_output
                                                                         : fg.raw_output;
        gain = build_gain(fg.graph, pred, fg.y, gain_spec, 1);
        probs = fg.model_output;
        fg.graph.set_output(gain);
    }
};

}  // namespace detail

// |d gain / d x| for one sample. y is the one-hot row (classification) or the
// 1x1 target (regression).
inline Tensor sample_saliency(const TrainedModel& model, const GainSpec& gain, const Tensor& x,
                              const Tensor& y) {
    detail::check_gain_model(gain, model);
    if (x.rank() != 2 || x.rows() != 1 || x.cols() != model.spec.input_dim)
        throw ShapeError("sample_saliency: x must be 1 x input_dim");
    if (y.rank() != 2 || y.rows() != 1 || y.cols() != model.spec.output_dim)
        throw ShapeError("sample_saliency: y must be 1 x output_dim");

    detail::SampleGainGraph sg(model, gain);
    Bindings b;
    b.set(sg.fg.x, x);
    b.set(sg.fg.y, y);
    detail::bind_params(b, sg.fg, model);
    GradientResult g = input_gradient(sg.fg.graph, b);
    Tensor out(Shape{model.spec.input_dim});
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::abs(g.wrt_input[j]);
    return out;
}

// Per-sample saliency for a whole matrix. Rows are independent, so worker
// threads each own a graph instance and write disjoint output rows; results
// are bit-identical for any thread count.
inline Tensor saliency_matrix(const TrainedModel& model, const GainSpec& gain, const Tensor& X,
                              const Tensor& Y, unsigned threads = 1) {
    detail::check_gain_model(gain, model);
    const std::size_t n = X.rows();
    const std::size_t r = model.spec.input_dim;
    const std::size_t c = model.spec.output_dim;
    if (X.cols() != r) throw ShapeError("saliency_matrix: X column count mismatch");
    if (Y.rows() != n || Y.cols() != c) throw ShapeError("saliency_matrix: Y shape mismatch");

    Tensor out(Shape{n, r});
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        detail::SampleGainGraph sg(model, gain);
        GraphExec ex(sg.fg.graph);
        Bindings base;
        detail::bind_params(base, sg.fg, model);
        for (std::size_t i = lo; i < hi; ++i) {
            Tensor xi(Shape{1, r});
            Tensor yi(Shape{1, c});
            for (std::size_t j = 0; j < r; ++j) xi[j] = X[i * r + j];
            for (std::size_t j = 0; j < c; ++j) yi[j] = Y[i * c + j];
            Bindings b = base;
            b.set(sg.fg.x, std::move(xi));
            b.set(sg.fg.y, std::move(yi));
            ex.forward(b);
            GradientResult g = ex.backward();
            for (std::size_t j = 0; j < r; ++j) out[i * r + j] = std::abs(g.wrt_input[j]);
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return out;
}

// Gradient magnitude of one class output w.r.t. the input (the classic
// formulation kept for comparison with the gain-based one).
inline Tensor classic_class_saliency(const TrainedModel& model, const Tensor& x, std::size_t c) {
    if (!model.spec.is_classifier())
        throw ContractError("classic_class_saliency requires a classifier");
    if (c >= model.spec.output_dim) throw ContractError("class index out of range");
    if (x.rank() != 2 || x.rows() != 1 || x.cols() != model.spec.input_dim)
        throw ShapeError("classic_class_saliency: x must be 1 x input_dim");

    detail::ForwardGraph fg;
    detail::build_forward(fg, model.spec, 1, /*trainable=*/false, /*input_leaf=*/true);
    Graph& g = fg.graph;
    Tensor pick(Shape{1, model.spec.output_dim});
    pick[c] = 1.0;
    NodeId y_c = g.sum(g.mul(fg.model_output, g.constant(std::move(pick), "pick")));
    g.set_output(y_c);

    Bindings b;
    b.set(fg.x, x);
    detail::bind_params(b, fg, model);
    GradientResult gr = input_gradient(g, b);
    Tensor out(Shape{model.spec.input_dim});
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::abs(gr.wrt_input[j]);
    return out;
}

// ============================================================================
// Aggregation
// ============================================================================

// Per-class sum, L1-normalized per class, then summed over classes. A class
// whose saliency mass is exactly zero contributes nothing; with the
// complement-log gains that is the fully-misclassified case.
inline Tensor aggregate_classification(const Tensor& per_sample, const std::vector<int>& labels) {
    const std::size_t n = per_sample.rows();
    const std::size_t r = per_sample.cols();
    if (n == 0) throw ContractError("aggregate_classification: no samples");
    if (labels.size() != n) throw ContractError("aggregate_classification: label count mismatch");

    int max_label = 0;
    for (int c : labels) {
        if (c < 0) throw ContractError("negative class label");
        max_label = std::max(max_label, c);
    }
    const std::size_t num_classes = static_cast<std::size_t>(max_label) + 1;

    Tensor out(Shape{r});
    Tensor class_sum(Shape{r});
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::fill(class_sum.data().begin(), class_sum.data().end(), 0.0);
        bool seen = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(labels[i]) != c) continue;
            seen = true;
            for (std::size_t j = 0; j < r; ++j) class_sum[j] += per_sample[i * r + j];
        }
        if (!seen) continue;
        double norm = 0.0;
        for (std::size_t j = 0; j < r; ++j) norm += class_sum[j];
        if (norm == 0.0) continue;
        for (std::size_t j = 0; j < r; ++j) out[j] += class_sum[j] / norm;
    }
    return out;
}

inline Tensor aggregate_regression(const Tensor& per_sample) {
    const std::size_t n = per_sample.rows();
    const std::size_t r = per_sample.cols();
    if (n == 0) throw ContractError("aggregate_regression: no samples");
    Tensor out(Shape{r});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r; ++j) out[j] += per_sample[i * r + j];
    return out;
}

// Full map over a dataset slice; aggregation picks the task's rule.
inline SaliencyMap compute_saliency_map(const TrainedModel& model, const GainSpec& gain,
                                        const Tensor& X, const Tensor& Y,
                                        const std::vector<int>& labels, TaskKind task,
                                        unsigned threads = 1) {
    SaliencyMap map;
    map.per_sample = saliency_matrix(model, gain, X, Y, threads);
    map.aggregated = task == TaskKind::Classification
                         ? aggregate_classification(map.per_sample, labels)
                         : aggregate_regression(map.per_sample);
    return map;
}

// ============================================================================
// Adversarial probe
// ============================================================================

enum class PerturbMode { RawGradient, SignGradient };

inline const char* perturb_mode_name(PerturbMode m) {
    return m == PerturbMode::RawGradient ? "raw_gradient" : "sign_gradient";
}

inline PerturbMode perturb_mode_from_name(const std::string& s) {
    if (s == "raw_gradient") return PerturbMode::RawGradient;
    if (s == "sign_gradient") return PerturbMode::SignGradient;
    throw ArgumentError("unknown perturbation mode '" + s + "'");
}

struct ClampBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct AdversarialConfig {
    std::size_t target_class = 0;
    double confidence_threshold = 0.95;
    double step_size = 0.05;
    std::size_t max_iters = 500;
    PerturbMode perturbation_mode = PerturbMode::RawGradient;
    std::optional<ClampBox> clamp_box;

    void validate(const ModelSpec& spec) const {
        if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
            throw ArgumentError("confidence_threshold must be in (0, 1)");
        if (step_size < 0.0) throw ArgumentError("step_size must be >= 0");
        if (max_iters == 0) throw ArgumentError("max_iters must be positive");
        if (target_class >= spec.output_dim) throw ArgumentError("target_class out of range");
        if (clamp_box && (clamp_box->lo.size() != spec.input_dim ||
                          clamp_box->hi.size() != spec.input_dim))
            throw ArgumentError("clamp_box must give per-feature bounds");
    }
};

struct AdversarialResult {
    Tensor x_adv;  // 1 x r
    std::size_t iters_used = 0;
    double final_confidence = 0.0;
    bool converged = false;
};

// Gradient ascent on the cross-entropy gain of the target class. In raw mode
// the step is L2-normalized so saturated (near-zero-magnitude) gradients still
// give a usable direction; sign mode is FGSM-style. Stops at the confidence
// threshold; otherwise returns the best iterate seen with converged=false.
inline AdversarialResult adversarial_perturb(const TrainedModel& model, const Tensor& x,
                                             const AdversarialConfig& cfg) {
    if (!model.spec.has_softmax_output())
        throw ContractError("adversarial_perturb requires a softmax-output classifier");
    cfg.validate(model.spec);
    if (x.rank() != 2 || x.rows() != 1 || x.cols() != model.spec.input_dim)
        throw ShapeError("adversarial_perturb: x must be 1 x input_dim");

    const std::size_t r = model.spec.input_dim;
    const std::size_t c = model.spec.output_dim;
    GainSpec gain;  // cross-entropy complement with defaults
    detail::SampleGainGraph sg(model, gain);
    GraphExec ex(sg.fg.graph);
    Bindings base;
    detail::bind_params(base, sg.fg, model);
    Tensor y(Shape{1, c});
    y[cfg.target_class] = 1.0;

    auto confidence_and_grad = [&](const Tensor& xi, Tensor* grad) {
        Bindings b = base;
        b.set(sg.fg.x, xi);
        b.set(sg.fg.y, y);
        ex.forward(b);
        const double conf = ex.value_of(sg.probs)[cfg.target_class];
        if (grad) *grad = ex.backward().wrt_input;
        return conf;
    };

    AdversarialResult res;
    res.x_adv = x;
    res.final_confidence = confidence_and_grad(x, nullptr);
    if (res.final_confidence >= cfg.confidence_threshold) {
        res.converged = true;
        return res;
    }

    Tensor cur = x;
    Tensor best = x;
    double best_conf = res.final_confidence;
    Tensor grad;
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        confidence_and_grad(cur, &grad);
        if (cfg.perturbation_mode == PerturbMode::RawGradient) {
            double norm = 0.0;
            for (std::size_t j = 0; j < r; ++j) norm += grad[j] * grad[j];
            norm = std::sqrt(norm);
            if (norm > 0.0)
                for (std::size_t j = 0; j < r; ++j) cur[j] += cfg.step_size * grad[j] / norm;
        } else {
            for (std::size_t j = 0; j < r; ++j)
                if (grad[j] != 0.0) cur[j] += cfg.step_size * (grad[j] > 0.0 ? 1.0 : -1.0);
        }
        if (cfg.clamp_box)
            for (std::size_t j = 0; j < r; ++j)
                cur[j] = std::min(cfg.clamp_box->hi[j], std::max(cfg.clamp_box->lo[j], cur[j]));

        const double conf = confidence_and_grad(cur, nullptr);
        if (conf > best_conf) {
            best_conf = conf;
            best = cur;
        }
        if (conf >= cfg.confidence_threshold) {
            res.x_adv = cur;
            res.iters_used = it;
            res.final_confidence = conf;
            res.converged = true;
            return res;
        }
    }
    res.x_adv = best;
    res.iters_used = cfg.max_iters;
    res.final_confidence = best_conf;
    res.converged = false;
    return res;
}

}  // namespace sfs
