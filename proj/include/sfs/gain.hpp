#pragma once

#include <cmath>
#include <string>

#include "sfs/autodiff.hpp"
#include "sfs/common.hpp"
#include "sfs/tensor.hpp"

// Gain functions: loss-like objectives flipped so that confident *correct*
// predictions carry large gradients and total misclassifications carry none.
// Each builder appends the gain subgraph to an existing graph and returns the
// scalar node, so the same code serves value computation, saliency and the
// adversarial probe.

namespace sfs {

enum class GainKind {
    MseInverse,             // alpha / (mse + epsilon)
    CrossEntropyComplement, // -(alpha/N) sum y log(1 - clip(p))
    HingeLog,               // complement log over margins squashed to [0,1]
};

inline const char* gain_kind_name(GainKind k) {
    switch (k) {
        case GainKind::MseInverse: return "mse_inverse";
        case GainKind::CrossEntropyComplement: return "cross_entropy_complement";
        case GainKind::HingeLog: return "hinge_log";
    }
    return "?";
}

inline GainKind gain_kind_from_name(const std::string& s) {
    if (s == "mse_inverse") return GainKind::MseInverse;
    if (s == "cross_entropy_complement") return GainKind::CrossEntropyComplement;
    if (s == "hinge_log") return GainKind::HingeLog;
    throw ArgumentError("unknown gain kind '" + s + "'");
}

struct GainSpec {
    GainKind kind = GainKind::CrossEntropyComplement;
    double alpha = 1.0;
    double epsilon = 1e-3;

    void validate() const {
        if (!(alpha > 0.0)) throw ArgumentError("gain alpha must be > 0");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("gain epsilon must be in (0, 1)");
    }
};

// ---- graph builders ------------------------------------------------------

// alpha / (mean((pred - target)^2) + epsilon)
inline NodeId build_gain_mse(Graph& g, NodeId pred, NodeId target, const GainSpec& spec) {
    spec.validate();
    NodeId mse = g.mean(g.square(g.sub(pred, target)));
    return g.affine(g.reciprocal(g.affine(mse, 1.0, spec.epsilon)), spec.alpha, 0.0);
}

// -(alpha/n) * sum( y * log(1 - min(1-eps, p)) ), clip straight-through
inline NodeId build_gain_cross_entropy(Graph& g, NodeId probs, NodeId onehot, const GainSpec& spec,
                                       std::size_t n_rows) {
    spec.validate();
    NodeId clipped = g.clip_upper(probs, 1.0 - spec.epsilon);
    NodeId log_comp = g.log(g.affine(clipped, -1.0, 1.0));
    return g.affine(g.sum(g.mul(onehot, log_comp)), -spec.alpha / static_cast<double>(n_rows), 0.0);
}

// Margins are squashed to [0,1] by (clip(m,-1,1)+1)/2 before the complement
// log; both clips pass gradient 1 so saturated margins keep a learning signal.
inline NodeId build_gain_hinge(Graph& g, NodeId margins, NodeId onehot, const GainSpec& spec,
                               std::size_t n_rows) {
    spec.validate();
    NodeId squashed = g.affine(g.clip_interval(margins, -1.0, 1.0), 0.5, 0.5);
    NodeId clipped = g.clip_upper(squashed, 1.0 - spec.epsilon);
    NodeId log_comp = g.log(g.affine(clipped, -1.0, 1.0));
    return g.affine(g.sum(g.mul(onehot, log_comp)), -spec.alpha / static_cast<double>(n_rows), 0.0);
}

inline NodeId build_gain(Graph& g, NodeId pred, NodeId target, const GainSpec& spec,
                         std::size_t n_rows) {
    switch (spec.kind) {
        case GainKind::MseInverse: return build_gain_mse(g, pred, target, spec);
        case GainKind::CrossEntropyComplement:
            return build_gain_cross_entropy(g, pred, target, spec, n_rows);
        case GainKind::HingeLog: return build_gain_hinge(g, pred, target, spec, n_rows);
    }
    throw ArgumentError("unknown gain kind");
}

// ---- value helpers --------------------------------------------------------

namespace detail {

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shapes " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

inline double eval_gain(const Tensor& pred, const Tensor& target, const GainSpec& spec) {
    Graph g;
    NodeId p = g.data(pred.shape(), "pred");
    NodeId y = g.data(target.shape(), "target");
    g.set_output(build_gain(g, p, y, spec, pred.rows()));
    Bindings b;
    b.set(p, pred);
    b.set(y, target);
    return evaluate(g, b).value();
}

}  // namespace detail

inline double gain_mse(const Tensor& pred, const Tensor& target, const GainSpec& spec) {
    if (spec.kind != GainKind::MseInverse) throw ContractError("gain_mse called with wrong kind");
    detail::check_same_shape(pred, target, "gain_mse");
    return detail::eval_gain(pred, target, spec);
}

inline double gain_cross_entropy(const Tensor& probs, const Tensor& onehot, const GainSpec& spec) {
    if (spec.kind != GainKind::CrossEntropyComplement)
        throw ContractError("gain_cross_entropy called with wrong kind");
    detail::check_same_shape(probs, onehot, "gain_cross_entropy");
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < probs.cols(); ++j) s += probs.at(i, j);
        if (std::abs(s - 1.0) > 1e-6)
            throw ContractError("gain_cross_entropy: row " + std::to_string(i) +
                                " of predictions sums to " + std::to_string(s) + ", not 1");
    }
    return detail::eval_gain(probs, onehot, spec);
}

inline double gain_hinge(const Tensor& margins, const Tensor& onehot, const GainSpec& spec) {
    if (spec.kind != GainKind::HingeLog) throw ContractError("gain_hinge called with wrong kind");
    detail::check_same_shape(margins, onehot, "gain_hinge");
    return detail::eval_gain(margins, onehot, spec);
}

}  // namespace sfs
