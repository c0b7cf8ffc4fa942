#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sfs/autodiff.hpp"
#include "sfs/common.hpp"
#include "sfs/gain.hpp"
#include "sfs/model.hpp"
#include "sfs/tensor.hpp"

// Finite-difference audit of the reverse-mode gradients: every primitive op,
// every model kind's training loss, and all three gain functions. Central
// differences only see the clamped forward value, so straight-through clips
// are checked two ways: against finite differences where no clamp is active,
// and against the defined identity Jacobian at clamped points.

namespace sfs {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t cases = 0;
    std::string worst_case;
};

namespace detail {

constexpr double kFdStep = 1e-4;
constexpr double kKinkMargin = 5e-2;  // keep samples away from relu/clip kinks

inline void record(GradCheckReport& rep, const std::string& name, double err) {
    rep.cases += 1;
    if (err > rep.max_rel_error) {
        rep.max_rel_error = err;
        rep.worst_case = name;
    }
}

inline Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// away from zero on both sides, for relu inputs
inline Tensor random_tensor_no_kink(Rng& rng, Shape shape, double kink) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v = rng.uniform(kKinkMargin, 1.5);
        if (rng.uniform01() < 0.5) v = -v;
        t[i] = kink + v;
    }
    return t;
}

inline void check_graph(GradCheckReport& rep, const std::string& name, const Graph& g,
                        const Bindings& b) {
    GradientResult ad = input_gradient(g, b);
    if (g.input_node() >= 0) {
        const Tensor fd = finite_difference_gradient(g, b, g.input_node(), kFdStep);
        record(rep, name + "/input", max_relative_error(ad.wrt_input, fd));
    }
    const auto& params = g.param_nodes();
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Tensor fd = finite_difference_gradient(g, b, params[p], kFdStep);
        record(rep, name + "/param" + std::to_string(p),
               max_relative_error(ad.wrt_params[p], fd));
    }
}

inline void check_primitives(GradCheckReport& rep, Rng& rng) {
    const std::size_t n = 2 + rng.index(3);
    const std::size_t m = 2 + rng.index(3);
    const std::size_t k = 2 + rng.index(3);

    {
        Graph g;
        NodeId a = g.input(Shape{n, k});
        NodeId b = g.param(Shape{k, m});
        g.set_output(g.sum(g.matmul(a, b)));
        Bindings bind;
        bind.set(a, random_tensor(rng, {n, k}, -2, 2));
        bind.set(b, random_tensor(rng, {k, m}, -2, 2));
        check_graph(rep, "matmul", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        NodeId b = g.param(Shape{m});
        // square makes the bias gradient row-dependent
        g.set_output(g.sum(g.square(g.bias_add(x, b))));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -2, 2));
        bind.set(b, random_tensor(rng, {m}, -1, 1));
        check_graph(rep, "bias_add", g, bind);
    }
    for (const char* which : {"add", "sub", "mul"}) {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        NodeId y = g.param(Shape{n, m});
        NodeId z = which[0] == 'a' ? g.add(x, y) : (which[0] == 's' ? g.sub(x, y) : g.mul(x, y));
        g.set_output(g.sum(g.square(z)));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -2, 2));
        bind.set(y, random_tensor(rng, {n, m}, -2, 2));
        check_graph(rep, which, g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.mean(g.relu(x)));
        Bindings bind;
        bind.set(x, random_tensor_no_kink(rng, {n, m}, 0.0));
        check_graph(rep, "relu", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        NodeId w = g.constant(random_tensor(rng, {n, m}, -1, 1), "w");
        g.set_output(g.sum(g.mul(g.softmax_rows(x), w)));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -2, 2));
        check_graph(rep, "softmax_rows", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.sum(g.log(x)));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, 0.5, 3.0));
        check_graph(rep, "log", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.mean(g.square(g.affine(x, 1.7, -0.3))));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -2, 2));
        check_graph(rep, "affine_mean", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.sum(g.reciprocal(x)));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, 0.5, 3.0));
        check_graph(rep, "reciprocal", g, bind);
    }
    {
        // clip_upper, all entries strictly below the bound: finite differences apply
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.sum(g.square(g.clip_upper(x, 2.0))));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -1.5, 1.5));
        check_graph(rep, "clip_upper_inactive", g, bind);
    }
    {
        // clip_upper at a clamped point: expected Jacobian is the identity
        Graph g;
        NodeId x = g.input(Shape{1, m});
        g.set_output(g.sum(g.clip_upper(x, 1.0)));
        Bindings bind;
        bind.set(x, random_tensor(rng, {1, m}, 2.0, 5.0));
        GradientResult ad = input_gradient(g, bind);
        for (std::size_t i = 0; i < ad.wrt_input.size(); ++i)
            record(rep, "clip_upper_active", relative_error(ad.wrt_input[i], 1.0));
    }
    {
        Graph g;
        NodeId x = g.input(Shape{n, m});
        g.set_output(g.sum(g.square(g.clip_interval(x, -2.0, 2.0))));
        Bindings bind;
        bind.set(x, random_tensor(rng, {n, m}, -1.5, 1.5));
        check_graph(rep, "clip_interval_inactive", g, bind);
    }
    {
        Graph g;
        NodeId x = g.input(Shape{1, m});
        g.set_output(g.sum(g.clip_interval(x, -1.0, 1.0)));
        Tensor far(Shape{1, m});
        for (std::size_t i = 0; i < m; ++i) far[i] = (i % 2 == 0 ? 4.0 : -4.0) * (1.0 + rng.uniform01());
        Bindings bind;
        bind.set(x, far);
        GradientResult ad = input_gradient(g, bind);
        for (std::size_t i = 0; i < ad.wrt_input.size(); ++i)
            record(rep, "clip_interval_active", relative_error(ad.wrt_input[i], 1.0));
    }
}

// Random small model of the given kind; training-loss gradients w.r.t. the
// input batch and every parameter. Samples are redrawn until every hidden
// preactivation and every margin sits clear of its kink.
inline void check_model_loss(GradCheckReport& rep, Rng& rng, ModelKind kind) {
    ModelSpec spec;
    spec.kind = kind;
    spec.input_dim = 4;
    spec.output_dim = (kind == ModelKind::MlpRegressor) ? 1 : 3;
    if (kind == ModelKind::MlpClassifier || kind == ModelKind::MlpRegressor)
        spec.hidden_layers = {5};
    spec.l2_weight_decay = 0.01;

    TrainedModel model = init(spec, rng.next_u64());
    const std::size_t rows = 3;

    Tensor x;
    bool ok = false;
    for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        x = random_tensor(rng, {rows, spec.input_dim}, -1.5, 1.5);
        ok = true;
        // replay the affine chain to measure kink distances
        Tensor h = x;
        const auto dims = spec.layer_dims();
        for (std::size_t l = 0; l + 1 < dims.size() && ok; ++l) {
            Tensor z(Shape{rows, dims[l + 1]});
            const Tensor& w = model.params[2 * l];
            const Tensor& b = model.params[2 * l + 1];
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < dims[l + 1]; ++j) {
                    double acc = b[j];
                    for (std::size_t p = 0; p < dims[l]; ++p)
                        acc += h.at(i, p) * w.at(p, j);
                    z.at(i, j) = acc;
                }
            const bool last = (l + 2 == dims.size());
            if (!last) {
                for (std::size_t i = 0; i < z.size(); ++i)
                    if (std::abs(z[i]) < kKinkMargin) ok = false;
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::max(0.0, z[i]);
            } else if (kind == ModelKind::LinearSvm) {
                for (std::size_t i = 0; i < z.size(); ++i)
                    if (std::abs(std::abs(z[i]) - 1.0) < kKinkMargin) ok = false;
            }
            h = z;
        }
    }

    Tensor y(Shape{rows, spec.output_dim});
    if (kind == ModelKind::MlpRegressor) {
        for (std::size_t i = 0; i < rows; ++i) y[i] = rng.uniform(-2, 2);
    } else {
        for (std::size_t i = 0; i < rows; ++i)
            y[i * spec.output_dim + rng.index(spec.output_dim)] = 1.0;
    }

    ForwardGraph fg;
    build_forward(fg, spec, rows, /*trainable=*/true, /*input_leaf=*/true);
    attach_loss(fg, spec, rows);
    Bindings b;
    b.set(fg.x, x);
    b.set(fg.y, y);
    bind_params(b, fg, model);
    check_graph(rep, std::string("loss_") + model_kind_name(kind), fg.graph, b);
}

inline void check_gains(GradCheckReport& rep, Rng& rng) {
    const std::size_t rows = 2;
    {
        GainSpec spec;
        spec.kind = GainKind::MseInverse;
        Graph g;
        NodeId pred = g.input(Shape{rows, 2});
        NodeId target = g.data(Shape{rows, 2});
        g.set_output(build_gain_mse(g, pred, target, spec));
        // keep the mse away from zero: the inverse's curvature there breaks
        // the finite-difference quadrature, not the gradient itself
        Tensor p(Shape{rows, 2});
        Tensor t(Shape{rows, 2});
        double mse = 0.0;
        do {
            p = random_tensor(rng, {rows, 2}, -2, 2);
            t = random_tensor(rng, {rows, 2}, -2, 2);
            mse = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) mse += (p[i] - t[i]) * (p[i] - t[i]);
            mse /= static_cast<double>(p.size());
        } while (mse < 0.2);
        Bindings b;
        b.set(pred, p);
        b.set(target, t);
        check_graph(rep, "gain_mse_inverse", g, b);
    }
    {
        GainSpec spec;
        spec.kind = GainKind::CrossEntropyComplement;
        Graph g;
        NodeId pred = g.input(Shape{rows, 3});
        NodeId target = g.data(Shape{rows, 3});
        g.set_output(build_gain_cross_entropy(g, pred, target, spec, rows));
        Tensor probs(Shape{rows, 3});
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = rng.uniform(0.05, 0.9);
        Tensor y(Shape{rows, 3});
        for (std::size_t i = 0; i < rows; ++i) y[i * 3 + rng.index(3)] = 1.0;
        Bindings b;
        b.set(pred, probs);
        b.set(target, y);
        check_graph(rep, "gain_cross_entropy", g, b);
    }
    {
        GainSpec spec;
        spec.kind = GainKind::HingeLog;
        Graph g;
        NodeId pred = g.input(Shape{rows, 3});
        NodeId target = g.data(Shape{rows, 3});
        g.set_output(build_gain_hinge(g, pred, target, spec, rows));
        // margins strictly inside (-1, 1): no clamp active, finite differences apply
        Bindings b;
        b.set(pred, random_tensor(rng, {rows, 3}, -0.9, 0.9));
        Tensor y(Shape{rows, 3});
        for (std::size_t i = 0; i < rows; ++i) y[i * 3 + rng.index(3)] = 1.0;
        b.set(target, y);
        check_graph(rep, "gain_hinge_log", g, b);

        // clamped margins: central differences see a flat clamp, so the
        // expected value is the straight-through one, alpha/(2N) below -1
        // and alpha/(2N eps) above +1
        Tensor hot(Shape{rows, 3});
        Tensor yhot(Shape{rows, 3});
        for (std::size_t i = 0; i < rows; ++i) {
            yhot[i * 3 + 0] = 1.0;
            hot[i * 3 + 0] = i % 2 == 0 ? rng.uniform(1.2, 3.0) : rng.uniform(-3.0, -1.2);
            hot[i * 3 + 1] = rng.uniform(-0.5, 0.5);
            hot[i * 3 + 2] = rng.uniform(-0.5, 0.5);
        }
        Bindings bh;
        bh.set(pred, hot);
        bh.set(target, yhot);
        GradientResult ad = input_gradient(g, bh);
        const double a_over_n = spec.alpha / static_cast<double>(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            const double expected =
                hot[i * 3] > 1.0 ? 0.5 * a_over_n / spec.epsilon : 0.5 * a_over_n;
            record(rep, "gain_hinge_log/straight_through",
                   relative_error(ad.wrt_input[i * 3], expected));
        }
    }
    {
        // cross-entropy gain with the upper clip active: straight-through
        // gradient is alpha/(N eps) on the true class
        GainSpec spec;
        spec.kind = GainKind::CrossEntropyComplement;
        Graph g;
        NodeId pred = g.input(Shape{1, 3});
        NodeId target = g.data(Shape{1, 3});
        g.set_output(build_gain_cross_entropy(g, pred, target, spec, 1));
        Tensor p(Shape{1, 3}, {1.0, 0.0, 0.0});
        Tensor y(Shape{1, 3}, {1.0, 0.0, 0.0});
        Bindings b;
        b.set(pred, p);
        b.set(target, y);
        GradientResult ad = input_gradient(g, b);
        record(rep, "gain_cross_entropy/straight_through",
               relative_error(ad.wrt_input[0], spec.alpha / spec.epsilon));
    }
}

}  // namespace detail

// `rounds` seeded sweeps; each sweep covers every primitive, every model
// kind's loss and every gain function once.
inline GradCheckReport run_gradcheck(std::size_t rounds, std::uint64_t seed) {
    GradCheckReport rep;
    for (std::size_t round = 0; round < rounds; ++round) {
        Rng rng(combine_seed(seed, round));
        detail::check_primitives(rep, rng);
        for (ModelKind kind : {ModelKind::SoftmaxLinear, ModelKind::MlpClassifier,
                               ModelKind::MlpRegressor, ModelKind::LinearSvm})
            detail::check_model_loss(rep, rng, kind);
        detail::check_gains(rep, rng);
    }
    return rep;
}

}  // namespace sfs
