#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sfs/autodiff.hpp"
#include "sfs/common.hpp"
#include "sfs/tensor.hpp"

namespace sfs {

enum class ModelKind { SoftmaxLinear, MlpClassifier, MlpRegressor, LinearSvm };
enum class LossKind { CategoricalCrossEntropy, Mse, Hinge };
enum class Optimizer { Adam, Sgd };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::SoftmaxLinear: return "softmax_linear";
        case ModelKind::MlpClassifier: return "mlp_classifier";
        case ModelKind::MlpRegressor: return "mlp_regressor";
        case ModelKind::LinearSvm: return "linear_svm";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    if (s == "softmax_linear") return ModelKind::SoftmaxLinear;
    if (s == "mlp_classifier") return ModelKind::MlpClassifier;
    if (s == "mlp_regressor") return ModelKind::MlpRegressor;
    if (s == "linear_svm") return ModelKind::LinearSvm;
    throw ArgumentError("unknown model kind '" + s + "'");
}

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::CategoricalCrossEntropy: return "categorical_cross_entropy";
        case LossKind::Mse: return "mse";
        case LossKind::Hinge: return "hinge";
    }
    return "?";
}

struct ModelSpec {
    ModelKind kind = ModelKind::MlpClassifier;
    std::vector<std::size_t> hidden_layers;  // empty for the linear kinds
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;  // classes, or 1 for the regressor
    double l2_weight_decay = 0.001;

    bool is_classifier() const { return kind != ModelKind::MlpRegressor; }
    bool has_softmax_output() const {
        return kind == ModelKind::SoftmaxLinear || kind == ModelKind::MlpClassifier;
    }

    LossKind loss_kind() const {
        switch (kind) {
            case ModelKind::SoftmaxLinear:
            case ModelKind::MlpClassifier: return LossKind::CategoricalCrossEntropy;
            case ModelKind::MlpRegressor: return LossKind::Mse;
            case ModelKind::LinearSvm: return LossKind::Hinge;
        }
        return LossKind::Mse;
    }

    void validate() const {
        if (input_dim == 0) throw ArgumentError("model input_dim must be >= 1");
        if (output_dim == 0) throw ArgumentError("model output_dim must be >= 1");
        if (is_classifier() && output_dim < 2)
            throw ArgumentError("classifiers need output_dim >= 2");
        if ((kind == ModelKind::SoftmaxLinear || kind == ModelKind::LinearSvm) &&
            !hidden_layers.empty())
            throw ArgumentError("linear model kinds take no hidden layers");
        for (std::size_t w : hidden_layers)
            if (w == 0) throw ArgumentError("hidden layer widths must be positive");
        if (l2_weight_decay < 0.0) throw ArgumentError("l2_weight_decay must be >= 0");
    }

    // [input, hidden..., output]
    std::vector<std::size_t> layer_dims() const {
        std::vector<std::size_t> dims;
        dims.push_back(input_dim);
        for (std::size_t w : hidden_layers) dims.push_back(w);
        dims.push_back(output_dim);
        return dims;
    }
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size == 0) throw ArgumentError("batch_size must be positive");
        if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
        if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
            throw ArgumentError("adam betas must lie in (0, 1)");
    }
};

// Parameters in declaration order: W0, b0, W1, b1, ...
struct TrainedModel {
    ModelSpec spec;
    std::vector<Tensor> params;
    LossKind loss_kind = LossKind::CategoricalCrossEntropy;
    std::uint64_t init_seed = 0;
};

// ---- initialization --------------------------------------------------------

// Scaled uniform init, bound = sqrt(6 / (fan_in + fan_out)); biases zero.
inline TrainedModel init(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    TrainedModel m;
    m.spec = spec;
    m.loss_kind = spec.loss_kind();
    m.init_seed = seed;
    Rng rng(seed);
    const auto dims = spec.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor w(Shape{fan_in, fan_out});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
        m.params.push_back(std::move(w));
        m.params.push_back(Tensor::zeros(Shape{fan_out}));
    }
    return m;
}

// ---- graph construction ----------------------------------------------------

namespace detail {

struct ForwardGraph {
    Graph graph;
    NodeId x = -1;
    NodeId y = -1;                  // target leaf (loss graphs only)
    std::vector<NodeId> params;     // leaf per parameter tensor, declaration order
    NodeId raw_output = -1;         // logits / margins / predictions
    NodeId model_output = -1;       // softmax probabilities for softmax kinds, else raw
    NodeId loss = -1;               // scalar (loss graphs only)
};

// trainable=true declares parameters as Param leaves (gradients tracked);
// input_leaf=true declares x as the designated Input (for input saliency).
inline void build_forward(ForwardGraph& fg, const ModelSpec& spec, std::size_t n_rows,
                          bool trainable, bool input_leaf) {
    Graph& g = fg.graph;
    fg.x = input_leaf ? g.input(Shape{n_rows, spec.input_dim}, "x")
                      : g.data(Shape{n_rows, spec.input_dim}, "x");
    const auto dims = spec.layer_dims();
    NodeId h = fg.x;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const Shape ws{dims[l], dims[l + 1]};
        const Shape bs{dims[l + 1]};
        const std::string wl = "w" + std::to_string(l);
        const std::string bl = "b" + std::to_string(l);
        NodeId w = trainable ? g.param(ws, wl) : g.data(ws, wl);
        NodeId b = trainable ? g.param(bs, bl) : g.data(bs, bl);
        fg.params.push_back(w);
        fg.params.push_back(b);
        h = g.bias_add(g.matmul(h, w), b);
        const bool last = (l + 2 == dims.size());
        if (!last) h = g.relu(h);
    }
    fg.raw_output = h;
    fg.model_output = spec.has_softmax_output() ? g.softmax_rows(h) : h;
}

// Data loss plus l2 penalty on the weight matrices (biases excluded).
inline void attach_loss(ForwardGraph& fg, const ModelSpec& spec, std::size_t n_rows) {
    Graph& g = fg.graph;
    fg.y = g.data(Shape{n_rows, spec.output_dim}, "y");
    const double inv_n = 1.0 / static_cast<double>(n_rows);
    NodeId data_loss;
    switch (spec.loss_kind()) {
        case LossKind::CategoricalCrossEntropy: {
            NodeId logp = g.log(fg.model_output);
            data_loss = g.affine(g.sum(g.mul(fg.y, logp)), -inv_n, 0.0);
            break;
        }
        case LossKind::Mse: {
            data_loss = g.mean(g.square(g.sub(fg.raw_output, fg.y)));
            break;
        }
        case LossKind::Hinge: {
            // sum_c y*max(0, 1-m) + (1-y)*max(0, 1+m), averaged over samples
            NodeId miss_true = g.mul(fg.y, g.relu(g.affine(fg.raw_output, -1.0, 1.0)));
            NodeId miss_other =
                g.mul(g.affine(fg.y, -1.0, 1.0), g.relu(g.affine(fg.raw_output, 1.0, 1.0)));
            data_loss = g.affine(g.sum(g.add(miss_true, miss_other)), inv_n, 0.0);
            break;
        }
        default: throw ContractError("unreachable loss kind");
    }
    NodeId total = data_loss;
    if (spec.l2_weight_decay > 0.0) {
        NodeId penalty = -1;
        for (std::size_t i = 0; i < fg.params.size(); i += 2) {  // weight matrices only
            NodeId sq = g.sum(g.square(fg.params[i]));
            penalty = penalty < 0 ? sq : g.add(penalty, sq);
        }
        total = g.add(data_loss, g.affine(penalty, spec.l2_weight_decay, 0.0));
    }
    fg.loss = total;
    g.set_output(total);
}

inline void bind_params(Bindings& b, const ForwardGraph& fg, const TrainedModel& m) {
    for (std::size_t i = 0; i < fg.params.size(); ++i) b.set(fg.params[i], m.params[i]);
}

}  // namespace detail

// ---- prediction and loss ----------------------------------------------------

// Probability rows for the softmax kinds, raw margins for LinearSvm, scalar
// predictions for the regressor.
inline Tensor predict(const TrainedModel& m, const Tensor& X) {
    if (X.rank() != 2 || X.cols() != m.spec.input_dim)
        throw ShapeError("predict: X has shape " + shape_str(X.shape()) + ", expected (n x " +
                         std::to_string(m.spec.input_dim) + ")");
    detail::ForwardGraph fg;
    detail::build_forward(fg, m.spec, X.rows(), /*trainable=*/false, /*input_leaf=*/false);
    fg.graph.set_output(fg.model_output);
    Bindings b;
    b.set(fg.x, X);
    detail::bind_params(b, fg, m);
    return evaluate(fg.graph, b);
}

// Full-batch training objective (data loss + l2 penalty).
inline double loss_value(const TrainedModel& m, const Tensor& X, const Tensor& Y) {
    detail::ForwardGraph fg;
    detail::build_forward(fg, m.spec, X.rows(), /*trainable=*/false, /*input_leaf=*/false);
    detail::attach_loss(fg, m.spec, X.rows());
    Bindings b;
    b.set(fg.x, X);
    b.set(fg.y, Y);
    detail::bind_params(b, fg, m);
    return evaluate(fg.graph, b).value();
}

// ---- training ----------------------------------------------------------------

namespace detail {

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t t = 0;
};

inline void apply_update(TrainedModel& model, const std::vector<Tensor>& grads,
                         const TrainConfig& cfg, AdamState& adam) {
    if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t p = 0; p < model.params.size(); ++p)
            for (std::size_t i = 0; i < model.params[p].size(); ++i)
                model.params[p][i] -= cfg.learning_rate * grads[p][i];
        return;
    }
    adam.t += 1;
    const double b1t = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
    const double b2t = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
    for (std::size_t p = 0; p < model.params.size(); ++p) {
        Tensor& w = model.params[p];
        Tensor& m1 = adam.m[p];
        Tensor& m2 = adam.v[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = grads[p][i];
            m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * gi;
            m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * gi * gi;
            const double mh = m1[i] / b1t;
            const double vh = m2[i] / b2t;
            w[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps);
        }
    }
}

}  // namespace detail

// Minibatch gradient descent on a private copy of the model. Batch order is
// reshuffled every epoch from cfg.seed alone; the final short batch is used
// as-is.
inline TrainedModel train(const TrainedModel& model, const Tensor& X, const Tensor& Y,
                          const TrainConfig& cfg) {
    cfg.validate();
    const ModelSpec& spec = model.spec;
    if (X.rank() != 2 || X.cols() != spec.input_dim)
        throw ShapeError("train: X has shape " + shape_str(X.shape()));
    if (Y.rank() != 2 || Y.cols() != spec.output_dim || Y.rows() != X.rows())
        throw ShapeError("train: Y has shape " + shape_str(Y.shape()) + ", expected (" +
                         std::to_string(X.rows()) + " x " + std::to_string(spec.output_dim) + ")");

    TrainedModel out = model;
    const std::size_t n = X.rows();
    if (n == 0) throw ContractError("train: empty dataset");

    detail::AdamState adam;
    adam.m.reserve(out.params.size());
    adam.v.reserve(out.params.size());
    for (const Tensor& p : out.params) {
        adam.m.push_back(Tensor::zeros(p.shape()));
        adam.v.push_back(Tensor::zeros(p.shape()));
    }

    // one loss graph + executor per distinct batch size (full batches + remainder)
    struct BatchGraph {
        detail::ForwardGraph fg;
        std::unique_ptr<GraphExec> exec;
    };
    std::map<std::size_t, std::unique_ptr<BatchGraph>> graphs;
    auto graph_for = [&](std::size_t rows) -> BatchGraph& {
        auto it = graphs.find(rows);
        if (it == graphs.end()) {
            auto bg = std::make_unique<BatchGraph>();
            detail::build_forward(bg->fg, spec, rows, /*trainable=*/true, /*input_leaf=*/false);
            detail::attach_loss(bg->fg, spec, rows);
            bg->exec = std::make_unique<GraphExec>(bg->fg.graph);
            it = graphs.emplace(rows, std::move(bg)).first;
        }
        return *it->second;
    };

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    const std::size_t r = spec.input_dim;
    const std::size_t c = spec.output_dim;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t rows = std::min(cfg.batch_size, n - start);
            BatchGraph& bg = graph_for(rows);

            Tensor xb(Shape{rows, r});
            Tensor yb(Shape{rows, c});
            for (std::size_t i = 0; i < rows; ++i) {
                const std::size_t src = order[start + i];
                for (std::size_t j = 0; j < r; ++j) xb[i * r + j] = X[src * r + j];
                for (std::size_t j = 0; j < c; ++j) yb[i * c + j] = Y[src * c + j];
            }

            Bindings b;
            b.set(bg.fg.x, std::move(xb));
            b.set(bg.fg.y, std::move(yb));
            detail::bind_params(b, bg.fg, out);

            try {
                bg.exec->forward(b);
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " +
                                   e.what());
            }
            GradientResult grad = bg.exec->backward();
            detail::apply_update(out, grad.wrt_params, cfg, adam);
        }
    }
    return out;
}

}  // namespace sfs
