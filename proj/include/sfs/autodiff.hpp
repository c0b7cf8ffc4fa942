#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/tensor.hpp"

// Reverse-mode differentiation over a flat tape of dense-tensor ops.
// Node construction order is the topological order; forward walks the tape
// left to right, backward walks it right to left. All reductions are plain
// sequential loops so repeated runs are bit-identical.

namespace sfs {

enum class OpKind {
    // leaves
    Input,  // designated sample input; gradient is reported as wrt_input
    Param,  // model parameter; gradient reported in wrt_params
    Data,   // bound tensor with no gradient tracking (targets, frozen params)
    Const,  // value embedded in the graph
    // primitives
    MatMul,
    BiasAdd,
    Add,
    Sub,
    Mul,
    Square,
    Relu,
    SoftmaxRows,
    Log,
    Sum,
    Mean,
    ClipUpper,     // min(x, hi), straight-through backward
    ClipInterval,  // min(hi, max(lo, x)), straight-through backward
    Affine,        // a*x + b, scalar a and b
    Reciprocal,
};

inline const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Param: return "param";
        case OpKind::Data: return "data";
        case OpKind::Const: return "const";
        case OpKind::MatMul: return "matmul";
        case OpKind::BiasAdd: return "bias_add";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Square: return "square";
        case OpKind::Relu: return "relu";
        case OpKind::SoftmaxRows: return "softmax_rows";
        case OpKind::Log: return "log";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::ClipUpper: return "clip_upper";
        case OpKind::ClipInterval: return "clip_interval";
        case OpKind::Affine: return "affine";
        case OpKind::Reciprocal: return "reciprocal";
    }
    return "?";
}

using NodeId = int;

struct GraphNode {
    OpKind op;
    NodeId a = -1;  // first argument
    NodeId b = -1;  // second argument
    Shape shape;
    double p0 = 0.0;  // op scalar: hi / lo / multiplier
    double p1 = 0.0;  // op scalar: hi / offset
    std::string label;
};

struct GradientResult {
    Tensor wrt_input;                // empty when the graph has no Input leaf
    std::vector<Tensor> wrt_params;  // one per Param leaf, declaration order
};

// Bindings attach tensors to Input/Param/Data leaves by node id.
class Bindings {
public:
    void set(NodeId id, Tensor t) { values_[id] = std::move(t); }

    const Tensor* find(NodeId id) const {
        auto it = values_.find(id);
        return it == values_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_map<NodeId, Tensor> values_;
};

class Graph {
public:
    // ---- leaves ----
    NodeId input(Shape shape, std::string label = "x") {
        if (input_node_ >= 0) throw ContractError("graph already has a designated input leaf");
        input_node_ = push({OpKind::Input, -1, -1, std::move(shape), 0, 0, std::move(label)});
        return input_node_;
    }

    NodeId param(Shape shape, std::string label = "theta") {
        NodeId id = push({OpKind::Param, -1, -1, std::move(shape), 0, 0, std::move(label)});
        param_nodes_.push_back(id);
        return id;
    }

    NodeId data(Shape shape, std::string label = "d") {
        return push({OpKind::Data, -1, -1, std::move(shape), 0, 0, std::move(label)});
    }

    NodeId constant(Tensor value, std::string label = "c") {
        NodeId id = push({OpKind::Const, -1, -1, value.shape(), 0, 0, std::move(label)});
        const_values_.emplace_back(id, std::move(value));
        return id;
    }

    // ---- primitives ----
    NodeId matmul(NodeId a, NodeId b) {
        const Shape& sa = node(a).shape;
        const Shape& sb = node(b).shape;
        if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
            throw ShapeError("matmul shapes " + shape_str(sa) + " * " + shape_str(sb));
        return push({OpKind::MatMul, a, b, Shape{sa[0], sb[1]}});
    }

    // Adds a length-m vector to every row of an n x m matrix.
    NodeId bias_add(NodeId m, NodeId bias) {
        const Shape& sm = node(m).shape;
        const Shape& sb = node(bias).shape;
        if (sm.size() != 2 || sb.size() != 1 || sb[0] != sm[1])
            throw ShapeError("bias_add shapes " + shape_str(sm) + " + " + shape_str(sb));
        return push({OpKind::BiasAdd, m, bias, sm});
    }

    NodeId add(NodeId a, NodeId b) { return elementwise(OpKind::Add, a, b); }
    NodeId sub(NodeId a, NodeId b) { return elementwise(OpKind::Sub, a, b); }
    NodeId mul(NodeId a, NodeId b) { return elementwise(OpKind::Mul, a, b); }

    NodeId square(NodeId x) { return push({OpKind::Square, x, -1, node(x).shape}); }
    NodeId relu(NodeId x) { return push({OpKind::Relu, x, -1, node(x).shape}); }

    NodeId softmax_rows(NodeId x) {
        if (node(x).shape.size() != 2)
            throw ShapeError("softmax_rows expects a matrix, got " + shape_str(node(x).shape));
        return push({OpKind::SoftmaxRows, x, -1, node(x).shape});
    }

    NodeId log(NodeId x) { return push({OpKind::Log, x, -1, node(x).shape}); }

    NodeId sum(NodeId x) { return push({OpKind::Sum, x, -1, Shape{}}); }
    NodeId mean(NodeId x) { return push({OpKind::Mean, x, -1, Shape{}}); }

    // Forward clamps, backward passes gradient 1 everywhere.
    NodeId clip_upper(NodeId x, double hi) {
        return push({OpKind::ClipUpper, x, -1, node(x).shape, 0.0, hi});
    }

    NodeId clip_interval(NodeId x, double lo, double hi) {
        if (!(lo < hi))
            throw ArgumentError("clip_interval requires lo < hi, got [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]");
        return push({OpKind::ClipInterval, x, -1, node(x).shape, lo, hi});
    }

    NodeId affine(NodeId x, double mult, double offset) {
        return push({OpKind::Affine, x, -1, node(x).shape, mult, offset});
    }

    NodeId reciprocal(NodeId x) { return push({OpKind::Reciprocal, x, -1, node(x).shape}); }

    // ---- structure ----
    void set_output(NodeId id) {
        check_id(id);
        output_ = id;
    }

    NodeId output() const { return output_; }
    NodeId input_node() const { return input_node_; }
    const std::vector<NodeId>& param_nodes() const { return param_nodes_; }
    std::size_t node_count() const { return nodes_.size(); }

    const GraphNode& node(NodeId id) const {
        check_id(id);
        return nodes_[static_cast<std::size_t>(id)];
    }

    const Shape& shape_of(NodeId id) const { return node(id).shape; }

    const std::vector<std::pair<NodeId, Tensor>>& constants() const { return const_values_; }

private:
    NodeId push(GraphNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    NodeId elementwise(OpKind op, NodeId a, NodeId b) {
        if (node(a).shape != node(b).shape)
            throw ShapeError(std::string(op_name(op)) + " shapes " + shape_str(node(a).shape) +
                             " vs " + shape_str(node(b).shape));
        return push({op, a, b, node(a).shape});
    }

    void check_id(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw ContractError("node id " + std::to_string(id) + " out of range");
    }

    std::vector<GraphNode> nodes_;
    std::vector<std::pair<NodeId, Tensor>> const_values_;
    std::vector<NodeId> param_nodes_;
    NodeId output_ = -1;
    NodeId input_node_ = -1;
};

// ============================================================================
// Dense kernels (deterministic accumulation order)
// ============================================================================
namespace detail {

// C(n x m) += A(n x k) * B(k x m)
inline void gemm_nn(const double* A, const double* B, double* C, std::size_t n, std::size_t k,
                    std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = A + i * k;
        double* c = C + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[p];
            const double* b = B + p * m;
            for (std::size_t j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

// C(n x k) += A(n x m) * B(k x m)^T
inline void gemm_nt(const double* A, const double* B, double* C, std::size_t n, std::size_t m,
                    std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = A + i * m;
        double* c = C + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* b = B + p * m;
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += a[j] * b[j];
            c[p] += acc;
        }
    }
}

// C(k x m) += A(n x k)^T * B(n x m)
inline void gemm_tn(const double* A, const double* B, double* C, std::size_t n, std::size_t k,
                    std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = A + i * k;
        const double* b = B + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[p];
            double* c = C + p * m;
            for (std::size_t j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

inline void softmax_row(const double* z, double* out, std::size_t c) {
    double m = z[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, z[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        out[j] = std::exp(z[j] - m);
        denom += out[j];
    }
    for (std::size_t j = 0; j < c; ++j) out[j] /= denom;
}

}  // namespace detail

// ============================================================================
// Execution
// ============================================================================

// Owns the forward/backward buffers for one graph. Reusable across calls with
// fresh bindings; not shared between threads.
class GraphExec {
public:
    explicit GraphExec(const Graph& g) : graph_(&g), values_(g.node_count()), grads_(g.node_count()) {}

    const Graph& graph() const { return *graph_; }

    // Forward pass; returns the designated output value.
    const Tensor& forward(const Bindings& b) {
        const Graph& g = *graph_;
        if (g.output() < 0) throw ContractError("graph has no designated output");
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            eval_node(static_cast<NodeId>(i), b);
            const Tensor& v = values_[i];
            if (!v.all_finite())
                throw NumericError("non-finite value at node #" + std::to_string(i) + " (" +
                                   op_name(g.node(static_cast<NodeId>(i)).op) + ")");
        }
        return values_[static_cast<std::size_t>(g.output())];
    }

    // Reverse pass from the scalar output. forward() must have run first.
    GradientResult backward() {
        const Graph& g = *graph_;
        const NodeId out = g.output();
        if (out < 0) throw ContractError("graph has no designated output");
        if (values_[static_cast<std::size_t>(out)].size() != 1)
            throw ContractError("gradients require a scalar output, got shape " +
                                shape_str(values_[static_cast<std::size_t>(out)].shape()));

        for (std::size_t i = 0; i < g.node_count(); ++i)
            grads_[i] = Tensor::zeros(values_[i].shape());
        grads_[static_cast<std::size_t>(out)][0] = 1.0;

        for (NodeId id = static_cast<NodeId>(g.node_count()) - 1; id >= 0; --id)
            backprop_node(id);

        GradientResult r;
        if (g.input_node() >= 0) r.wrt_input = grads_[static_cast<std::size_t>(g.input_node())];
        r.wrt_params.reserve(g.param_nodes().size());
        for (NodeId p : g.param_nodes()) r.wrt_params.push_back(grads_[static_cast<std::size_t>(p)]);
        return r;
    }

    const Tensor& value_of(NodeId id) const { return values_[static_cast<std::size_t>(id)]; }

private:
    void eval_node(NodeId id, const Bindings& b) {
        const GraphNode& n = graph_->node(id);
        Tensor& out = values_[static_cast<std::size_t>(id)];
        switch (n.op) {
            case OpKind::Input:
            case OpKind::Param:
            case OpKind::Data: {
                const Tensor* t = b.find(id);
                if (!t)
                    throw ShapeError("missing binding for leaf '" + n.label + "' (node #" +
                                     std::to_string(id) + ")");
                if (t->shape() != n.shape)
                    throw ShapeError("binding for '" + n.label + "' has shape " +
                                     shape_str(t->shape()) + ", expected " + shape_str(n.shape));
                out = *t;
                return;
            }
            case OpKind::Const: {
                for (const auto& [cid, v] : graph_->constants())
                    if (cid == id) {
                        out = v;
                        return;
                    }
                throw ContractError("constant value missing for node #" + std::to_string(id));
            }
            default: break;
        }

        const Tensor& x = values_[static_cast<std::size_t>(n.a)];
        switch (n.op) {
            case OpKind::MatMul: {
                const Tensor& y = values_[static_cast<std::size_t>(n.b)];
                out = Tensor::zeros(n.shape);
                detail::gemm_nn(x.data().data(), y.data().data(), out.data().data(), x.rows(),
                                x.cols(), y.cols());
                return;
            }
            case OpKind::BiasAdd: {
                const Tensor& y = values_[static_cast<std::size_t>(n.b)];
                out = x;
                const std::size_t m = y.size();
                for (std::size_t i = 0; i < x.rows(); ++i)
                    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += y[j];
                return;
            }
            case OpKind::Add:
            case OpKind::Sub:
            case OpKind::Mul: {
                const Tensor& y = values_[static_cast<std::size_t>(n.b)];
                out = Tensor::zeros(n.shape);
                if (n.op == OpKind::Add)
                    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
                else if (n.op == OpKind::Sub)
                    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
                else
                    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
                return;
            }
            case OpKind::Square: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
                return;
            }
            case OpKind::Relu: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
                return;
            }
            case OpKind::SoftmaxRows: {
                out = Tensor::zeros(n.shape);
                const std::size_t c = x.cols();
                for (std::size_t i = 0; i < x.rows(); ++i)
                    detail::softmax_row(x.data().data() + i * c, out.data().data() + i * c, c);
                return;
            }
            case OpKind::Log: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::log(x[i]);
                return;
            }
            case OpKind::Sum: {
                double acc = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
                out = Tensor::scalar(acc);
                return;
            }
            case OpKind::Mean: {
                double acc = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
                out = Tensor::scalar(acc / static_cast<double>(x.size()));
                return;
            }
            case OpKind::ClipUpper: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(x[i], n.p1);
                return;
            }
            case OpKind::ClipInterval: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i)
                    out[i] = std::min(n.p1, std::max(n.p0, x[i]));
                return;
            }
            case OpKind::Affine: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = n.p0 * x[i] + n.p1;
                return;
            }
            case OpKind::Reciprocal: {
                out = Tensor::zeros(n.shape);
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = 1.0 / x[i];
                return;
            }
            default: throw ContractError("unreachable op");
        }
    }

    void backprop_node(NodeId id) {
        const GraphNode& n = graph_->node(id);
        const Tensor& g = grads_[static_cast<std::size_t>(id)];
        switch (n.op) {
            case OpKind::Input:
            case OpKind::Param:
            case OpKind::Data:
            case OpKind::Const: return;
            default: break;
        }

        const Tensor& x = values_[static_cast<std::size_t>(n.a)];
        Tensor& gx = grads_[static_cast<std::size_t>(n.a)];
        switch (n.op) {
            case OpKind::MatMul: {
                const Tensor& y = values_[static_cast<std::size_t>(n.b)];
                Tensor& gy = grads_[static_cast<std::size_t>(n.b)];
                // dX += dC * Y^T ; dY += X^T * dC
                detail::gemm_nt(g.data().data(), y.data().data(), gx.data().data(), g.rows(),
                                g.cols(), y.rows());
                detail::gemm_tn(x.data().data(), g.data().data(), gy.data().data(), x.rows(),
                                x.cols(), g.cols());
                return;
            }
            case OpKind::BiasAdd: {
                Tensor& gy = grads_[static_cast<std::size_t>(n.b)];
                const std::size_t m = gy.size();
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < m; ++j) gy[j] += g[i * m + j];
                return;
            }
            case OpKind::Add: {
                Tensor& gy = grads_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i];
                    gy[i] += g[i];
                }
                return;
            }
            case OpKind::Sub: {
                Tensor& gy = grads_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i];
                    gy[i] -= g[i];
                }
                return;
            }
            case OpKind::Mul: {
                const Tensor& y = values_[static_cast<std::size_t>(n.b)];
                Tensor& gy = grads_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i] * y[i];
                    gy[i] += g[i] * x[i];
                }
                return;
            }
            case OpKind::Square: {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += 2.0 * x[i] * g[i];
                return;
            }
            case OpKind::Relu: {
                // subgradient at 0 is 0
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (x[i] > 0.0) gx[i] += g[i];
                return;
            }
            case OpKind::SoftmaxRows: {
                const Tensor& s = values_[static_cast<std::size_t>(id)];
                const std::size_t c = s.cols();
                for (std::size_t i = 0; i < s.rows(); ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * s[i * c + j];
                    for (std::size_t j = 0; j < c; ++j)
                        gx[i * c + j] += s[i * c + j] * (g[i * c + j] - dot);
                }
                return;
            }
            case OpKind::Log: {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / x[i];
                return;
            }
            case OpKind::Sum: {
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
                return;
            }
            case OpKind::Mean: {
                const double inv = 1.0 / static_cast<double>(gx.size());
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * inv;
                return;
            }
            case OpKind::ClipUpper:
            case OpKind::ClipInterval: {
                // straight-through: backward Jacobian is identity
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                return;
            }
            case OpKind::Affine: {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += n.p0 * g[i];
                return;
            }
            case OpKind::Reciprocal: {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] -= g[i] / (x[i] * x[i]);
                return;
            }
            default: throw ContractError("unreachable op");
        }
    }

    const Graph* graph_;
    std::vector<Tensor> values_;
    std::vector<Tensor> grads_;
};

// One-shot helpers over a throwaway executor.
inline Tensor evaluate(const Graph& g, const Bindings& b) {
    GraphExec ex(g);
    return ex.forward(b);
}

inline GradientResult input_gradient(const Graph& g, const Bindings& b) {
    GraphExec ex(g);
    ex.forward(b);
    return ex.backward();
}

// Central finite differences of the graph output with respect to one leaf.
// Uses only forward evaluations, independent of the reverse-mode path.
inline Tensor finite_difference_gradient(const Graph& g, const Bindings& b, NodeId leaf,
                                         double h = 1e-4) {
    const Tensor* base = b.find(leaf);
    if (!base) throw ContractError("finite differences: leaf is not bound");
    Tensor grad = Tensor::zeros(base->shape());
    GraphExec ex(g);
    for (std::size_t i = 0; i < base->size(); ++i) {
        Tensor lo = *base;
        Tensor hi = *base;
        lo[i] -= h;
        hi[i] += h;
        Bindings bl = b;
        bl.set(leaf, std::move(lo));
        const double f_lo = ex.forward(bl).value();
        Bindings bh = b;
        bh.set(leaf, std::move(hi));
        const double f_hi = ex.forward(bh).value();
        grad[i] = (f_hi - f_lo) / (2.0 * h);
    }
    return grad;
}

// |a - b| / max(|a|, |b|, floor); the floor keeps near-zero true gradients
// from inflating the ratio.
inline double relative_error(double a, double b, double floor = 1e-6) {
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / denom;
}

inline double max_relative_error(const Tensor& a, const Tensor& b, double floor = 1e-6) {
    if (!a.same_shape(b)) throw ShapeError("relative error over mismatched shapes");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, relative_error(a[i], b[i], floor));
    return worst;
}

}  // namespace sfs
