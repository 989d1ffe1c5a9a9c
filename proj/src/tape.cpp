#include "sigvae/tape.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace sigvae::ad {

namespace {

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<EigenMat>;
using ConstMatMap = Eigen::Map<const EigenMat>;

ConstMatMap as_mat(const Tensor& t) { return ConstMatMap(t.data.data(), t.rows(), t.cols()); }
MatMap as_mat(Tensor& t) { return MatMap(t.data.data(), t.rows(), t.cols()); }

enum class Broadcast { none, row, col };

// b may equal a's shape, be a [1,D] row against [B,D], or a [B,1] column.
Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* prim) {
    if (a.same_shape(b)) return Broadcast::none;
    if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
    if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::col;
    throw ShapeError(std::string(prim) + ": incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
}

void check_same_tape(const Var& a, const Var& b, const char* prim) {
    if (a.tape != b.tape) throw std::invalid_argument(std::string(prim) + ": operands from different tapes");
}

}  // namespace

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

const Tensor& Var::value() const { return tape->value(*this); }

const char* primitive_name(Primitive p) {
    switch (p) {
        case Primitive::matmul: return "matmul";
        case Primitive::add: return "add";
        case Primitive::sub: return "sub";
        case Primitive::mul: return "mul";
        case Primitive::tanh: return "tanh";
        case Primitive::sigmoid: return "sigmoid";
        case Primitive::exp: return "exp";
        case Primitive::log: return "log";
        case Primitive::rsqrt: return "rsqrt";
        case Primitive::leaky_relu: return "leaky_relu";
        case Primitive::softmax: return "softmax";
        case Primitive::log_softmax: return "log_softmax";
        case Primitive::reduce_sum: return "reduce_sum";
        case Primitive::reduce_mean: return "reduce_mean";
        case Primitive::row_sum: return "row_sum";
        case Primitive::row_mean: return "row_mean";
        case Primitive::concat: return "concat";
        case Primitive::index_select: return "index_select";
        case Primitive::stop_gradient: return "stop_gradient";
    }
    return "?";
}

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buffer(int id) {
    Tensor& g = grads_[id];
    if (g.data.empty()) g = Tensor::zeros(nodes_[id].value.rows(), nodes_[id].value.cols());
    return g;
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.is_leaf = true;
    return wrap(push(std::move(n)));
}

Var Tape::matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.cols() != tb.rows())
        throw ShapeError("matmul: inner dims " + ta.shape_str() + " x " + tb.shape_str());
    Node n;
    n.value = Tensor::zeros(ta.rows(), tb.cols());
    as_mat(n.value) = as_mat(ta) * as_mat(tb);
    n.parent0 = a.id;
    n.parent1 = b.id;
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    n.backprop = [](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        const Tensor& g = t.grads_[self];
        const Tensor& va = t.nodes_[node.parent0].value;
        const Tensor& vb = t.nodes_[node.parent1].value;
        if (t.nodes_[node.parent0].requires_grad)
            as_mat(t.grad_buffer(node.parent0)) += as_mat(g) * as_mat(vb).transpose();
        if (t.nodes_[node.parent1].requires_grad)
            as_mat(t.grad_buffer(node.parent1)) += as_mat(va).transpose() * as_mat(g);
    };
    return wrap(push(std::move(n)));
}

Var Tape::add(Var a, Var b) {
    check_same_tape(a, b, "add");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    Broadcast bc = broadcast_kind(ta, tb, "add");
    Node n;
    n.value = ta;
    switch (bc) {
        case Broadcast::none: as_mat(n.value) += as_mat(tb); break;
        case Broadcast::row: as_mat(n.value).rowwise() += as_mat(tb).row(0); break;
        case Broadcast::col: as_mat(n.value).colwise() += as_mat(tb).col(0); break;
    }
    n.parent0 = a.id;
    n.parent1 = b.id;
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    n.backprop = [bc](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        const Tensor& g = t.grads_[self];
        if (t.nodes_[node.parent0].requires_grad) as_mat(t.grad_buffer(node.parent0)) += as_mat(g);
        if (t.nodes_[node.parent1].requires_grad) {
            MatMap gb = as_mat(t.grad_buffer(node.parent1));
            switch (bc) {
                case Broadcast::none: gb += as_mat(g); break;
                case Broadcast::row: gb.row(0) += as_mat(g).colwise().sum(); break;
                case Broadcast::col: gb.col(0) += as_mat(g).rowwise().sum(); break;
            }
        }
    };
    return wrap(push(std::move(n)));
}

Var Tape::sub(Var a, Var b) {
    check_same_tape(a, b, "sub");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    Broadcast bc = broadcast_kind(ta, tb, "sub");
    Node n;
    n.value = ta;
    switch (bc) {
        case Broadcast::none: as_mat(n.value) -= as_mat(tb); break;
        case Broadcast::row: as_mat(n.value).rowwise() -= as_mat(tb).row(0); break;
        case Broadcast::col: as_mat(n.value).colwise() -= as_mat(tb).col(0); break;
    }
    n.parent0 = a.id;
    n.parent1 = b.id;
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    n.backprop = [bc](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        const Tensor& g = t.grads_[self];
        if (t.nodes_[node.parent0].requires_grad) as_mat(t.grad_buffer(node.parent0)) += as_mat(g);
        if (t.nodes_[node.parent1].requires_grad) {
            MatMap gb = as_mat(t.grad_buffer(node.parent1));
            switch (bc) {
                case Broadcast::none: gb -= as_mat(g); break;
                case Broadcast::row: gb.row(0) -= as_mat(g).colwise().sum(); break;
                case Broadcast::col: gb.col(0) -= as_mat(g).rowwise().sum(); break;
            }
        }
    };
    return wrap(push(std::move(n)));
}

Var Tape::mul(Var a, Var b) {
    check_same_tape(a, b, "mul");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    Broadcast bc = broadcast_kind(ta, tb, "mul");
    Node n;
    n.value = ta;
    switch (bc) {
        case Broadcast::none: as_mat(n.value).array() *= as_mat(tb).array(); break;
        case Broadcast::row: as_mat(n.value).array().rowwise() *= as_mat(tb).array().row(0); break;
        case Broadcast::col: as_mat(n.value).array().colwise() *= as_mat(tb).array().col(0); break;
    }
    n.parent0 = a.id;
    n.parent1 = b.id;
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    n.backprop = [bc](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        const Tensor& g = t.grads_[self];
        const Tensor& va = t.nodes_[node.parent0].value;
        const Tensor& vb = t.nodes_[node.parent1].value;
        if (t.nodes_[node.parent0].requires_grad) {
            MatMap ga = as_mat(t.grad_buffer(node.parent0));
            switch (bc) {
                case Broadcast::none: ga.array() += as_mat(g).array() * as_mat(vb).array(); break;
                case Broadcast::row: ga.array() += as_mat(g).array().rowwise() * as_mat(vb).array().row(0); break;
                case Broadcast::col: ga.array() += as_mat(g).array().colwise() * as_mat(vb).array().col(0); break;
            }
        }
        if (t.nodes_[node.parent1].requires_grad) {
            MatMap gb = as_mat(t.grad_buffer(node.parent1));
            switch (bc) {
                case Broadcast::none: gb.array() += as_mat(g).array() * as_mat(va).array(); break;
                case Broadcast::row: gb.array().row(0) += (as_mat(g).array() * as_mat(va).array()).colwise().sum(); break;
                case Broadcast::col: gb.array().col(0) += (as_mat(g).array() * as_mat(va).array()).rowwise().sum(); break;
            }
        }
    };
    return wrap(push(std::move(n)));
}

Var Tape::affine(Var x, double scale, double shift) {
    Node n;
    n.value = value(x);
    for (double& v : n.value.data) v = scale * v + shift;
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [scale](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        as_mat(t.grad_buffer(node.parent0)) += scale * as_mat(t.grads_[self]);
    };
    return wrap(push(std::move(n)));
}

// Elementwise unary ops; BWD_EXPR sees the input as xi and the output as yi.
#define SIGVAE_UNARY(NAME, FWD_EXPR, BWD_EXPR)                                        \
    Var Tape::NAME(Var x) {                                                           \
        Node n;                                                                       \
        n.value = value(x);                                                           \
        for (double& v : n.value.data) v = (FWD_EXPR);                                \
        n.parent0 = x.id;                                                             \
        n.requires_grad = nodes_[x.id].requires_grad;                                 \
        n.backprop = [](Tape& t, int self) {                                          \
            const Node& node = t.nodes_[self];                                        \
            if (!t.nodes_[node.parent0].requires_grad) return;                        \
            const Tensor& g = t.grads_[self];                                         \
            const Tensor& y = node.value;                                             \
            const Tensor& xin = t.nodes_[node.parent0].value;                         \
            Tensor& gx = t.grad_buffer(node.parent0);                                 \
            for (std::size_t i = 0; i < g.data.size(); ++i) {                         \
                const double yi = y.data[i];                                          \
                const double xi = xin.data[i];                                        \
                (void)yi;                                                             \
                (void)xi;                                                             \
                gx.data[i] += g.data[i] * (BWD_EXPR);                                 \
            }                                                                         \
        };                                                                            \
        return wrap(push(std::move(n)));                                              \
    }

SIGVAE_UNARY(tanh, std::tanh(v), 1.0 - yi * yi)
SIGVAE_UNARY(sigmoid, 1.0 / (1.0 + std::exp(-v)), yi * (1.0 - yi))
SIGVAE_UNARY(exp, std::exp(v), yi)
SIGVAE_UNARY(log, std::log(v), 1.0 / xi)
SIGVAE_UNARY(rsqrt, 1.0 / std::sqrt(v), -0.5 * yi * yi * yi)

#undef SIGVAE_UNARY

Var Tape::leaky_relu(Var x, double negative_slope) {
    Node n;
    n.value = value(x);
    for (double& v : n.value.data) v = v > 0.0 ? v : negative_slope * v;
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [negative_slope](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        const Tensor& xin = t.nodes_[node.parent0].value;
        Tensor& gx = t.grad_buffer(node.parent0);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gx.data[i] += g.data[i] * (xin.data[i] > 0.0 ? 1.0 : negative_slope);
    };
    return wrap(push(std::move(n)));
}

Var Tape::softmax(Var x) {
    const Tensor& tx = value(x);
    Node n;
    n.value = tx;
    for (std::size_t r = 0; r < tx.rows(); ++r) {
        double mx = -1e300;
        for (std::size_t c = 0; c < tx.cols(); ++c) mx = std::max(mx, tx.at(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < tx.cols(); ++c) {
            double e = std::exp(tx.at(r, c) - mx);
            n.value.at(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < tx.cols(); ++c) n.value.at(r, c) /= sum;
    }
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        const Tensor& y = node.value;
        Tensor& gx = t.grad_buffer(node.parent0);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += g.at(r, c) * y.at(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c)
                gx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
        }
    };
    return wrap(push(std::move(n)));
}

Var Tape::log_softmax(Var x) {
    const Tensor& tx = value(x);
    Node n;
    n.value = tx;
    for (std::size_t r = 0; r < tx.rows(); ++r) {
        double mx = -1e300;
        for (std::size_t c = 0; c < tx.cols(); ++c) mx = std::max(mx, tx.at(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < tx.cols(); ++c) sum += std::exp(tx.at(r, c) - mx);
        const double lse = mx + std::log(sum);
        for (std::size_t c = 0; c < tx.cols(); ++c) n.value.at(r, c) = tx.at(r, c) - lse;
    }
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        const Tensor& y = node.value;  // log-probs
        Tensor& gx = t.grad_buffer(node.parent0);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double gsum = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) gsum += g.at(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c)
                gx.at(r, c) += g.at(r, c) - std::exp(y.at(r, c)) * gsum;
        }
    };
    return wrap(push(std::move(n)));
}

Var Tape::reduce_sum(Var x) {
    const Tensor& tx = value(x);
    Node n;
    n.value = Tensor::scalar(as_mat(tx).sum());
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const double g = t.grads_[self].data[0];
        for (double& v : t.grad_buffer(node.parent0).data) v += g;
    };
    return wrap(push(std::move(n)));
}

Var Tape::reduce_mean(Var x) {
    const Tensor& tx = value(x);
    const double inv = 1.0 / static_cast<double>(tx.numel());
    Node n;
    n.value = Tensor::scalar(as_mat(tx).sum() * inv);
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [inv](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const double g = t.grads_[self].data[0] * inv;
        for (double& v : t.grad_buffer(node.parent0).data) v += g;
    };
    return wrap(push(std::move(n)));
}

Var Tape::row_sum(Var x) {
    const Tensor& tx = value(x);
    Node n;
    n.value = Tensor::zeros(tx.rows(), 1);
    as_mat(n.value).col(0) = as_mat(tx).rowwise().sum();
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        as_mat(t.grad_buffer(node.parent0)).colwise() += as_mat(g).col(0);
    };
    return wrap(push(std::move(n)));
}

Var Tape::row_mean(Var x) {
    const Tensor& tx = value(x);
    const double inv = 1.0 / static_cast<double>(tx.cols());
    Node n;
    n.value = Tensor::zeros(tx.rows(), 1);
    as_mat(n.value).col(0) = as_mat(tx).rowwise().sum() * inv;
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [inv](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        MatMap gx = as_mat(t.grad_buffer(node.parent0));
        gx.array().colwise() += inv * as_mat(g).array().col(0);
    };
    return wrap(push(std::move(n)));
}

Var Tape::concat_cols(Var a, Var b) {
    check_same_tape(a, b, "concat");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rows() != tb.rows())
        throw ShapeError("concat: row mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Node n;
    n.value = Tensor::zeros(ta.rows(), ta.cols() + tb.cols());
    as_mat(n.value).leftCols(ta.cols()) = as_mat(ta);
    as_mat(n.value).rightCols(tb.cols()) = as_mat(tb);
    n.parent0 = a.id;
    n.parent1 = b.id;
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    const std::size_t ca = ta.cols();
    n.backprop = [ca](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        const Tensor& g = t.grads_[self];
        if (t.nodes_[node.parent0].requires_grad)
            as_mat(t.grad_buffer(node.parent0)) += as_mat(g).leftCols(ca);
        if (t.nodes_[node.parent1].requires_grad)
            as_mat(t.grad_buffer(node.parent1)) += as_mat(g).rightCols(g.cols() - ca);
    };
    return wrap(push(std::move(n)));
}

Var Tape::take_rows(Var table, const std::vector<int>& row_ids) {
    const Tensor& tt = value(table);
    for (int id : row_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= tt.rows())
            throw ShapeError("index_select: row id " + std::to_string(id) + " out of " + tt.shape_str());
    Node n;
    n.value = Tensor::zeros(row_ids.size(), tt.cols());
    for (std::size_t i = 0; i < row_ids.size(); ++i)
        as_mat(n.value).row(i) = as_mat(tt).row(row_ids[i]);
    n.parent0 = table.id;
    n.requires_grad = nodes_[table.id].requires_grad;
    n.backprop = [row_ids](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        MatMap gt = as_mat(t.grad_buffer(node.parent0));
        for (std::size_t i = 0; i < row_ids.size(); ++i) gt.row(row_ids[i]) += as_mat(g).row(i);
    };
    return wrap(push(std::move(n)));
}

Var Tape::select_cols(Var x, const std::vector<int>& col_ids) {
    const Tensor& tx = value(x);
    if (col_ids.size() != tx.rows())
        throw ShapeError("index_select: need one col id per row, got " + std::to_string(col_ids.size()) +
                         " for " + tx.shape_str());
    for (int id : col_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= tx.cols())
            throw ShapeError("index_select: col id " + std::to_string(id) + " out of " + tx.shape_str());
    Node n;
    n.value = Tensor::zeros(tx.rows(), 1);
    for (std::size_t i = 0; i < tx.rows(); ++i) n.value.at(i, 0) = tx.at(i, col_ids[i]);
    n.parent0 = x.id;
    n.requires_grad = nodes_[x.id].requires_grad;
    n.backprop = [col_ids](Tape& t, int self) {
        const Node& node = t.nodes_[self];
        if (!t.nodes_[node.parent0].requires_grad) return;
        const Tensor& g = t.grads_[self];
        Tensor& gx = t.grad_buffer(node.parent0);
        for (std::size_t i = 0; i < col_ids.size(); ++i) gx.at(i, col_ids[i]) += g.at(i, 0);
    };
    return wrap(push(std::move(n)));
}

Var Tape::stop_gradient(Var x) {
    Node n;
    n.value = value(x);  // forward value bit-identical
    n.parent0 = x.id;
    n.requires_grad = false;
    n.is_leaf = false;
    return wrap(push(std::move(n)));
}

Var Tape::forward_primitive(Primitive op, std::span<const Var> inputs) {
    auto need = [&](std::size_t k) {
        if (inputs.size() != k)
            throw std::invalid_argument(std::string(primitive_name(op)) + ": expected " + std::to_string(k) +
                                        " inputs, got " + std::to_string(inputs.size()));
    };
    switch (op) {
        case Primitive::matmul: need(2); return matmul(inputs[0], inputs[1]);
        case Primitive::add: need(2); return add(inputs[0], inputs[1]);
        case Primitive::sub: need(2); return sub(inputs[0], inputs[1]);
        case Primitive::mul: need(2); return mul(inputs[0], inputs[1]);
        case Primitive::tanh: need(1); return tanh(inputs[0]);
        case Primitive::sigmoid: need(1); return sigmoid(inputs[0]);
        case Primitive::exp: need(1); return exp(inputs[0]);
        case Primitive::log: need(1); return log(inputs[0]);
        case Primitive::rsqrt: need(1); return rsqrt(inputs[0]);
        case Primitive::leaky_relu: need(1); return leaky_relu(inputs[0], 0.01);
        case Primitive::softmax: need(1); return softmax(inputs[0]);
        case Primitive::log_softmax: need(1); return log_softmax(inputs[0]);
        case Primitive::reduce_sum: need(1); return reduce_sum(inputs[0]);
        case Primitive::reduce_mean: need(1); return reduce_mean(inputs[0]);
        case Primitive::row_sum: need(1); return row_sum(inputs[0]);
        case Primitive::row_mean: need(1); return row_mean(inputs[0]);
        case Primitive::concat: need(2); return concat_cols(inputs[0], inputs[1]);
        case Primitive::stop_gradient: need(1); return stop_gradient(inputs[0]);
        case Primitive::index_select:
            throw std::invalid_argument("index_select requires ids; use take_rows/select_cols");
    }
    throw std::invalid_argument("unknown primitive");
}

std::unordered_map<int, Tensor> Tape::backward(Var root) {
    if (root.tape != this) throw std::invalid_argument("backward: root from another tape");
    const Tensor& rv = value(root);
    if (!rv.is_scalar())
        throw ShapeError("backward: root must be scalar, got " + rv.shape_str());
    grads_.assign(nodes_.size(), Tensor{});
    grad_buffer(root.id).data[0] = 1.0;
    for (int id = root.id; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (!n.requires_grad || !has_grad(id) || !n.backprop) continue;
        n.backprop(*this, id);
    }
    std::unordered_map<int, Tensor> out;
    for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
        if (!nodes_[id].is_leaf || !nodes_[id].requires_grad) continue;
        out.emplace(id, grad(wrap(id)));
    }
    return out;
}

Tensor Tape::grad(Var v) const {
    if (v.tape != this) throw std::invalid_argument("grad: var from another tape");
    if (grads_.empty()) throw std::logic_error("grad: backward() has not run");
    if (!grads_[v.id].data.empty()) return grads_[v.id];
    return Tensor::zeros(nodes_[v.id].value.rows(), nodes_[v.id].value.cols());
}

double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double h) {
    if (h <= 0.0) throw std::invalid_argument("finite_difference_check: h must be positive");
    Tensor grad_ad;
    {
        Tape tape;
        Var vx = tape.leaf(x);
        Var y = f(tape, vx);
        if (!y.value().is_scalar()) throw ShapeError("finite_difference_check: f must return a scalar");
        if (!y.value().all_finite()) throw std::runtime_error("finite_difference_check: f(x) is not finite");
        tape.backward(y);
        grad_ad = tape.grad(vx);
    }
    auto eval = [&](const Tensor& p) {
        Tape tape;
        Var vx = tape.leaf(p, false);
        double v = f(tape, vx).value().scalar_value();
        if (!std::isfinite(v)) throw std::runtime_error("finite_difference_check: f evaluated non-finite");
        return v;
    };
    double worst = 0.0;
    Tensor probe = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double orig = probe.data[i];
        probe.data[i] = orig + h;
        const double fp = eval(probe);
        probe.data[i] = orig - h;
        const double fm = eval(probe);
        probe.data[i] = orig;
        const double fd = (fp - fm) / (2.0 * h);
        const double ad = grad_ad.data[i];
        const double err = std::abs(ad - fd) / std::max({1.0, std::abs(ad), std::abs(fd)});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace sigvae::ad
