// Define-by-run reverse-mode automatic differentiation over Tensor.
//
// A Tape records primitive applications; backward() walks the record in
// reverse, accumulating gradients additively across fan-out in tape order,
// so a fixed graph yields bit-identical gradients run to run.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigvae/tensor.hpp"

namespace sigvae::ad {

class Tape;

// Lightweight handle to a tape node.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& value() const;
};

enum class Primitive {
    matmul,
    add,
    sub,
    mul,
    tanh,
    sigmoid,
    exp,
    log,
    rsqrt,
    leaky_relu,
    softmax,
    log_softmax,
    reduce_sum,
    reduce_mean,
    row_sum,
    row_mean,
    concat,
    index_select,
    stop_gradient,
};

const char* primitive_name(Primitive p);

class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }
    Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

    // Elementwise and linear-algebra primitives. add/sub/mul accept equal
    // shapes, a [1,D] row broadcast against [B,D], or a [B,1] column
    // broadcast against [B,D].
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var affine(Var x, double scale, double shift);  // scale * x + shift
    Var tanh(Var x);
    Var sigmoid(Var x);
    Var exp(Var x);
    Var log(Var x);
    Var rsqrt(Var x);
    Var leaky_relu(Var x, double negative_slope);
    Var softmax(Var x);      // row-wise
    Var log_softmax(Var x);  // row-wise
    Var reduce_sum(Var x);   // -> [1,1]
    Var reduce_mean(Var x);  // -> [1,1]
    Var row_sum(Var x);      // [B,D] -> [B,1]
    Var row_mean(Var x);     // [B,D] -> [B,1]
    Var concat_cols(Var a, Var b);
    // Row gather: rows of a [V,D] table selected per id; used for embeddings.
    Var take_rows(Var table, const std::vector<int>& row_ids);
    // Per-row single-column gather: x[i, col_ids[i]] -> [B,1].
    Var select_cols(Var x, const std::vector<int>& col_ids);
    Var stop_gradient(Var x);

    // Uniform dispatch over the primitive set (unary/binary only); the typed
    // builders above are the primary interface.
    Var forward_primitive(Primitive op, std::span<const Var> inputs);

    // Reverse pass from a scalar root. Returns the gradient for every
    // grad-requiring leaf (zeros when unreachable), keyed by node id.
    std::unordered_map<int, Tensor> backward(Var root);

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    // Valid after backward(); zero tensor for nodes the pass never reached.
    Tensor grad(Var v) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        int parent0 = -1;
        int parent1 = -1;
        bool requires_grad = false;
        bool is_leaf = false;
        // Accumulates into the parents' grad buffers given this node's grad.
        std::function<void(Tape&, int self)> backprop;
    };

    friend struct Var;

    int push(Node n);
    Var wrap(int id) { return Var{this, id}; }
    Tensor& grad_buffer(int id);
    bool has_grad(int id) const { return !grads_[id].data.empty(); }

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

// Max over coordinates of |ad - fd| / max(1, |ad|, |fd|), with fd the central
// difference of f at step h. f builds a scalar from a single leaf.
double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double h);

}  // namespace sigvae::ad
