#pragma once

#include <functional>
#include <vector>

#include "core/tensor.hpp"

namespace umic {

struct Var {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over a per-step tape. Ops are free functions that
// record a backward closure; Tape::backward walks nodes in reverse order.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    bool grad_enabled() const { return grad_enabled_; }

    Var leaf(Tensor value, bool requires_grad);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    using BackFn = std::function<void(Tape&, int32_t)>;
    Var record(Tensor value, std::vector<Var> parents, BackFn back);

    Tensor& val(Var v) { return nodes_[size_t(v.id)].value; }
    const Tensor& val(Var v) const { return nodes_[size_t(v.id)].value; }
    bool needs_grad(Var v) const { return nodes_[size_t(v.id)].needs_grad; }

    // Gradient of a node after backward(); zero tensor when untouched.
    Tensor& grad(Var v);

    void accum(Var v, const Tensor& g);
    void accum_raw(Var v, const double* g, int64_t n);

    void backward(Var loss);
    void clear();
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool grad_alloc = false;
        bool needs_grad = false;
        BackFn back;
        std::vector<Var> parents;
    };
    std::vector<Node> nodes_;
    bool grad_enabled_;
};

// ---- elementwise / broadcast ----
Var add(Tape& t, Var a, Var b);        // broadcasting, equal rank
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var neg(Tape& t, Var a);
Var scalar_mul(Tape& t, Var a, double s);
Var scalar_add(Tape& t, Var a, double s);
Var silu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var relu(Tape& t, Var a);
Var leaky_relu(Tape& t, Var a, double slope);
Var exp_op(Tape& t, Var a);
Var log_op(Tape& t, Var a);            // caller guarantees positive input
Var abs_op(Tape& t, Var a);
Var sqrt_op(Tape& t, Var a);
Var square(Tape& t, Var a);

// ---- shape ----
Var reshape(Tape& t, Var a, std::vector<int64_t> shape);
Var permute(Tape& t, Var a, std::vector<int> perm);
Var concat(Tape& t, const std::vector<Var>& xs, int axis);
Var slice(Tape& t, Var a, int axis, int64_t start, int64_t len);

// ---- reductions ----
Var sum_all(Tape& t, Var a);
Var mean_all(Tape& t, Var a);
Var mean_axis(Tape& t, Var a, int axis);  // removes the axis

// ---- linear algebra ----
// a: [B,M,K] or [M,K]; b: [B,K,N] or [K,N] (rank-2 b is shared across batch)
Var matmul(Tape& t, Var a, Var b);
// x: [B,N,Din], w: [Dout,Din], bias: [Dout] (optional) -> [B,N,Dout]
Var linear(Tape& t, Var x, Var w, Var bias);
Var softmax_lastdim(Tape& t, Var a);

// ---- conv / spatial ----
Var conv2d(Tape& t, Var x, Var w, Var bias, int stride, int pad);
Var avg_pool2d(Tape& t, Var x, int kernel, int stride);
Var upsample_nearest2(Tape& t, Var x);
Var mean_hw(Tape& t, Var x);           // [B,C,H,W] -> [B,C]

// ---- misc ----
Var embedding(Tape& t, Var table, const std::vector<int64_t>& ids);  // [V,D] -> [n,D]
Var mse_loss(Tape& t, Var a, Var b);
Var l1_loss(Tape& t, Var a, Var b);

}  // namespace umic
