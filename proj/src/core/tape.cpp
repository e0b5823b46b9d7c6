#include "core/tape.hpp"

#include <algorithm>
#include <cmath>

#include "core/gemm.hpp"

namespace umic {

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = requires_grad && grad_enabled_;
    nodes_.push_back(std::move(n));
    return Var{int32_t(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::vector<Var> parents, BackFn back) {
    Node n;
    n.value = std::move(value);
    if (grad_enabled_) {
        for (Var p : parents)
            if (p.valid() && nodes_[size_t(p.id)].needs_grad) {
                n.needs_grad = true;
                break;
            }
    }
    if (n.needs_grad) {
        n.back = std::move(back);
        n.parents = std::move(parents);
    }
    nodes_.push_back(std::move(n));
    return Var{int32_t(nodes_.size() - 1)};
}

Tensor& Tape::grad(Var v) {
    Node& n = nodes_[size_t(v.id)];
    if (!n.grad_alloc) {
        n.grad = Tensor(n.value.shape);
        n.grad_alloc = true;
    }
    return n.grad;
}

void Tape::accum(Var v, const Tensor& g) {
    Node& n = nodes_[size_t(v.id)];
    if (!n.needs_grad) return;
    require(g.shape == n.value.shape, ErrKind::internal, "grad shape mismatch");
    grad(v).add_(g);
}

void Tape::accum_raw(Var v, const double* g, int64_t n_elems) {
    Node& n = nodes_[size_t(v.id)];
    if (!n.needs_grad) return;
    require(n_elems == n.value.numel(), ErrKind::internal, "grad size mismatch");
    Tensor& gt = grad(v);
    for (int64_t i = 0; i < n_elems; ++i) gt.data[size_t(i)] += g[i];
}

void Tape::backward(Var loss) {
    require(grad_enabled_, ErrKind::internal, "backward on no-grad tape");
    Node& ln = nodes_[size_t(loss.id)];
    require(ln.value.numel() == 1, ErrKind::internal, "backward needs scalar loss");
    require(ln.needs_grad, ErrKind::internal, "loss does not require grad");
    grad(loss).data[0] = 1.0;
    for (int32_t i = loss.id; i >= 0; --i) {
        Node& n = nodes_[size_t(i)];
        if (n.needs_grad && n.back && n.grad_alloc) n.back(*this, i);
    }
}

void Tape::clear() { nodes_.clear(); }

// ---------------------------------------------------------------- broadcast

static std::vector<int64_t> broadcast_shape(const std::vector<int64_t>& a,
                                            const std::vector<int64_t>& b) {
    require(a.size() == b.size(), ErrKind::internal,
            "broadcast requires equal rank");
    std::vector<int64_t> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        require(a[i] == b[i] || a[i] == 1 || b[i] == 1, ErrKind::internal,
                "incompatible broadcast dims");
        out[i] = std::max(a[i], b[i]);
    }
    return out;
}

// Sums g (shape out_shape) down to target_shape (dims of 1 were broadcast).
static Tensor reduce_to_shape(const Tensor& g, const std::vector<int64_t>& target) {
    if (g.shape == target) return g;
    Tensor out(target);
    auto gst = strides_of(g.shape);
    auto tst = strides_of(target);
    int r = int(g.shape.size());
    std::vector<int64_t> idx(size_t(r), 0);
    for (int64_t lin = 0; lin < g.numel(); ++lin) {
        int64_t toff = 0;
        for (int d = 0; d < r; ++d)
            toff += (target[size_t(d)] == 1 ? 0 : idx[size_t(d)]) * tst[size_t(d)];
        out.data[size_t(toff)] += g.data[size_t(lin)];
        for (int d = r - 1; d >= 0; --d) {
            if (++idx[size_t(d)] < g.shape[size_t(d)]) break;
            idx[size_t(d)] = 0;
        }
    }
    return out;
}

template <typename FwdFn>
static Var binary_broadcast(Tape& t, Var a, Var b, FwdFn f, double da, double db,
                            bool grad_uses_inputs) {
    // f(x, y) elementwise; gradient via constant factors (da, db) for add/sub
    // or via inputs for mul (grad_uses_inputs).
    const Tensor& av = t.val(a);
    const Tensor& bv = t.val(b);
    std::vector<int64_t> os = broadcast_shape(av.shape, bv.shape);
    Tensor out(os);
    bool same = av.shape == bv.shape;
    if (same) {
        for (int64_t i = 0; i < out.numel(); ++i)
            out.data[size_t(i)] = f(av.data[size_t(i)], bv.data[size_t(i)]);
    } else {
        auto ast = strides_of(av.shape), bst = strides_of(bv.shape);
        int r = int(os.size());
        std::vector<int64_t> idx(size_t(r), 0);
        for (int64_t lin = 0; lin < out.numel(); ++lin) {
            int64_t ao = 0, bo = 0;
            for (int d = 0; d < r; ++d) {
                ao += (av.shape[size_t(d)] == 1 ? 0 : idx[size_t(d)]) * ast[size_t(d)];
                bo += (bv.shape[size_t(d)] == 1 ? 0 : idx[size_t(d)]) * bst[size_t(d)];
            }
            out.data[size_t(lin)] = f(av.data[size_t(ao)], bv.data[size_t(bo)]);
            for (int d = r - 1; d >= 0; --d) {
                if (++idx[size_t(d)] < os[size_t(d)]) break;
                idx[size_t(d)] = 0;
            }
        }
    }
    return t.record(std::move(out), {a, b},
                    [a, b, da, db, grad_uses_inputs](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& av = tp.val(a);
        const Tensor& bv = tp.val(b);
        auto contrib = [&](Var target, const Tensor& other, double factor) {
            if (!tp.needs_grad(target)) return;
            const Tensor& tv = tp.val(target);
            Tensor full(g.shape);
            if (grad_uses_inputs) {
                // mul: dA = g * B broadcast to out shape
                auto ost = strides_of(other.shape);
                int r = int(g.shape.size());
                std::vector<int64_t> idx(size_t(r), 0);
                for (int64_t lin = 0; lin < g.numel(); ++lin) {
                    int64_t oo = 0;
                    for (int d = 0; d < r; ++d)
                        oo += (other.shape[size_t(d)] == 1 ? 0 : idx[size_t(d)]) *
                              ost[size_t(d)];
                    full.data[size_t(lin)] =
                        g.data[size_t(lin)] * other.data[size_t(oo)];
                    for (int d = r - 1; d >= 0; --d) {
                        if (++idx[size_t(d)] < g.shape[size_t(d)]) break;
                        idx[size_t(d)] = 0;
                    }
                }
            } else {
                for (int64_t i = 0; i < g.numel(); ++i)
                    full.data[size_t(i)] = g.data[size_t(i)] * factor;
            }
            tp.accum(target, reduce_to_shape(full, tv.shape));
        };
        contrib(a, bv, da);
        contrib(b, av, db);
    });
}

Var add(Tape& t, Var a, Var b) {
    return binary_broadcast(t, a, b, [](double x, double y) { return x + y; }, 1.0,
                            1.0, false);
}

Var sub(Tape& t, Var a, Var b) {
    return binary_broadcast(t, a, b, [](double x, double y) { return x - y; }, 1.0,
                            -1.0, false);
}

Var mul(Tape& t, Var a, Var b) {
    return binary_broadcast(t, a, b, [](double x, double y) { return x * y; }, 0.0,
                            0.0, true);
}

// ---------------------------------------------------------------- unary

template <typename F, typename DF>
static Var unary_op(Tape& t, Var a, F f, DF dfdx_from_xy) {
    const Tensor& av = t.val(a);
    Tensor out(av.shape);
    for (int64_t i = 0; i < av.numel(); ++i) out.data[size_t(i)] = f(av.data[size_t(i)]);
    return t.record(std::move(out), {a}, [a, dfdx_from_xy](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& x = tp.val(a);
        const Tensor& y = tp.val(Var{self});
        Tensor gx(x.shape);
        for (int64_t i = 0; i < x.numel(); ++i)
            gx.data[size_t(i)] =
                g.data[size_t(i)] * dfdx_from_xy(x.data[size_t(i)], y.data[size_t(i)]);
        tp.accum(a, gx);
    });
}

Var neg(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return -x; },
                    [](double, double) { return -1.0; });
}

Var scalar_mul(Tape& t, Var a, double s) {
    return unary_op(t, a, [s](double x) { return x * s; },
                    [s](double, double) { return s; });
}

Var scalar_add(Tape& t, Var a, double s) {
    return unary_op(t, a, [s](double x) { return x + s; },
                    [](double, double) { return 1.0; });
}

static inline double sigmoid_fn(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Var silu(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return x * sigmoid_fn(x); },
                    [](double x, double) {
                        double s = sigmoid_fn(x);
                        return s * (1.0 + x * (1.0 - s));
                    });
}

Var sigmoid(Tape& t, Var a) {
    return unary_op(t, a, sigmoid_fn,
                    [](double, double y) { return y * (1.0 - y); });
}

Var relu(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return x > 0.0 ? x : 0.0; },
                    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Tape& t, Var a, double slope) {
    return unary_op(t, a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                    [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var exp_op(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return std::exp(x); },
                    [](double, double y) { return y; });
}

Var log_op(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return std::log(x); },
                    [](double x, double) { return 1.0 / x; });
}

Var abs_op(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return std::fabs(x); },
                    [](double x, double) { return x >= 0.0 ? 1.0 : -1.0; });
}

Var sqrt_op(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return std::sqrt(x); },
                    [](double, double y) { return 0.5 / y; });
}

Var square(Tape& t, Var a) {
    return unary_op(t, a, [](double x) { return x * x; },
                    [](double x, double) { return 2.0 * x; });
}

// ---------------------------------------------------------------- shape

Var reshape(Tape& t, Var a, std::vector<int64_t> shape) {
    Tensor out = t.val(a).reshaped(std::move(shape));
    return t.record(std::move(out), {a}, [a](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        tp.accum_raw(a, g.ptr(), g.numel());
    });
}

Var permute(Tape& t, Var a, std::vector<int> perm) {
    const Tensor& av = t.val(a);
    int r = av.rank();
    require(int(perm.size()) == r, ErrKind::internal, "permute rank mismatch");
    std::vector<int64_t> os(size_t(r), 0);
    for (int i = 0; i < r; ++i) os[size_t(i)] = av.shape[size_t(perm[size_t(i)])];
    auto ist = strides_of(av.shape);
    Tensor out(os);
    std::vector<int64_t> idx(size_t(r), 0);
    for (int64_t lin = 0; lin < out.numel(); ++lin) {
        int64_t io = 0;
        for (int d = 0; d < r; ++d) io += idx[size_t(d)] * ist[size_t(perm[size_t(d)])];
        out.data[size_t(lin)] = av.data[size_t(io)];
        for (int d = r - 1; d >= 0; --d) {
            if (++idx[size_t(d)] < os[size_t(d)]) break;
            idx[size_t(d)] = 0;
        }
    }
    return t.record(std::move(out), {a}, [a, perm](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& av = tp.val(a);
        int r = av.rank();
        Tensor gx(av.shape);
        auto xst = strides_of(av.shape);
        std::vector<int64_t> idx(size_t(r), 0);
        for (int64_t lin = 0; lin < g.numel(); ++lin) {
            int64_t xo = 0;
            for (int d = 0; d < r; ++d)
                xo += idx[size_t(d)] * xst[size_t(perm[size_t(d)])];
            gx.data[size_t(xo)] += g.data[size_t(lin)];
            for (int d = r - 1; d >= 0; --d) {
                if (++idx[size_t(d)] < g.shape[size_t(d)]) break;
                idx[size_t(d)] = 0;
            }
        }
        tp.accum(a, gx);
    });
}

Var concat(Tape& t, const std::vector<Var>& xs, int axis) {
    require(!xs.empty(), ErrKind::internal, "concat of nothing");
    const Tensor& first = t.val(xs[0]);
    int r = first.rank();
    std::vector<int64_t> os = first.shape;
    int64_t total = 0;
    for (Var x : xs) {
        const Tensor& v = t.val(x);
        require(v.rank() == r, ErrKind::internal, "concat rank mismatch");
        for (int d = 0; d < r; ++d)
            if (d != axis)
                require(v.shape[size_t(d)] == first.shape[size_t(d)], ErrKind::internal,
                        "concat dim mismatch");
        total += v.shape[size_t(axis)];
    }
    os[size_t(axis)] = total;
    Tensor out(os);
    // copy block-wise: outer = prod(dims<axis), inner = prod(dims>axis)
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= os[size_t(d)];
    for (int d = axis + 1; d < r; ++d) inner *= os[size_t(d)];
    int64_t off = 0;
    for (Var x : xs) {
        const Tensor& v = t.val(x);
        int64_t ax = v.shape[size_t(axis)];
        for (int64_t o = 0; o < outer; ++o)
            std::copy(v.data.begin() + o * ax * inner,
                      v.data.begin() + (o + 1) * ax * inner,
                      out.data.begin() + (o * total + off) * inner);
        off += ax;
    }
    std::vector<Var> parents = xs;
    return t.record(std::move(out), parents,
                    [xs, axis, outer, inner, total](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        int64_t off = 0;
        for (Var x : xs) {
            const Tensor& v = tp.val(x);
            int64_t ax = v.shape[size_t(axis)];
            if (tp.needs_grad(x)) {
                Tensor gx(v.shape);
                for (int64_t o = 0; o < outer; ++o)
                    std::copy(g.data.begin() + (o * total + off) * inner,
                              g.data.begin() + (o * total + off + ax) * inner,
                              gx.data.begin() + o * ax * inner);
                tp.accum(x, gx);
            }
            off += ax;
        }
    });
}

Var slice(Tape& t, Var a, int axis, int64_t start, int64_t len) {
    const Tensor& av = t.val(a);
    int r = av.rank();
    require(axis >= 0 && axis < r, ErrKind::internal, "slice axis out of range");
    require(start >= 0 && len >= 1 && start + len <= av.shape[size_t(axis)],
            ErrKind::internal, "slice out of range");
    std::vector<int64_t> os = av.shape;
    os[size_t(axis)] = len;
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= av.shape[size_t(d)];
    for (int d = axis + 1; d < r; ++d) inner *= av.shape[size_t(d)];
    int64_t ax = av.shape[size_t(axis)];
    Tensor out(os);
    for (int64_t o = 0; o < outer; ++o)
        std::copy(av.data.begin() + (o * ax + start) * inner,
                  av.data.begin() + (o * ax + start + len) * inner,
                  out.data.begin() + o * len * inner);
    return t.record(std::move(out), {a},
                    [a, start, len, outer, inner, ax](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& av = tp.val(a);
        Tensor gx(av.shape);
        for (int64_t o = 0; o < outer; ++o)
            for (int64_t i = 0; i < len * inner; ++i)
                gx.data[size_t((o * ax + start) * inner + i)] =
                    g.data[size_t(o * len * inner + i)];
        tp.accum(a, gx);
    });
}

// ---------------------------------------------------------------- reductions

Var sum_all(Tape& t, Var a) {
    const Tensor& av = t.val(a);
    double s = 0.0;
    for (double v : av.data) s += v;
    return t.record(Tensor::scalar(s), {a}, [a](Tape& tp, int32_t self) {
        double g = tp.grad(Var{self}).data[0];
        const Tensor& av = tp.val(a);
        Tensor gx(av.shape, g);
        tp.accum(a, gx);
    });
}

Var mean_all(Tape& t, Var a) {
    const Tensor& av = t.val(a);
    int64_t n = av.numel();
    double s = 0.0;
    for (double v : av.data) s += v;
    return t.record(Tensor::scalar(s / double(n)), {a}, [a, n](Tape& tp, int32_t self) {
        double g = tp.grad(Var{self}).data[0] / double(n);
        const Tensor& av = tp.val(a);
        Tensor gx(av.shape, g);
        tp.accum(a, gx);
    });
}

Var mean_axis(Tape& t, Var a, int axis) {
    const Tensor& av = t.val(a);
    int r = av.rank();
    require(axis >= 0 && axis < r, ErrKind::internal, "mean_axis out of range");
    std::vector<int64_t> os;
    for (int d = 0; d < r; ++d)
        if (d != axis) os.push_back(av.shape[size_t(d)]);
    if (os.empty()) os.push_back(1);
    int64_t outer = 1, inner = 1, ax = av.shape[size_t(axis)];
    for (int d = 0; d < axis; ++d) outer *= av.shape[size_t(d)];
    for (int d = axis + 1; d < r; ++d) inner *= av.shape[size_t(d)];
    Tensor out(os);
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t i = 0; i < inner; ++i) {
            double s = 0.0;
            for (int64_t k = 0; k < ax; ++k)
                s += av.data[size_t((o * ax + k) * inner + i)];
            out.data[size_t(o * inner + i)] = s / double(ax);
        }
    return t.record(std::move(out), {a},
                    [a, outer, inner, ax](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& av = tp.val(a);
        Tensor gx(av.shape);
        for (int64_t o = 0; o < outer; ++o)
            for (int64_t i = 0; i < inner; ++i) {
                double gv = g.data[size_t(o * inner + i)] / double(ax);
                for (int64_t k = 0; k < ax; ++k)
                    gx.data[size_t((o * ax + k) * inner + i)] = gv;
            }
        tp.accum(a, gx);
    });
}

// ---------------------------------------------------------------- matmul

Var matmul(Tape& t, Var a, Var b) {
    const Tensor& av = t.val(a);
    const Tensor& bv = t.val(b);
    require(av.rank() == 2 || av.rank() == 3, ErrKind::internal, "matmul a rank");
    require(bv.rank() == 2 || bv.rank() == 3, ErrKind::internal, "matmul b rank");
    bool a3 = av.rank() == 3, b3 = bv.rank() == 3;
    int64_t batch = a3 ? av.shape[0] : (b3 ? bv.shape[0] : 1);
    if (a3 && b3)
        require(av.shape[0] == bv.shape[0], ErrKind::internal, "matmul batch mismatch");
    int64_t m = av.shape[size_t(a3 ? 1 : 0)];
    int64_t k = av.shape[size_t(a3 ? 2 : 1)];
    int64_t kb = bv.shape[size_t(b3 ? 1 : 0)];
    int64_t n = bv.shape[size_t(b3 ? 2 : 1)];
    require(k == kb, ErrKind::internal, "matmul inner dim mismatch");

    std::vector<int64_t> os;
    if (a3 || b3) os = {batch, m, n};
    else os = {m, n};
    Tensor out(os);
    for (int64_t bi = 0; bi < batch; ++bi) {
        const double* ap = av.ptr() + (a3 ? bi * m * k : 0);
        const double* bp = bv.ptr() + (b3 ? bi * k * n : 0);
        double* op = out.ptr() + ((a3 || b3) ? bi * m * n : 0);
        gemm(false, false, int(m), int(n), int(k), 1.0, ap, int(k), bp, int(n), 0.0,
             op, int(n));
    }
    return t.record(std::move(out), {a, b},
                    [a, b, a3, b3, batch, m, n, k](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& av = tp.val(a);
        const Tensor& bv = tp.val(b);
        if (tp.needs_grad(a)) {
            Tensor ga(av.shape);
            for (int64_t bi = 0; bi < batch; ++bi) {
                const double* gp = g.ptr() + ((a3 || b3) ? bi * m * n : 0);
                const double* bp = bv.ptr() + (b3 ? bi * k * n : 0);
                double* gap = ga.ptr() + (a3 ? bi * m * k : 0);
                // dA = dY * B^T ; accumulate when a is shared (rank 2, b3)
                gemm(false, true, int(m), int(k), int(n), 1.0, gp, int(n), bp, int(n),
                     a3 ? 0.0 : 1.0, gap, int(k));
            }
            tp.accum(a, ga);
        }
        if (tp.needs_grad(b)) {
            Tensor gb(bv.shape);
            for (int64_t bi = 0; bi < batch; ++bi) {
                const double* gp = g.ptr() + ((a3 || b3) ? bi * m * n : 0);
                const double* ap = av.ptr() + (a3 ? bi * m * k : 0);
                double* gbp = gb.ptr() + (b3 ? bi * k * n : 0);
                // dB = A^T * dY ; accumulate when b is shared
                gemm(true, false, int(k), int(n), int(m), 1.0, ap, int(k), gp, int(n),
                     b3 ? 0.0 : 1.0, gbp, int(n));
            }
            tp.accum(b, gb);
        }
    });
}

Var linear(Tape& t, Var x, Var w, Var bias) {
    const Tensor& xv = t.val(x);
    const Tensor& wv = t.val(w);
    require(wv.rank() == 2, ErrKind::internal, "linear weight rank");
    int64_t din = wv.shape[1], dout = wv.shape[0];
    int64_t rows = xv.numel() / din;
    require(xv.shape.back() == din, ErrKind::internal, "linear input dim mismatch");
    std::vector<int64_t> os = xv.shape;
    os.back() = dout;
    Tensor out(os);
    gemm(false, true, int(rows), int(dout), int(din), 1.0, xv.ptr(), int(din),
         wv.ptr(), int(din), 0.0, out.ptr(), int(dout));
    if (bias.valid()) {
        const Tensor& bv = t.val(bias);
        require(bv.numel() == dout, ErrKind::internal, "linear bias size");
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t j = 0; j < dout; ++j)
                out.data[size_t(r * dout + j)] += bv.data[size_t(j)];
    }
    std::vector<Var> parents = {x, w};
    if (bias.valid()) parents.push_back(bias);
    return t.record(std::move(out), parents,
                    [x, w, bias, rows, din, dout](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        const Tensor& wv = tp.val(w);
        if (tp.needs_grad(x)) {
            Tensor gx(xv.shape);
            gemm(false, false, int(rows), int(din), int(dout), 1.0, g.ptr(), int(dout),
                 wv.ptr(), int(din), 0.0, gx.ptr(), int(din));
            tp.accum(x, gx);
        }
        if (tp.needs_grad(w)) {
            Tensor gw(wv.shape);
            gemm(true, false, int(dout), int(din), int(rows), 1.0, g.ptr(), int(dout),
                 xv.ptr(), int(din), 0.0, gw.ptr(), int(din));
            tp.accum(w, gw);
        }
        if (bias.valid() && tp.needs_grad(bias)) {
            Tensor gb({dout});
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t j = 0; j < dout; ++j)
                    gb.data[size_t(j)] += g.data[size_t(r * dout + j)];
            tp.accum(bias, gb);
        }
    });
}

Var softmax_lastdim(Tape& t, Var a) {
    const Tensor& av = t.val(a);
    int64_t d = av.shape.back();
    int64_t rows = av.numel() / d;
    Tensor out(av.shape);
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = av.ptr() + r * d;
        double* y = out.ptr() + r * d;
        double mx = x[0];
        for (int64_t i = 1; i < d; ++i) mx = std::max(mx, x[i]);
        double s = 0.0;
        for (int64_t i = 0; i < d; ++i) {
            y[i] = std::exp(x[i] - mx);
            s += y[i];
        }
        for (int64_t i = 0; i < d; ++i) y[i] /= s;
    }
    return t.record(std::move(out), {a}, [a, rows, d](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& y = tp.val(Var{self});
        Tensor gx(y.shape);
        for (int64_t r = 0; r < rows; ++r) {
            const double* gp = g.ptr() + r * d;
            const double* yp = y.ptr() + r * d;
            double dot = 0.0;
            for (int64_t i = 0; i < d; ++i) dot += gp[i] * yp[i];
            double* gxp = gx.ptr() + r * d;
            for (int64_t i = 0; i < d; ++i) gxp[i] = yp[i] * (gp[i] - dot);
        }
        tp.accum(a, gx);
    });
}

// ---------------------------------------------------------------- conv

static void im2col(const double* x, int c, int h, int w, int kh, int kw, int stride,
                   int pad, int ho, int wo, double* col) {
    // col layout: [c*kh*kw, ho*wo]
    for (int ci = 0; ci < c; ++ci)
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
                double* dst = col + ((size_t(ci) * kh + ky) * kw + kx) * (size_t(ho) * wo);
                for (int oy = 0; oy < ho; ++oy) {
                    int iy = oy * stride + ky - pad;
                    for (int ox = 0; ox < wo; ++ox) {
                        int ix = ox * stride + kx - pad;
                        dst[size_t(oy) * wo + ox] =
                            (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                ? x[(size_t(ci) * h + iy) * w + ix]
                                : 0.0;
                    }
                }
            }
}

static void col2im(const double* col, int c, int h, int w, int kh, int kw, int stride,
                   int pad, int ho, int wo, double* x) {
    for (int ci = 0; ci < c; ++ci)
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
                const double* src =
                    col + ((size_t(ci) * kh + ky) * kw + kx) * (size_t(ho) * wo);
                for (int oy = 0; oy < ho; ++oy) {
                    int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < wo; ++ox) {
                        int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= w) continue;
                        x[(size_t(ci) * h + iy) * w + ix] += src[size_t(oy) * wo + ox];
                    }
                }
            }
}

Var conv2d(Tape& t, Var x, Var w, Var bias, int stride, int pad) {
    const Tensor& xv = t.val(x);
    const Tensor& wv = t.val(w);
    require(xv.rank() == 4 && wv.rank() == 4, ErrKind::internal, "conv2d rank");
    int64_t B = xv.shape[0], Cin = xv.shape[1], H = xv.shape[2], W = xv.shape[3];
    int64_t Cout = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3];
    require(wv.shape[1] == Cin, ErrKind::internal, "conv2d channel mismatch");
    int ho = int((H + 2 * pad - kh) / stride + 1);
    int wo = int((W + 2 * pad - kw) / stride + 1);
    require(ho >= 1 && wo >= 1, ErrKind::internal, "conv2d output too small");
    int64_t K = Cin * kh * kw;

    Tensor out({B, Cout, ho, wo});
    std::vector<double> col(size_t(K) * ho * wo);
    const Tensor* bv = bias.valid() ? &t.val(bias) : nullptr;
    for (int64_t b = 0; b < B; ++b) {
        im2col(xv.ptr() + b * Cin * H * W, int(Cin), int(H), int(W), int(kh), int(kw),
               stride, pad, ho, wo, col.data());
        double* yp = out.ptr() + b * Cout * ho * wo;
        gemm(false, false, int(Cout), ho * wo, int(K), 1.0, wv.ptr(), int(K),
             col.data(), ho * wo, 0.0, yp, ho * wo);
        if (bv)
            for (int64_t co = 0; co < Cout; ++co) {
                double bvv = bv->data[size_t(co)];
                double* row = yp + co * ho * wo;
                for (int i = 0; i < ho * wo; ++i) row[i] += bvv;
            }
    }
    std::vector<Var> parents = {x, w};
    if (bias.valid()) parents.push_back(bias);
    return t.record(std::move(out), parents,
                    [x, w, bias, stride, pad, B, Cin, H, W, Cout, kh, kw, ho, wo,
                     K](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        const Tensor& wv = tp.val(w);
        bool need_x = tp.needs_grad(x);
        bool need_w = tp.needs_grad(w);
        bool need_b = bias.valid() && tp.needs_grad(bias);
        Tensor gx = need_x ? Tensor(xv.shape) : Tensor();
        Tensor gw = need_w ? Tensor(wv.shape) : Tensor();
        Tensor gb = need_b ? Tensor({Cout}) : Tensor();
        std::vector<double> col(size_t(K) * ho * wo);
        std::vector<double> dcol(size_t(K) * ho * wo);
        for (int64_t b = 0; b < B; ++b) {
            const double* gp = g.ptr() + b * Cout * ho * wo;
            if (need_w) {
                im2col(xv.ptr() + b * Cin * H * W, int(Cin), int(H), int(W), int(kh),
                       int(kw), stride, pad, ho, wo, col.data());
                gemm(false, true, int(Cout), int(K), ho * wo, 1.0, gp, ho * wo,
                     col.data(), ho * wo, 1.0, gw.ptr(), int(K));
            }
            if (need_x) {
                gemm(true, false, int(K), ho * wo, int(Cout), 1.0, wv.ptr(), int(K), gp,
                     ho * wo, 0.0, dcol.data(), ho * wo);
                col2im(dcol.data(), int(Cin), int(H), int(W), int(kh), int(kw), stride,
                       pad, ho, wo, gx.ptr() + b * Cin * H * W);
            }
            if (need_b)
                for (int64_t co = 0; co < Cout; ++co) {
                    const double* row = gp + co * ho * wo;
                    double s = 0.0;
                    for (int i = 0; i < ho * wo; ++i) s += row[i];
                    gb.data[size_t(co)] += s;
                }
        }
        if (need_x) tp.accum(x, gx);
        if (need_w) tp.accum(w, gw);
        if (need_b) tp.accum(bias, gb);
    });
}

Var avg_pool2d(Tape& t, Var x, int kernel, int stride) {
    const Tensor& xv = t.val(x);
    require(xv.rank() == 4, ErrKind::internal, "avg_pool2d rank");
    int64_t B = xv.shape[0], C = xv.shape[1], H = xv.shape[2], W = xv.shape[3];
    int ho = int((H - kernel) / stride + 1);
    int wo = int((W - kernel) / stride + 1);
    require(ho >= 1 && wo >= 1, ErrKind::internal, "avg_pool2d output too small");
    Tensor out({B, C, ho, wo});
    double inv = 1.0 / (double(kernel) * kernel);
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const double* xp = xv.ptr() + bc * H * W;
        double* yp = out.ptr() + bc * ho * wo;
        for (int oy = 0; oy < ho; ++oy)
            for (int ox = 0; ox < wo; ++ox) {
                double s = 0.0;
                for (int ky = 0; ky < kernel; ++ky)
                    for (int kx = 0; kx < kernel; ++kx)
                        s += xp[size_t(oy * stride + ky) * W + (ox * stride + kx)];
                yp[size_t(oy) * wo + ox] = s * inv;
            }
    }
    return t.record(std::move(out), {x},
                    [x, kernel, stride, B, C, H, W, ho, wo](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        Tensor gx(xv.shape);
        double inv = 1.0 / (double(kernel) * kernel);
        for (int64_t bc = 0; bc < B * C; ++bc) {
            const double* gp = g.ptr() + bc * ho * wo;
            double* gxp = gx.ptr() + bc * H * W;
            for (int oy = 0; oy < ho; ++oy)
                for (int ox = 0; ox < wo; ++ox) {
                    double gv = gp[size_t(oy) * wo + ox] * inv;
                    for (int ky = 0; ky < kernel; ++ky)
                        for (int kx = 0; kx < kernel; ++kx)
                            gxp[size_t(oy * stride + ky) * W + (ox * stride + kx)] += gv;
                }
        }
        tp.accum(x, gx);
    });
}

Var upsample_nearest2(Tape& t, Var x) {
    const Tensor& xv = t.val(x);
    require(xv.rank() == 4, ErrKind::internal, "upsample rank");
    int64_t B = xv.shape[0], C = xv.shape[1], H = xv.shape[2], W = xv.shape[3];
    Tensor out({B, C, H * 2, W * 2});
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const double* xp = xv.ptr() + bc * H * W;
        double* yp = out.ptr() + bc * 4 * H * W;
        for (int64_t y = 0; y < 2 * H; ++y)
            for (int64_t xcol = 0; xcol < 2 * W; ++xcol)
                yp[y * 2 * W + xcol] = xp[(y / 2) * W + xcol / 2];
    }
    return t.record(std::move(out), {x}, [x, B, C, H, W](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        Tensor gx(xv.shape);
        for (int64_t bc = 0; bc < B * C; ++bc) {
            const double* gp = g.ptr() + bc * 4 * H * W;
            double* gxp = gx.ptr() + bc * H * W;
            for (int64_t y = 0; y < 2 * H; ++y)
                for (int64_t xcol = 0; xcol < 2 * W; ++xcol)
                    gxp[(y / 2) * W + xcol / 2] += gp[y * 2 * W + xcol];
        }
        tp.accum(x, gx);
    });
}

Var mean_hw(Tape& t, Var x) {
    const Tensor& xv = t.val(x);
    require(xv.rank() == 4, ErrKind::internal, "mean_hw rank");
    int64_t B = xv.shape[0], C = xv.shape[1], HW = xv.shape[2] * xv.shape[3];
    Tensor out({B, C});
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const double* xp = xv.ptr() + bc * HW;
        double s = 0.0;
        for (int64_t i = 0; i < HW; ++i) s += xp[i];
        out.data[size_t(bc)] = s / double(HW);
    }
    return t.record(std::move(out), {x}, [x, B, C, HW](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        Tensor gx(xv.shape);
        for (int64_t bc = 0; bc < B * C; ++bc) {
            double gv = g.data[size_t(bc)] / double(HW);
            double* gxp = gx.ptr() + bc * HW;
            for (int64_t i = 0; i < HW; ++i) gxp[i] = gv;
        }
        tp.accum(x, gx);
    });
}

// ---------------------------------------------------------------- misc

Var embedding(Tape& t, Var table, const std::vector<int64_t>& ids) {
    const Tensor& tv = t.val(table);
    require(tv.rank() == 2, ErrKind::internal, "embedding table rank");
    int64_t V = tv.shape[0], D = tv.shape[1];
    Tensor out({int64_t(ids.size()), D});
    for (size_t i = 0; i < ids.size(); ++i) {
        int64_t id = ids[i];
        require(id >= 0 && id < V, ErrKind::internal, "embedding id out of range");
        std::copy(tv.data.begin() + id * D, tv.data.begin() + (id + 1) * D,
                  out.data.begin() + int64_t(i) * D);
    }
    return t.record(std::move(out), {table}, [table, ids, D](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& tv = tp.val(table);
        Tensor gt(tv.shape);
        for (size_t i = 0; i < ids.size(); ++i) {
            const double* gp = g.ptr() + int64_t(i) * D;
            double* dst = gt.ptr() + ids[i] * D;
            for (int64_t j = 0; j < D; ++j) dst[j] += gp[j];
        }
        tp.accum(table, gt);
    });
}

Var mse_loss(Tape& t, Var a, Var b) {
    Var d = sub(t, a, b);
    return mean_all(t, mul(t, d, d));
}

Var l1_loss(Tape& t, Var a, Var b) {
    return mean_all(t, abs_op(t, sub(t, a, b)));
}

}  // namespace umic
