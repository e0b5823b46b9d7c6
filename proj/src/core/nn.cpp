#include "core/nn.hpp"

#include <cmath>

#include "core/sha256.hpp"

namespace umic {

int ParamStore::add(const std::string& name, Tensor init, bool trainable) {
    require(find(name) < 0, ErrKind::internal, "duplicate parameter name: " + name);
    Param p;
    p.name = name;
    p.value = std::move(init);
    p.trainable = trainable;
    params_.push_back(std::move(p));
    return int(params_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
    for (size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return int(i);
    return -1;
}

void ParamStore::bind(Tape& t) const {
    for (const Param& p : params_) p.var = t.leaf(p.value, p.trainable);
}

int64_t ParamStore::total_elements() const {
    int64_t n = 0;
    for (const Param& p : params_) n += p.value.numel();
    return n;
}

int64_t ParamStore::trainable_elements() const {
    int64_t n = 0;
    for (const Param& p : params_)
        if (p.trainable) n += p.value.numel();
    return n;
}

std::string ParamStore::checksum(const std::string& prefix) const {
    std::string blob;
    for (const Param& p : params_) {
        if (p.name.rfind(prefix, 0) != 0) continue;
        blob.append(p.name);
        blob.append(reinterpret_cast<const char*>(p.value.ptr()),
                    size_t(p.value.numel()) * sizeof(double));
    }
    return sha256_hex(blob);
}

void ParamStore::set_trainable_by_prefix(const std::string& prefix, bool trainable) {
    for (Param& p : params_)
        if (p.name.rfind(prefix, 0) == 0) p.trainable = trainable;
}

// ---------------------------------------------------------------- norms

Var group_norm(Tape& t, Var x, int groups, Var gamma, Var beta, double eps) {
    const Tensor& xv = t.val(x);
    require(xv.rank() == 4, ErrKind::internal, "group_norm rank");
    int64_t B = xv.shape[0], C = xv.shape[1], HW = xv.shape[2] * xv.shape[3];
    require(C % groups == 0, ErrKind::internal, "group_norm channel/group mismatch");
    int64_t Cg = C / groups;
    int64_t N = Cg * HW;
    const Tensor& gv = t.val(gamma);
    const Tensor& bv = t.val(beta);
    require(gv.numel() == C && bv.numel() == C, ErrKind::internal,
            "group_norm affine size");

    Tensor out(xv.shape);
    Tensor stats({B, int64_t(groups), 2});  // mean, inv_std per (b,g)
    for (int64_t b = 0; b < B; ++b)
        for (int64_t g = 0; g < groups; ++g) {
            const double* xp = xv.ptr() + (b * C + g * Cg) * HW;
            double mean = 0.0;
            for (int64_t i = 0; i < N; ++i) mean += xp[i];
            mean /= double(N);
            double var = 0.0;
            for (int64_t i = 0; i < N; ++i) {
                double d = xp[i] - mean;
                var += d * d;
            }
            var /= double(N);
            double inv_std = 1.0 / std::sqrt(var + eps);
            stats.data[size_t((b * groups + g) * 2)] = mean;
            stats.data[size_t((b * groups + g) * 2 + 1)] = inv_std;
            double* yp = out.ptr() + (b * C + g * Cg) * HW;
            for (int64_t cg = 0; cg < Cg; ++cg) {
                double ga = gv.data[size_t(g * Cg + cg)];
                double be = bv.data[size_t(g * Cg + cg)];
                for (int64_t i = 0; i < HW; ++i) {
                    double xh = (xp[cg * HW + i] - mean) * inv_std;
                    yp[cg * HW + i] = ga * xh + be;
                }
            }
        }
    return t.record(std::move(out), {x, gamma, beta},
                    [x, gamma, beta, groups, B, C, Cg, HW, N,
                     stats](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        const Tensor& gv = tp.val(gamma);
        bool need_x = tp.needs_grad(x);
        bool need_g = tp.needs_grad(gamma);
        bool need_b = tp.needs_grad(beta);
        Tensor gx = need_x ? Tensor(xv.shape) : Tensor();
        Tensor gg = need_g ? Tensor({C}) : Tensor();
        Tensor gb = need_b ? Tensor({C}) : Tensor();
        for (int64_t b = 0; b < B; ++b)
            for (int64_t gi = 0; gi < groups; ++gi) {
                double mean = stats.data[size_t((b * groups + gi) * 2)];
                double inv_std = stats.data[size_t((b * groups + gi) * 2 + 1)];
                const double* xp = xv.ptr() + (b * C + gi * Cg) * HW;
                const double* gp = g.ptr() + (b * C + gi * Cg) * HW;
                // accumulate affine grads and the two per-group means
                double m1 = 0.0, m2 = 0.0;
                for (int64_t cg = 0; cg < Cg; ++cg) {
                    double ga = gv.data[size_t(gi * Cg + cg)];
                    for (int64_t i = 0; i < HW; ++i) {
                        double xh = (xp[cg * HW + i] - mean) * inv_std;
                        double go = gp[cg * HW + i];
                        if (need_g) gg.data[size_t(gi * Cg + cg)] += go * xh;
                        if (need_b) gb.data[size_t(gi * Cg + cg)] += go;
                        double dxh = go * ga;
                        m1 += dxh;
                        m2 += dxh * xh;
                    }
                }
                m1 /= double(N);
                m2 /= double(N);
                if (need_x) {
                    double* gxp = gx.ptr() + (b * C + gi * Cg) * HW;
                    for (int64_t cg = 0; cg < Cg; ++cg) {
                        double ga = gv.data[size_t(gi * Cg + cg)];
                        for (int64_t i = 0; i < HW; ++i) {
                            double xh = (xp[cg * HW + i] - mean) * inv_std;
                            double dxh = gp[cg * HW + i] * ga;
                            gxp[cg * HW + i] = (dxh - m1 - xh * m2) * inv_std;
                        }
                    }
                }
            }
        if (need_x) tp.accum(x, gx);
        if (need_g) tp.accum(gamma, gg);
        if (need_b) tp.accum(beta, gb);
    });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps) {
    const Tensor& xv = t.val(x);
    int64_t D = xv.shape.back();
    int64_t rows = xv.numel() / D;
    const Tensor& gv = t.val(gamma);
    const Tensor& bv = t.val(beta);
    require(gv.numel() == D && bv.numel() == D, ErrKind::internal,
            "layer_norm affine size");
    Tensor out(xv.shape);
    Tensor stats({rows, 2});
    for (int64_t r = 0; r < rows; ++r) {
        const double* xp = xv.ptr() + r * D;
        double mean = 0.0;
        for (int64_t i = 0; i < D; ++i) mean += xp[i];
        mean /= double(D);
        double var = 0.0;
        for (int64_t i = 0; i < D; ++i) {
            double d = xp[i] - mean;
            var += d * d;
        }
        var /= double(D);
        double inv_std = 1.0 / std::sqrt(var + eps);
        stats.data[size_t(r * 2)] = mean;
        stats.data[size_t(r * 2 + 1)] = inv_std;
        double* yp = out.ptr() + r * D;
        for (int64_t i = 0; i < D; ++i)
            yp[i] = gv.data[size_t(i)] * (xp[i] - mean) * inv_std + bv.data[size_t(i)];
    }
    return t.record(std::move(out), {x, gamma, beta},
                    [x, gamma, beta, rows, D, stats](Tape& tp, int32_t self) {
        const Tensor& g = tp.grad(Var{self});
        const Tensor& xv = tp.val(x);
        const Tensor& gv = tp.val(gamma);
        bool need_x = tp.needs_grad(x);
        bool need_g = tp.needs_grad(gamma);
        bool need_b = tp.needs_grad(beta);
        Tensor gx = need_x ? Tensor(xv.shape) : Tensor();
        Tensor gg = need_g ? Tensor({D}) : Tensor();
        Tensor gb = need_b ? Tensor({D}) : Tensor();
        for (int64_t r = 0; r < rows; ++r) {
            double mean = stats.data[size_t(r * 2)];
            double inv_std = stats.data[size_t(r * 2 + 1)];
            const double* xp = xv.ptr() + r * D;
            const double* gp = g.ptr() + r * D;
            double m1 = 0.0, m2 = 0.0;
            for (int64_t i = 0; i < D; ++i) {
                double xh = (xp[i] - mean) * inv_std;
                if (need_g) gg.data[size_t(i)] += gp[i] * xh;
                if (need_b) gb.data[size_t(i)] += gp[i];
                double dxh = gp[i] * gv.data[size_t(i)];
                m1 += dxh;
                m2 += dxh * xh;
            }
            m1 /= double(D);
            m2 /= double(D);
            if (need_x) {
                double* gxp = gx.ptr() + r * D;
                for (int64_t i = 0; i < D; ++i) {
                    double xh = (xp[i] - mean) * inv_std;
                    double dxh = gp[i] * gv.data[size_t(i)];
                    gxp[i] = (dxh - m1 - xh * m2) * inv_std;
                }
            }
        }
        if (need_x) tp.accum(x, gx);
        if (need_g) tp.accum(gamma, gg);
        if (need_b) tp.accum(beta, gb);
    });
}

// ---------------------------------------------------------------- layers

static Tensor gaussian_init(std::vector<int64_t> shape, double std, Rng& rng) {
    Tensor t(std::move(shape));
    rng.fill_gaussian(t.ptr(), size_t(t.numel()));
    t.scale_(std);
    return t;
}

void LinearLayer::init(ParamStore& ps, const std::string& name, int in, int out,
                       Rng& rng, bool zero, bool bias) {
    double std = zero ? 0.0 : std::sqrt(2.0 / double(in));
    w = ps.add(name + ".w", zero ? Tensor({out, in}) : gaussian_init({out, in}, std, rng));
    if (bias) b = ps.add(name + ".b", Tensor({int64_t(out)}));
}

Var LinearLayer::fwd(Tape& t, const ParamStore& ps, Var x) const {
    return linear(t, x, ps.var(w), b >= 0 ? ps.var(b) : Var{});
}

void Conv2dLayer::init(ParamStore& ps, const std::string& name, int cin, int cout,
                       int k, int stride_, int pad_, Rng& rng, bool zero) {
    stride = stride_;
    pad = pad_;
    double std = std::sqrt(2.0 / (double(cin) * k * k));
    w = ps.add(name + ".w",
               zero ? Tensor({cout, cin, k, k}) : gaussian_init({cout, cin, k, k}, std, rng));
    b = ps.add(name + ".b", Tensor({int64_t(cout)}));
}

Var Conv2dLayer::fwd(Tape& t, const ParamStore& ps, Var x) const {
    return conv2d(t, x, ps.var(w), ps.var(b), stride, pad);
}

void GroupNormLayer::init(ParamStore& ps, const std::string& name, int channels,
                          int groups_) {
    groups = groups_;
    gamma = ps.add(name + ".gamma", Tensor::full({int64_t(channels)}, 1.0));
    beta = ps.add(name + ".beta", Tensor({int64_t(channels)}));
}

Var GroupNormLayer::fwd(Tape& t, const ParamStore& ps, Var x) const {
    return group_norm(t, x, groups, ps.var(gamma), ps.var(beta));
}

void LayerNormLayer::init(ParamStore& ps, const std::string& name, int dim) {
    gamma = ps.add(name + ".gamma", Tensor::full({int64_t(dim)}, 1.0));
    beta = ps.add(name + ".beta", Tensor({int64_t(dim)}));
}

Var LayerNormLayer::fwd(Tape& t, const ParamStore& ps, Var x) const {
    return layer_norm(t, x, ps.var(gamma), ps.var(beta));
}

void AttentionLayer::init(ParamStore& ps, const std::string& name, int dim_,
                          int heads_, Rng& rng, int mem_dim) {
    dim = dim_;
    heads = heads_;
    if (mem_dim < 0) mem_dim = dim;
    require(dim % heads == 0, ErrKind::internal, "attention dim % heads != 0");
    q.init(ps, name + ".q", dim, dim, rng);
    k.init(ps, name + ".k", mem_dim, dim, rng);
    v.init(ps, name + ".v", mem_dim, dim, rng);
    out.init(ps, name + ".out", dim, dim, rng, /*zero=*/true);
}

Var AttentionLayer::fwd(Tape& t, const ParamStore& ps, Var query, Var memory) const {
    const Tensor& qv = t.val(query);
    const Tensor& mv = t.val(memory);
    int64_t B = qv.shape[0], n = qv.shape[1], m = mv.shape[1];
    int64_t dh = dim / heads;

    auto split_heads = [&](Var x, int64_t len) {
        Var r = reshape(t, x, {B, len, heads, dh});
        r = permute(t, r, {0, 2, 1, 3});
        return reshape(t, r, {B * heads, len, dh});
    };
    Var qh = split_heads(q.fwd(t, ps, query), n);
    Var kh = split_heads(k.fwd(t, ps, memory), m);
    Var vh = split_heads(v.fwd(t, ps, memory), m);

    Var scores = matmul(t, qh, permute(t, kh, {0, 2, 1}));
    scores = scalar_mul(t, scores, 1.0 / std::sqrt(double(dh)));
    Var attn = softmax_lastdim(t, scores);
    Var ctx = matmul(t, attn, vh);  // [B*heads, n, dh]
    ctx = reshape(t, ctx, {B, int64_t(heads), n, dh});
    ctx = permute(t, ctx, {0, 2, 1, 3});
    ctx = reshape(t, ctx, {B, n, int64_t(dim)});
    return out.fwd(t, ps, ctx);
}

}  // namespace umic
