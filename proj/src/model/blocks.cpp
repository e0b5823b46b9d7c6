#include "model/blocks.hpp"

#include <cmath>

namespace umic {

int norm_groups_for(int channels) {
    for (int g = 8; g >= 2; --g)
        if (channels % g == 0) return g;
    return 1;
}

Tensor sinusoidal_embedding(const std::vector<int>& t_batch, int dim) {
    require(dim % 2 == 0, ErrKind::internal, "time embedding dim must be even");
    int64_t B = int64_t(t_batch.size());
    int half = dim / 2;
    Tensor out({B, int64_t(dim)});
    for (int64_t b = 0; b < B; ++b) {
        double tv = double(t_batch[size_t(b)]);
        for (int i = 0; i < half; ++i) {
            double freq = std::exp(-std::log(10000.0) * double(i) /
                                   double(half > 1 ? half - 1 : 1));
            out.data[size_t(b * dim + i)] = std::sin(tv * freq);
            out.data[size_t(b * dim + half + i)] = std::cos(tv * freq);
        }
    }
    return out;
}

void ResBlock::init(ParamStore& ps, const std::string& name, int cin, int cout,
                    int emb_dim, Rng& rng) {
    gn1.init(ps, name + ".gn1", cin, norm_groups_for(cin));
    conv1.init(ps, name + ".conv1", cin, cout, 3, 1, 1, rng);
    gn2.init(ps, name + ".gn2", cout, norm_groups_for(cout));
    conv2.init(ps, name + ".conv2", cout, cout, 3, 1, 1, rng, /*zero=*/true);
    has_emb = emb_dim > 0;
    if (has_emb) emb_proj.init(ps, name + ".emb", emb_dim, cout, rng);
    has_skip = cin != cout;
    if (has_skip) skip.init(ps, name + ".skip", cin, cout, 1, 1, 0, rng);
}

Var ResBlock::fwd(Tape& t, const ParamStore& ps, Var x, Var emb) const {
    Var h = conv1.fwd(t, ps, silu(t, gn1.fwd(t, ps, x)));
    if (has_emb && emb.valid()) {
        const Tensor& ev = t.val(emb);
        Var proj = emb_proj.fwd(t, ps, silu(t, emb));  // [B, cout]
        proj = reshape(t, proj, {ev.shape[0], t.val(proj).shape.back(), 1, 1});
        h = add(t, h, proj);
    }
    h = conv2.fwd(t, ps, silu(t, gn2.fwd(t, ps, h)));
    Var s = has_skip ? skip.fwd(t, ps, x) : x;
    return add(t, s, h);
}

void CrossAttnBlock::init(ParamStore& ps, const std::string& name, int channels,
                          int mem_dim, int heads, Rng& rng) {
    gn.init(ps, name + ".gn", channels, norm_groups_for(channels));
    attn.init(ps, name + ".attn", channels, heads, rng, mem_dim);
}

static Var to_tokens(Tape& t, Var x, int64_t& B, int64_t& C, int64_t& H, int64_t& W) {
    const Tensor& xv = t.val(x);
    B = xv.shape[0];
    C = xv.shape[1];
    H = xv.shape[2];
    W = xv.shape[3];
    Var p = permute(t, x, {0, 2, 3, 1});
    return reshape(t, p, {B, H * W, C});
}

static Var from_tokens(Tape& t, Var tokens, int64_t B, int64_t C, int64_t H,
                       int64_t W) {
    Var r = reshape(t, tokens, {B, H, W, C});
    return permute(t, r, {0, 3, 1, 2});
}

Var CrossAttnBlock::fwd(Tape& t, const ParamStore& ps, Var x, Var memory) const {
    int64_t B, C, H, W;
    Var tokens = to_tokens(t, gn.fwd(t, ps, x), B, C, H, W);
    Var out = attn.fwd(t, ps, tokens, memory);
    return add(t, x, from_tokens(t, out, B, C, H, W));
}

void SelfAttnBlock::init(ParamStore& ps, const std::string& name, int channels,
                         int heads, Rng& rng) {
    gn.init(ps, name + ".gn", channels, norm_groups_for(channels));
    attn.init(ps, name + ".attn", channels, heads, rng);
}

Var SelfAttnBlock::fwd(Tape& t, const ParamStore& ps, Var x) const {
    int64_t B, C, H, W;
    Var tokens = to_tokens(t, gn.fwd(t, ps, x), B, C, H, W);
    Var out = attn.fwd(t, ps, tokens, tokens);
    return add(t, x, from_tokens(t, out, B, C, H, W));
}

Var spade_apply(Tape& t, Var x, Var gamma, Var beta) {
    return add(t, mul(t, x, scalar_add(t, gamma, 1.0)), beta);
}

}  // namespace umic
