#pragma once

#include "core/nn.hpp"

namespace umic {

int norm_groups_for(int channels);  // largest divisor of channels <= 8

Tensor sinusoidal_embedding(const std::vector<int>& t_batch, int dim);

// GN -> SiLU -> conv, timestep-embedding add, GN -> SiLU -> conv (zero-init),
// residual skip (1x1 when the channel count changes).
struct ResBlock {
    GroupNormLayer gn1, gn2;
    Conv2dLayer conv1, conv2, skip;
    LinearLayer emb_proj;
    bool has_skip = false;
    bool has_emb = false;

    void init(ParamStore& ps, const std::string& name, int cin, int cout,
              int emb_dim, Rng& rng);
    Var fwd(Tape& t, const ParamStore& ps, Var x, Var emb) const;  // emb [B,E] or invalid
};

// Spatial tokens attend over a text memory sequence; residual.
struct CrossAttnBlock {
    GroupNormLayer gn;
    AttentionLayer attn;
    void init(ParamStore& ps, const std::string& name, int channels, int mem_dim,
              int heads, Rng& rng);
    Var fwd(Tape& t, const ParamStore& ps, Var x, Var memory) const;
};

// Self-attention over spatial tokens; residual.
struct SelfAttnBlock {
    GroupNormLayer gn;
    AttentionLayer attn;
    void init(ParamStore& ps, const std::string& name, int channels, int heads,
              Rng& rng);
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;
};

// feature * (1 + gamma) + beta
Var spade_apply(Tape& t, Var x, Var gamma, Var beta);

}  // namespace umic
