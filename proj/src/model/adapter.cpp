#include "model/adapter.hpp"

namespace umic {

AdapterModel::AdapterModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                           const std::string& prefix)
    : cfg_(cfg) {
    int a = cfg.adapter_base;
    int c1 = cfg.unet_ch(0), c2 = cfg.unet_ch(1), c3 = cfg.unet_ch(2);
    int td = cfg.time_dim, mw = cfg.comp_mlp_width;

    time1_.init(ps, prefix + "time1", td, td, rng);
    time2_.init(ps, prefix + "time2", td, td, rng);
    comp1_.init(ps, prefix + "comp1", cfg.text_dim, mw, rng);
    comp2_.init(ps, prefix + "comp2", mw, td, rng);

    hint0_.init(ps, prefix + "hint0", 3, a, 3, 1, 1, rng);
    hint1_.init(ps, prefix + "hint1", a, a, 3, 2, 1, rng);
    hint2_.init(ps, prefix + "hint2", a, c1, 3, 2, 1, rng);

    res16_.init(ps, prefix + "res16", c1, c1, td, rng);
    head16_.init(ps, prefix + "head16", c1, 2 * c1, 1, 1, 0, rng, /*zero=*/true);
    down16_.init(ps, prefix + "down16", c1, c2, 3, 2, 1, rng);
    res8_.init(ps, prefix + "res8", c2, c2, td, rng);
    head8_.init(ps, prefix + "head8", c2, 2 * c2, 1, 1, 0, rng, /*zero=*/true);
    down8_.init(ps, prefix + "down8", c2, c3, 3, 2, 1, rng);
    res4_.init(ps, prefix + "res4", c3, c3, td, rng);
    head4_.init(ps, prefix + "head4", c3, 2 * c3, 1, 1, 0, rng, /*zero=*/true);
}

AdapterState AdapterModel::fwd(Tape& t, const ParamStore& ps, Var x_v,
                               const std::vector<int>& t_batch,
                               Var comp_memory) const {
    Var temb = t.constant(sinusoidal_embedding(t_batch, cfg_.time_dim));
    temb = time2_.fwd(t, ps, silu(t, time1_.fwd(t, ps, temb)));
    Var pooled = mean_axis(t, comp_memory, 1);  // [B, text_dim]
    Var cemb = comp2_.fwd(t, ps, silu(t, comp1_.fwd(t, ps, pooled)));
    Var emb = add(t, temb, cemb);

    Var h = silu(t, hint0_.fwd(t, ps, x_v));
    h = silu(t, hint1_.fwd(t, ps, h));
    h = silu(t, hint2_.fwd(t, ps, h));  // c1 @ latent resolution

    AdapterState state;
    Var f16 = res16_.fwd(t, ps, h, emb);
    Var gb16 = head16_.fwd(t, ps, f16);
    int64_t c1 = t.val(f16).shape[1];
    state.mods[0] = {slice(t, gb16, 1, 0, c1), slice(t, gb16, 1, c1, c1)};

    Var f8 = res8_.fwd(t, ps, down16_.fwd(t, ps, f16), emb);
    Var gb8 = head8_.fwd(t, ps, f8);
    int64_t c2 = t.val(f8).shape[1];
    state.mods[1] = {slice(t, gb8, 1, 0, c2), slice(t, gb8, 1, c2, c2)};

    Var f4 = res4_.fwd(t, ps, down8_.fwd(t, ps, f8), emb);
    Var gb4 = head4_.fwd(t, ps, f4);
    int64_t c3 = t.val(f4).shape[1];
    state.mods[2] = {slice(t, gb4, 1, 0, c3), slice(t, gb4, 1, c3, c3)};
    return state;
}

}  // namespace umic
