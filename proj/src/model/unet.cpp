#include "model/unet.hpp"

namespace umic {

UNetModel::UNetModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                     const std::string& prefix)
    : cfg_(cfg) {
    int c1 = cfg.unet_ch(0), c2 = cfg.unet_ch(1), c3 = cfg.unet_ch(2);
    int td = cfg.time_dim, xd = cfg.text_dim, zc = cfg.latent_channels;

    time1_.init(ps, prefix + "time1", td, td, rng);
    time2_.init(ps, prefix + "time2", td, td, rng);
    in_conv_.init(ps, prefix + "in", zc, c1, 3, 1, 1, rng);

    enc1_.init(ps, prefix + "enc1", c1, c1, td, rng);
    down1_.init(ps, prefix + "down1", c1, c1, 3, 2, 1, rng);
    enc2_.init(ps, prefix + "enc2", c1, c2, td, rng);
    xattn2_.init(ps, prefix + "xattn2", c2, xd, cfg.heads, rng);
    down2_.init(ps, prefix + "down2", c2, c2, 3, 2, 1, rng);

    mid1_.init(ps, prefix + "mid1", c2, c3, td, rng);
    xattn_mid_.init(ps, prefix + "xattn_mid", c3, xd, cfg.heads, rng);
    mid2_.init(ps, prefix + "mid2", c3, c3, td, rng);

    up1_.init(ps, prefix + "up1", c3, c2, 3, 1, 1, rng);
    dec2_.init(ps, prefix + "dec2", c2 + c2, c2, td, rng);
    xattn_dec2_.init(ps, prefix + "xattn_dec2", c2, xd, cfg.heads, rng);
    up2_.init(ps, prefix + "up2", c2, c1, 3, 1, 1, rng);
    dec1_.init(ps, prefix + "dec1", c1 + c1, c1, td, rng);

    out_gn_.init(ps, prefix + "out_gn", c1, norm_groups_for(c1));
    out_conv_.init(ps, prefix + "out", c1, zc, 3, 1, 1, rng, /*zero=*/true);
}

Var UNetModel::time_embedding(Tape& t, const ParamStore& ps,
                              const std::vector<int>& t_batch) const {
    Var e = t.constant(sinusoidal_embedding(t_batch, cfg_.time_dim));
    return time2_.fwd(t, ps, silu(t, time1_.fwd(t, ps, e)));
}

Var UNetModel::predict(Tape& t, const ParamStore& ps, Var z_t,
                       const std::vector<int>& t_batch, Var conp_memory,
                       const AdapterState& adapter) const {
    Var temb = time_embedding(t, ps, t_batch);

    Var h = in_conv_.fwd(t, ps, z_t);
    Var f1 = enc1_.fwd(t, ps, h, temb);  // c1 @ full latent res
    f1 = spade_apply(t, f1, adapter.mods[0].first, adapter.mods[0].second);

    Var f2 = enc2_.fwd(t, ps, down1_.fwd(t, ps, f1), temb);  // c2 @ /2
    f2 = xattn2_.fwd(t, ps, f2, conp_memory);
    f2 = spade_apply(t, f2, adapter.mods[1].first, adapter.mods[1].second);

    Var m = mid1_.fwd(t, ps, down2_.fwd(t, ps, f2), temb);  // c3 @ /4
    m = xattn_mid_.fwd(t, ps, m, conp_memory);
    m = spade_apply(t, m, adapter.mods[2].first, adapter.mods[2].second);
    m = mid2_.fwd(t, ps, m, temb);

    Var u2 = up1_.fwd(t, ps, upsample_nearest2(t, m));  // c2 @ /2
    Var d2 = dec2_.fwd(t, ps, concat(t, {u2, f2}, 1), temb);
    d2 = xattn_dec2_.fwd(t, ps, d2, conp_memory);

    Var u1 = up2_.fwd(t, ps, upsample_nearest2(t, d2));  // c1 @ full
    Var d1 = dec1_.fwd(t, ps, concat(t, {u1, f1}, 1), temb);

    return out_conv_.fwd(t, ps, silu(t, out_gn_.fwd(t, ps, d1)));
}

}  // namespace umic
