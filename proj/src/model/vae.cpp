#include "model/vae.hpp"

namespace umic {

VaeModel::VaeModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                   const std::string& prefix)
    : cfg_(cfg) {
    int b = cfg.vae_base, zc = cfg.latent_channels;
    e0_.init(ps, prefix + "e0", 3, b, 3, 1, 1, rng);
    e1_.init(ps, prefix + "e1", b, 2 * b, 3, 2, 1, rng);
    e2_.init(ps, prefix + "e2", 2 * b, 2 * b, 3, 2, 1, rng);
    e3_.init(ps, prefix + "e3", 2 * b, 2 * zc, 3, 1, 1, rng);
    d0_.init(ps, prefix + "d0", zc, 2 * b, 3, 1, 1, rng);
    d1_.init(ps, prefix + "d1", 2 * b, 2 * b, 3, 1, 1, rng);
    d2_.init(ps, prefix + "d2", 2 * b, b, 3, 1, 1, rng);
    d3_.init(ps, prefix + "d3", b, 3, 3, 1, 1, rng);
}

Var VaeModel::encode_moments(Tape& t, const ParamStore& ps, Var x) const {
    return encode_moments(t, ps, x, nullptr);
}

Var VaeModel::encode_moments(Tape& t, const ParamStore& ps, Var x,
                             VaeTaps* taps) const {
    Var f0 = silu(t, e0_.fwd(t, ps, x));   // base @ H
    Var f1 = silu(t, e1_.fwd(t, ps, f0));  // 2b @ H/2
    Var f2 = silu(t, e2_.fwd(t, ps, f1));  // 2b @ H/4
    if (taps) {
        taps->full = f0;
        taps->half = f1;
        taps->quarter = f2;
    }
    return e3_.fwd(t, ps, f2);
}

Var VaeModel::moments_mean(Tape& t, Var moments) const {
    return slice(t, moments, 1, 0, cfg_.latent_channels);
}

Var VaeModel::moments_logvar(Tape& t, Var moments) const {
    return slice(t, moments, 1, cfg_.latent_channels, cfg_.latent_channels);
}

Var VaeModel::decode(Tape& t, const ParamStore& ps, Var z, const VaeTaps* enc_taps,
                     const RefinerHook* refiner) const {
    Var g2 = silu(t, d0_.fwd(t, ps, z));  // 2b @ H/4, symmetric to e2 tap
    if (refiner) {
        require(enc_taps, ErrKind::internal, "refiner hook without encoder taps");
        g2 = refiner->apply(t, 0, g2, enc_taps->quarter);
    }
    Var g1 = silu(t, d1_.fwd(t, ps, upsample_nearest2(t, g2)));  // 2b @ H/2
    if (refiner) g1 = refiner->apply(t, 1, g1, enc_taps->half);
    Var g0 = silu(t, d2_.fwd(t, ps, upsample_nearest2(t, g1)));  // b @ H
    return d3_.fwd(t, ps, g0);
}

}  // namespace umic
