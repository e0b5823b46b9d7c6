#pragma once

#include "core/nn.hpp"
#include "model/model_config.hpp"

namespace umic {

// Conv VAE with downsample factor 4. Encoder features are tapped at three
// resolutions; the decoder exposes the symmetric taps for the refiner.
struct VaeTaps {
    Var full;     // base channels @ H
    Var half;     // 2*base @ H/2
    Var quarter;  // 2*base @ H/4
};

class VaeModel {
public:
    VaeModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
             const std::string& prefix = "vae.");

    // [B,3,H,W] -> moments [B, 2*zc, H/4, W/4] (mean ++ logvar)
    Var encode_moments(Tape& t, const ParamStore& ps, Var x) const;
    Var encode_moments(Tape& t, const ParamStore& ps, Var x, VaeTaps* taps) const;
    Var moments_mean(Tape& t, Var moments) const;
    Var moments_logvar(Tape& t, Var moments) const;

    // Plain decode. When refiner != nullptr its branches are applied at the
    // quarter and half resolution taps (f_in + Branch(concat(f_in, f_e))).
    struct RefinerHook {
        // (tap index 0=quarter,1=half, f_in, f_e) -> replacement feature
        std::function<Var(Tape&, int, Var, Var)> apply;
    };
    Var decode(Tape& t, const ParamStore& ps, Var z,
               const VaeTaps* enc_taps = nullptr,
               const RefinerHook* refiner = nullptr) const;

    int latent_channels() const { return cfg_.latent_channels; }

private:
    ModelConfig cfg_;
    Conv2dLayer e0_, e1_, e2_, e3_;
    Conv2dLayer d0_, d1_, d2_, d3_;
};

}  // namespace umic
