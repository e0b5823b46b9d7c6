#pragma once

#include <array>

#include "model/blocks.hpp"
#include "model/model_config.hpp"

namespace umic {

// Per-resolution SPADE scale/shift pairs produced by the visual adapter,
// matching the UNet encoder block outputs (level 0 highest resolution).
struct AdapterState {
    std::array<std::pair<Var, Var>, 3> mods;  // (gamma, beta)
};

// 3-resolution UNet denoiser. ConP conditions through cross-attention at
// the two lowest resolutions; the adapter modulates each encoder block
// output through SPADE; the timestep enters every ResBlock.
class UNetModel {
public:
    UNetModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
              const std::string& prefix = "unet.");

    Var time_embedding(Tape& t, const ParamStore& ps,
                       const std::vector<int>& t_batch) const;  // [B, time_dim]

    Var predict(Tape& t, const ParamStore& ps, Var z_t,
                const std::vector<int>& t_batch, Var conp_memory,
                const AdapterState& adapter) const;

private:
    ModelConfig cfg_;
    LinearLayer time1_, time2_;
    Conv2dLayer in_conv_;
    ResBlock enc1_;
    Conv2dLayer down1_;
    ResBlock enc2_;
    CrossAttnBlock xattn2_;
    Conv2dLayer down2_;
    ResBlock mid1_;
    CrossAttnBlock xattn_mid_;
    ResBlock mid2_;
    Conv2dLayer up1_;
    ResBlock dec2_;
    CrossAttnBlock xattn_dec2_;
    Conv2dLayer up2_;
    ResBlock dec1_;
    GroupNormLayer out_gn_;
    Conv2dLayer out_conv_;
};

}  // namespace umic
