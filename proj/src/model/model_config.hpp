#pragma once

#include <cstdint>

#include "json.hpp"

namespace umic {

// Dimensions of the whole compensator stack. The toy defaults exercise
// every pathway; micro() is small enough for finite-difference checks.
struct ModelConfig {
    // VAE (downsample factor 4)
    int vae_base = 32;
    int latent_channels = 4;
    // UNet: 3 resolutions, widths unet_base / 2x / 2x, cross-attention at
    // the two lowest resolutions
    int unet_base = 64;
    int time_dim = 256;
    int heads = 4;
    // text encoder
    int text_dim = 256;
    int text_vocab = 1024;
    int text_layers = 2;
    int text_heads = 4;
    int text_tokens = 77;
    // ComP conditioning MLP (paper-scale value is 1024; toy default 256)
    int comp_mlp_width = 256;
    int adapter_base = 32;
    // schedule
    int timesteps = 1000;
    double beta_start = 1e-4;
    double beta_end = 2e-2;
    uint64_t init_seed = 42;

    static ModelConfig toy() { return ModelConfig{}; }
    static ModelConfig micro();

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);

    int unet_ch(int level) const {  // level 0,1,2
        return level == 0 ? unet_base : unet_base * 2;
    }
};

}  // namespace umic
