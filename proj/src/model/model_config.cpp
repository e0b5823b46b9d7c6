#include "model/model_config.hpp"

namespace umic {

ModelConfig ModelConfig::micro() {
    ModelConfig c;
    c.vae_base = 6;
    c.latent_channels = 2;
    c.unet_base = 6;
    c.time_dim = 12;
    c.heads = 2;
    c.text_dim = 8;
    c.text_vocab = 16;
    c.text_layers = 1;
    c.text_heads = 2;
    c.text_tokens = 4;
    c.comp_mlp_width = 8;
    c.adapter_base = 4;
    c.timesteps = 20;
    return c;
}

nlohmann::json ModelConfig::to_json() const {
    return {{"vae_base", vae_base},
            {"latent_channels", latent_channels},
            {"unet_base", unet_base},
            {"time_dim", time_dim},
            {"heads", heads},
            {"text_dim", text_dim},
            {"text_vocab", text_vocab},
            {"text_layers", text_layers},
            {"text_heads", text_heads},
            {"text_tokens", text_tokens},
            {"comp_mlp_width", comp_mlp_width},
            {"adapter_base", adapter_base},
            {"timesteps", timesteps},
            {"beta_start", beta_start},
            {"beta_end", beta_end},
            {"init_seed", init_seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.vae_base = j.at("vae_base").get<int>();
    c.latent_channels = j.at("latent_channels").get<int>();
    c.unet_base = j.at("unet_base").get<int>();
    c.time_dim = j.at("time_dim").get<int>();
    c.heads = j.at("heads").get<int>();
    c.text_dim = j.at("text_dim").get<int>();
    c.text_vocab = j.at("text_vocab").get<int>();
    c.text_layers = j.at("text_layers").get<int>();
    c.text_heads = j.at("text_heads").get<int>();
    c.text_tokens = j.at("text_tokens").get<int>();
    c.comp_mlp_width = j.at("comp_mlp_width").get<int>();
    c.adapter_base = j.at("adapter_base").get<int>();
    c.timesteps = j.at("timesteps").get<int>();
    c.beta_start = j.at("beta_start").get<double>();
    c.beta_end = j.at("beta_end").get<double>();
    c.init_seed = j.at("init_seed").get<uint64_t>();
    return c;
}

}  // namespace umic
