#pragma once

#include <memory>
#include <optional>

#include "codec/descriptor.hpp"
#include "codec/registry.hpp"
#include "model/adapter.hpp"
#include "model/checkpoint.hpp"
#include "model/refiner.hpp"
#include "model/schedule.hpp"
#include "model/text_encoder.hpp"
#include "model/unet.hpp"
#include "model/vae.hpp"

namespace umic {

struct GuidanceConfig {
    double w = 7.5;
    double eta = 0.0;
    int steps = 50;
};

// Test-time guidance weights: 5.0 for the operating points the paper lists,
// 7.5 otherwise.
double default_guidance_weight(const CodecDescriptor& d);

// Images entering the model are reflect-padded to this multiple (VAE /4 and
// adapter /4 below it).
inline constexpr int kModelPadMultiple = 16;

struct SampleConditions {
    std::optional<std::string> conp_text;  // nullopt => null sentinel
    std::optional<std::string> comp_text;
    std::optional<Tensor> comp_memory;     // [L,D]; overrides comp_text
};

// The universal perception compensator: toy latent diffusion with the
// visual adapter, two-condition classifier-free guidance and DDIM sampling.
class Compensator {
public:
    explicit Compensator(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const NoiseSchedule& schedule() const { return sched_; }
    ParamStore& params() { return ps_; }
    const ParamStore& params() const { return ps_; }

    TextEncoder& text() { return *text_; }
    VaeModel& vae() { return *vae_; }
    UNetModel& unet() { return *unet_; }
    AdapterModel& adapter() { return *adapter_; }
    RefinerModule& refiner() { return *refiner_; }
    Discriminator& discriminator() { return *disc_; }
    int null_conp_param() const { return null_conp_; }
    int null_comp_param() const { return null_comp_; }

    // [B,L,D] memories; nullptr rows use the matching null sentinel.
    Var encode_conditions(Tape& t, const std::vector<const std::string*>& texts,
                          bool comp) const;

    // Memory of one optional text as a plain tensor [1,L,D] (inference).
    Tensor text_memory(const std::optional<std::string>& text, bool comp) const;

    // ComP memory for an operating point; when the exact point is not
    // registered but two same-codec neighbors bracket the quality, their
    // memories are linearly interpolated (unseen-bitrate adaptation).
    Tensor comp_memory_for_point(const CodecDescriptor& d, ConpLevel level,
                                 const CodecRegistry* registry) const;

    // Deterministic VAE latent (distribution mean) of a [0,1] image.
    Tensor encode_image_mean(const ImageBuffer& img) const;  // [1,zc,h,w]

    // DDIM sampling conditioned on x_v; deterministic for fixed seed when
    // eta == 0. Returns z0 with shape [1,zc,h,w] for the padded image.
    Tensor sample(const ImageBuffer& x_v, const SampleConditions& cond,
                  const GuidanceConfig& g, uint64_t seed) const;

    // Decode a sampled latent, optionally through the decoder refiner, and
    // crop to out_h x out_w.
    ImageBuffer decode_latent(const Tensor& z0, const ImageBuffer& x_v,
                              bool use_refiner, int out_h, int out_w) const;

    // Single batched denoiser evaluation (training/tests).
    Tensor predict_noise_once(const Tensor& z_t, const std::vector<int>& t_batch,
                              const std::vector<const std::string*>& conp,
                              const std::vector<const std::string*>& comp,
                              const Tensor& x_v) const;

    void save(const std::string& path, const nlohmann::json& run_manifest) const;
    static std::unique_ptr<Compensator> load(const std::string& path,
                                             nlohmann::json* run_manifest = nullptr,
                                             CheckpointData* raw = nullptr);

private:
    ModelConfig cfg_;
    NoiseSchedule sched_;
    ParamStore ps_;
    std::unique_ptr<TextEncoder> text_;
    std::unique_ptr<VaeModel> vae_;
    std::unique_ptr<UNetModel> unet_;
    std::unique_ptr<AdapterModel> adapter_;
    std::unique_ptr<RefinerModule> refiner_;
    std::unique_ptr<Discriminator> disc_;
    int null_conp_ = -1;
    int null_comp_ = -1;
};

Tensor image_to_tensor(const ImageBuffer& img);                   // [1,3,H,W]
ImageBuffer tensor_to_image_clamped(const Tensor& t, int64_t b);  // clamp [0,1]

}  // namespace umic
