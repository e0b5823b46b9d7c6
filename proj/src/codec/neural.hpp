#pragma once

#include <string>
#include <vector>

#include "codec/registry.hpp"
#include "core/nn.hpp"
#include "model/checkpoint.hpp"

namespace umic {

// Differentiable single-scale SSIM (uniform window, valid padding) on
// [0,1]-range NCHW tensors; returns the scalar mean.
Var ssim_index(Tape& t, Var a, Var b, int window = 8);

// 4-layer conv autoencoder (2 stride-2 encoder convs, 2 upsample+conv
// decoder layers) with a factorized discretized-logistic entropy model.
// Training adds uniform noise to the latent as the quantization proxy;
// inference rounds.
class ToyNeuralModel {
public:
    ToyNeuralModel(int latent_channels, int base_width, uint64_t seed);

    Var encode(Tape& t, Var x) const;        // [B,3,H,W] -> [B,C,H/4,W/4]
    Var decode(Tape& t, Var y) const;        // inverse spatial mapping
    Var rate_bits(Tape& t, Var y) const;     // total bits under the entropy model

    ParamStore& params() { return ps_; }
    const ParamStore& params() const { return ps_; }
    int latent_channels() const { return latent_channels_; }
    int base_width() const { return base_width_; }

private:
    int latent_channels_;
    int base_width_;
    ParamStore ps_;
    Conv2dLayer enc1_, enc2_, dec1_, dec2_;
    int rate_log_scale_ = -1;  // per-channel logistic scale (log domain)
};

struct ToyNeuralTrainConfig {
    int latent_channels = 8;
    int base_width = 32;
    int iterations = 400;
    int batch = 8;
    int patch = 64;
    double lr = 1e-3;
    uint64_t seed = 42;
};

struct ToyNeuralTrainResult {
    CodecDescriptor descriptor;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_curve;
};

// enum {MSE, MS-SSIM} from the public surface maps onto the descriptor
// metric as PSNR / MS-SSIM.
ToyNeuralTrainResult train_toy_neural_codec(const std::vector<ImageBuffer>& dataset,
                                            OptMetric metric, double lambda,
                                            const ToyNeuralTrainConfig& cfg,
                                            const std::string& checkpoint_path);

// Loads a UMTC1 checkpoint and registers its operating point.
uint16_t register_neural_checkpoint(CodecRegistry& reg, const std::string& path);

class ToyNeuralCodec : public BasicCodec {
public:
    ToyNeuralCodec(std::shared_ptr<ToyNeuralModel> model, double lambda);

    std::pair<Bytes, ImageBuffer> encode(const ImageBuffer& image,
                                         const CodecDescriptor& d) override;
    ImageBuffer decode(const Bytes& payload, const CodecDescriptor& d) override;

private:
    std::shared_ptr<ToyNeuralModel> model_;
    double lambda_;
};

}  // namespace umic
