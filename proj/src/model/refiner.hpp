#pragma once

#include "model/blocks.hpp"
#include "model/model_config.hpp"
#include "model/vae.hpp"

namespace umic {

// Decoder refiner: at the two lowest-resolution symmetric VAE layer pairs,
// concat(f_in, f_e) runs through 2 ResBlocks and an attention block, the
// zero-initialized output merges back into f_in through the residual
// connection.
class RefinerModule {
public:
    RefinerModule(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                  const std::string& prefix = "refiner.");

    // tap 0: quarter resolution, tap 1: half resolution
    Var apply(Tape& t, const ParamStore& ps, int tap, Var f_in, Var f_e) const;

    VaeModel::RefinerHook hook(const ParamStore& ps) const;

private:
    struct Branch {
        Conv2dLayer entry;
        ResBlock rb1, rb2;
        SelfAttnBlock attn;
        Conv2dLayer out_zero;
    };
    Branch taps_[2];
};

// Patch discriminator with hinge loss, VQGAN style.
class Discriminator {
public:
    Discriminator(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                  const std::string& prefix = "disc.");
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;  // logits [B,1,h,w]

private:
    Conv2dLayer c1_, c2_, c3_;
};

// Pluggable perceptual-feature distance.
class PerceptualPort {
public:
    virtual ~PerceptualPort() = default;
    virtual Var distance(Tape& t, Var a, Var b) const = 0;
};

// Default port: L2 distance between intermediate features of the frozen
// toy VAE encoder.
class VaeFeaturePerceptual : public PerceptualPort {
public:
    VaeFeaturePerceptual(const VaeModel* vae, const ParamStore* ps)
        : vae_(vae), ps_(ps) {}
    Var distance(Tape& t, Var a, Var b) const override;

private:
    const VaeModel* vae_;
    const ParamStore* ps_;
};

struct Stage2LossWeights {
    double l1 = 1.0;
    double perc = 0.5;
    double adv = 0.1;
};

struct Stage2LossParts {
    double total = 0.0;
    double l1 = 0.0;
    double perc = 0.0;
    double adv = 0.0;
};

// Composite generator-side loss: l1*L1 + perc*Perceptual + adv*(-mean D(x_hat)).
// Pass disc == nullptr (or adv weight 0) to train without the adversary.
Var stage2_loss(Tape& t, Var x_hat, Var x, const PerceptualPort* perceptual,
                const Discriminator* disc, const ParamStore* disc_ps,
                const Stage2LossWeights& w, Stage2LossParts* parts);

}  // namespace umic
