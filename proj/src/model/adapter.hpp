#pragma once

#include "model/blocks.hpp"
#include "model/model_config.hpp"
#include "model/unet.hpp"

namespace umic {

// Universal visual adapter: encodes the decoded image x_v down to the
// latent resolutions and emits zero-initialized SPADE (gamma, shift) pairs
// for each UNet encoder level. The ComP embedding is average-pooled over
// tokens, passed through a 2-layer SiLU MLP, summed with the transformed
// timestep and injected into every adapter ResBlock.
class AdapterModel {
public:
    AdapterModel(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                 const std::string& prefix = "adapter.");

    // x_v: [B,3,H,W] pixels (H,W multiples of 16); comp_memory: [B,L,D]
    AdapterState fwd(Tape& t, const ParamStore& ps, Var x_v,
                     const std::vector<int>& t_batch, Var comp_memory) const;

private:
    ModelConfig cfg_;
    LinearLayer time1_, time2_;
    LinearLayer comp1_, comp2_;
    Conv2dLayer hint0_, hint1_, hint2_;
    ResBlock res16_, res8_, res4_;
    Conv2dLayer down16_, down8_;
    Conv2dLayer head16_, head8_, head4_;  // zero-init, emit gamma ++ beta
};

}  // namespace umic
