#pragma once

#include <optional>
#include <string>

#include "core/rng.hpp"

namespace umic {

// Text conditions entering the denoiser; nullopt selects the learned null
// sentinel for that slot.
struct ConditionSet {
    std::optional<std::string> conp;
    std::optional<std::string> comp;
};

// Independent per-condition dropout to the null sentinels. Joint-empty
// probability is p_comp * p_conp (1% at the 0.10/0.10 defaults).
struct DropoutPolicy {
    double p_comp = 0.10;
    double p_conp = 0.10;
};

// Draw order: comp first, then conp.
ConditionSet condition_dropout(const ConditionSet& cond, const DropoutPolicy& policy,
                               Rng& rng);

}  // namespace umic
