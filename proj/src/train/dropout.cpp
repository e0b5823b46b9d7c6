#include "train/dropout.hpp"

#include "core/error.hpp"

namespace umic {

ConditionSet condition_dropout(const ConditionSet& cond, const DropoutPolicy& policy,
                               Rng& rng) {
    require(policy.p_comp >= 0.0 && policy.p_comp <= 1.0 && policy.p_conp >= 0.0 &&
                policy.p_conp <= 1.0,
            ErrKind::invalid_argument, "dropout probabilities must be in [0,1]");
    ConditionSet out = cond;
    if (rng.uniform() < policy.p_comp) out.comp.reset();
    if (rng.uniform() < policy.p_conp) out.conp.reset();
    return out;
}

}  // namespace umic
