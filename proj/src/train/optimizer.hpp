#pragma once

#include "core/nn.hpp"
#include "core/tape.hpp"

namespace umic {

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update from the gradients bound on the tape. Only
    // trainable params move. Returns the global grad L2 norm.
    double step(ParamStore& ps, Tape& tape);

    int64_t steps_taken() const { return t_; }
    void set_steps_taken(int64_t t) { t_ = t; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    AdamConfig cfg_;
    int64_t t_ = 0;
};

}  // namespace umic
