#pragma once

#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace umic {

// Variance-preserving forward process with a linear beta schedule.
// alpha_bar(0) == 1 so t=0 is the identity boundary.
class NoiseSchedule {
public:
    static NoiseSchedule linear(int timesteps, double beta_start = 1e-4,
                                double beta_end = 2e-2);

    int timesteps() const { return int(betas_.size()); }
    double beta(int t) const;       // t in [1, T]
    double alpha_bar(int t) const;  // t in [0, T]
    const std::vector<double>& betas() const { return betas_; }

    static NoiseSchedule from_betas(std::vector<double> betas);

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bar_;  // index 0..T
};

// z_t = sqrt(abar_t) z0 + sqrt(1-abar_t) eps
Tensor forward_diffuse(const Tensor& z0, int t, const Tensor& eps,
                       const NoiseSchedule& sched);

// One DDIM update from t to t_prev (t > t_prev >= 0). eta scales the
// stochastic part; eta=0 is fully deterministic.
Tensor ddim_step(const Tensor& z_t, int t, int t_prev, const Tensor& eps_hat,
                 double eta, const NoiseSchedule& sched, Rng* rng = nullptr);

// Decreasing timestep ladder for a sampling run (first entry near T, last
// entry > 0); the implicit final target is t=0.
std::vector<int> ddim_timesteps(int timesteps, int steps);

// eps_tilde = w * eps_cond + (1 - w) * eps_uncond
template <typename T>
void cfg_combine_span(const T* eps_cond, const T* eps_uncond, T w, T* out, size_t n) {
    for (size_t i = 0; i < n; ++i)
        out[i] = w * eps_cond[i] + (T(1) - w) * eps_uncond[i];
}

Tensor cfg_combine(const Tensor& eps_cond, const Tensor& eps_uncond, double w);

// (1-alpha) * a + alpha * b, alpha in [0,1]
Tensor interpolate_comp_embeddings(const Tensor& a, const Tensor& b, double alpha);
// linear map of a quality indicator onto [0,1] between two anchors
double interpolation_alpha(double quality, double quality_lo, double quality_hi);

}  // namespace umic
