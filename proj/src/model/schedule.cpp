#include "model/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace umic {

NoiseSchedule NoiseSchedule::linear(int timesteps, double beta_start, double beta_end) {
    require(timesteps >= 1, ErrKind::invalid_argument, "timesteps must be >= 1");
    std::vector<double> betas(size_t(timesteps));
    for (int i = 0; i < timesteps; ++i)
        betas[size_t(i)] =
            timesteps == 1
                ? beta_start
                : beta_start + (beta_end - beta_start) * double(i) / double(timesteps - 1);
    return from_betas(std::move(betas));
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
    NoiseSchedule s;
    s.betas_ = std::move(betas);
    s.alpha_bar_.resize(s.betas_.size() + 1);
    s.alpha_bar_[0] = 1.0;
    for (size_t i = 0; i < s.betas_.size(); ++i) {
        double b = s.betas_[i];
        require(b > 0.0 && b < 1.0, ErrKind::invalid_argument, "beta outside (0,1)");
        s.alpha_bar_[i + 1] = s.alpha_bar_[i] * (1.0 - b);
        require(s.alpha_bar_[i + 1] < s.alpha_bar_[i], ErrKind::internal,
                "alpha_bar must be strictly decreasing");
    }
    return s;
}

double NoiseSchedule::beta(int t) const {
    require(t >= 1 && t <= timesteps(), ErrKind::invalid_argument, "beta index");
    return betas_[size_t(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
    require(t >= 0 && t <= timesteps(), ErrKind::invalid_argument,
            "alpha_bar index out of range");
    return alpha_bar_[size_t(t)];
}

Tensor forward_diffuse(const Tensor& z0, int t, const Tensor& eps,
                       const NoiseSchedule& sched) {
    require(z0.shape == eps.shape, ErrKind::invalid_argument,
            "forward_diffuse shape mismatch");
    double abar = sched.alpha_bar(t);
    double a = std::sqrt(abar), b = std::sqrt(1.0 - abar);
    Tensor out(z0.shape);
    for (int64_t i = 0; i < z0.numel(); ++i)
        out.data[size_t(i)] = a * z0.data[size_t(i)] + b * eps.data[size_t(i)];
    return out;
}

Tensor ddim_step(const Tensor& z_t, int t, int t_prev, const Tensor& eps_hat,
                 double eta, const NoiseSchedule& sched, Rng* rng) {
    require(t > t_prev && t_prev >= 0, ErrKind::invalid_argument,
            "ddim_step needs t > t_prev >= 0");
    require(z_t.shape == eps_hat.shape, ErrKind::invalid_argument,
            "ddim_step shape mismatch");
    double at = sched.alpha_bar(t);
    double ap = sched.alpha_bar(t_prev);
    require(at > 0.0, ErrKind::internal, "alpha_bar(t) must be positive");

    double sqrt_at = std::sqrt(at);
    double sqrt_om_at = std::sqrt(1.0 - at);
    double sigma = 0.0;
    if (eta != 0.0 && t_prev > 0) {
        sigma = eta * std::sqrt((1.0 - ap) / (1.0 - at)) *
                std::sqrt(1.0 - at / ap);
    }
    double dir_coef_sq = 1.0 - ap - sigma * sigma;
    double dir_coef = dir_coef_sq > 0.0 ? std::sqrt(dir_coef_sq) : 0.0;
    double sqrt_ap = std::sqrt(ap);

    Tensor out(z_t.shape);
    for (int64_t i = 0; i < z_t.numel(); ++i) {
        double z0_hat = (z_t.data[size_t(i)] - sqrt_om_at * eps_hat.data[size_t(i)]) /
                        sqrt_at;
        double v = sqrt_ap * z0_hat + dir_coef * eps_hat.data[size_t(i)];
        if (sigma > 0.0) v += sigma * rng->gaussian();
        out.data[size_t(i)] = v;
    }
    return out;
}

std::vector<int> ddim_timesteps(int timesteps, int steps) {
    require(steps >= 1, ErrKind::invalid_argument, "steps must be >= 1");
    steps = std::min(steps, timesteps);
    std::vector<int> ts;
    for (int i = steps; i >= 1; --i) {
        int t = int(std::llround(double(timesteps) * double(i) / double(steps)));
        if (t < 1) t = 1;
        if (ts.empty() || ts.back() != t) ts.push_back(t);
    }
    return ts;  // decreasing, ends just above the implicit t=0
}

Tensor cfg_combine(const Tensor& eps_cond, const Tensor& eps_uncond, double w) {
    require(eps_cond.shape == eps_uncond.shape, ErrKind::invalid_argument,
            "cfg_combine shape mismatch");
    require(std::isfinite(w), ErrKind::invalid_argument, "guidance weight not finite");
    Tensor out(eps_cond.shape);
    cfg_combine_span(eps_cond.ptr(), eps_uncond.ptr(), w, out.ptr(),
                     size_t(out.numel()));
    return out;
}

Tensor interpolate_comp_embeddings(const Tensor& a, const Tensor& b, double alpha) {
    require(a.shape == b.shape, ErrKind::invalid_argument,
            "interpolate_comp_embeddings shape mismatch");
    require(alpha >= 0.0 && alpha <= 1.0, ErrKind::invalid_argument,
            "alpha outside [0,1]");
    Tensor out(a.shape);
    for (int64_t i = 0; i < a.numel(); ++i)
        out.data[size_t(i)] =
            (1.0 - alpha) * a.data[size_t(i)] + alpha * b.data[size_t(i)];
    return out;
}

double interpolation_alpha(double quality, double quality_lo, double quality_hi) {
    require(quality_hi > quality_lo, ErrKind::invalid_argument,
            "interpolation anchors must satisfy hi > lo");
    double alpha = (quality - quality_lo) / (quality_hi - quality_lo);
    require(alpha >= 0.0 && alpha <= 1.0, ErrKind::invalid_argument,
            "quality outside the anchor interval");
    return alpha;
}

}  // namespace umic
