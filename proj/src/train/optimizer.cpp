#include "train/optimizer.hpp"

#include <cmath>

namespace umic {

double Adam::step(ParamStore& ps, Tape& tape) {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    double norm_sq = 0.0;
    for (Param& p : ps.all()) {
        if (!p.trainable || !p.var.valid()) continue;
        const Tensor& g = tape.grad(p.var);
        if (!p.adam_init) {
            p.adam_m = Tensor(p.value.shape);
            p.adam_v = Tensor(p.value.shape);
            p.adam_init = true;
        }
        for (int64_t i = 0; i < g.numel(); ++i) {
            double gv = g.data[size_t(i)];
            norm_sq += gv * gv;
            double m = p.adam_m.data[size_t(i)] =
                cfg_.beta1 * p.adam_m.data[size_t(i)] + (1.0 - cfg_.beta1) * gv;
            double v = p.adam_v.data[size_t(i)] =
                cfg_.beta2 * p.adam_v.data[size_t(i)] + (1.0 - cfg_.beta2) * gv * gv;
            double mh = m / bc1;
            double vh = v / bc2;
            p.value.data[size_t(i)] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
        }
    }
    return std::sqrt(norm_sq);
}

}  // namespace umic
