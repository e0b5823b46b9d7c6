#include "model/refiner.hpp"

namespace umic {

RefinerModule::RefinerModule(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                             const std::string& prefix) {
    int ch = 2 * cfg.vae_base;  // both tapped levels carry 2*base channels
    for (int tap = 0; tap < 2; ++tap) {
        std::string tp = prefix + "tap" + std::to_string(tap);
        Branch& b = taps_[tap];
        b.entry.init(ps, tp + ".entry", 2 * ch, ch, 3, 1, 1, rng);
        b.rb1.init(ps, tp + ".rb1", ch, ch, 0, rng);
        b.rb2.init(ps, tp + ".rb2", ch, ch, 0, rng);
        b.attn.init(ps, tp + ".attn", ch, 4, rng);
        b.out_zero.init(ps, tp + ".out", ch, ch, 3, 1, 1, rng, /*zero=*/true);
    }
}

Var RefinerModule::apply(Tape& t, const ParamStore& ps, int tap, Var f_in,
                         Var f_e) const {
    require(tap == 0 || tap == 1, ErrKind::internal, "refiner tap index");
    const Tensor& in_v = t.val(f_in);
    const Tensor& e_v = t.val(f_e);
    require(in_v.shape == e_v.shape, ErrKind::invalid_argument,
            "refiner: f_in and f_e dimensions must match");
    const Branch& b = taps_[tap];
    Var h = silu(t, b.entry.fwd(t, ps, concat(t, {f_in, f_e}, 1)));
    h = b.rb1.fwd(t, ps, h, Var{});
    h = b.rb2.fwd(t, ps, h, Var{});
    h = b.attn.fwd(t, ps, h);
    return add(t, f_in, b.out_zero.fwd(t, ps, h));
}

VaeModel::RefinerHook RefinerModule::hook(const ParamStore& ps) const {
    VaeModel::RefinerHook h;
    h.apply = [this, &ps](Tape& t, int tap, Var f_in, Var f_e) {
        return apply(t, ps, tap, f_in, f_e);
    };
    return h;
}

Discriminator::Discriminator(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                             const std::string& prefix) {
    int b = cfg.vae_base;
    c1_.init(ps, prefix + "c1", 3, b, 3, 2, 1, rng);
    c2_.init(ps, prefix + "c2", b, 2 * b, 3, 2, 1, rng);
    c3_.init(ps, prefix + "c3", 2 * b, 1, 3, 1, 1, rng);
}

Var Discriminator::fwd(Tape& t, const ParamStore& ps, Var x) const {
    Var h = leaky_relu(t, c1_.fwd(t, ps, x), 0.2);
    h = leaky_relu(t, c2_.fwd(t, ps, h), 0.2);
    return c3_.fwd(t, ps, h);
}

Var VaeFeaturePerceptual::distance(Tape& t, Var a, Var b) const {
    VaeTaps ta, tb;
    vae_->encode_moments(t, *ps_, a, &ta);
    vae_->encode_moments(t, *ps_, b, &tb);
    Var d_half = mse_loss(t, ta.half, tb.half);
    Var d_quarter = mse_loss(t, ta.quarter, tb.quarter);
    return add(t, d_half, d_quarter);
}

Var stage2_loss(Tape& t, Var x_hat, Var x, const PerceptualPort* perceptual,
                const Discriminator* disc, const ParamStore* disc_ps,
                const Stage2LossWeights& w, Stage2LossParts* parts) {
    require(t.val(x_hat).shape == t.val(x).shape, ErrKind::invalid_argument,
            "stage2_loss shape mismatch");
    Var l1 = l1_loss(t, x_hat, x);
    Var total = scalar_mul(t, l1, w.l1);
    double perc_v = 0.0, adv_v = 0.0;
    if (perceptual && w.perc != 0.0) {
        Var p = perceptual->distance(t, x_hat, x);
        perc_v = t.val(p).item();
        total = add(t, total, scalar_mul(t, p, w.perc));
    }
    if (disc && disc_ps && w.adv != 0.0) {
        Var g = neg(t, mean_all(t, disc->fwd(t, *disc_ps, x_hat)));
        adv_v = t.val(g).item();
        total = add(t, total, scalar_mul(t, g, w.adv));
    }
    if (parts) {
        parts->l1 = t.val(l1).item();
        parts->perc = perc_v;
        parts->adv = adv_v;
        parts->total = t.val(total).item();
    }
    return total;
}

}  // namespace umic
