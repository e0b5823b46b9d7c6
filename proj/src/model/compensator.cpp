#include "model/compensator.hpp"

#include <algorithm>
#include <cmath>

#include "text/prompts.hpp"

namespace umic {

double default_guidance_weight(const CodecDescriptor& d) {
    std::string name = d.name;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    double q = CodecDescriptor::canonical_quality(d.quality);
    if (name == "jpeg" && q == 5.0) return 5.0;
    if (name == "hm") return 5.0;
    if (name == "vtm" && (q == 57.0 || q == 52.0 || q == 47.0)) return 5.0;
    if (name == "elic") return 5.0;
    if (name == "cheng20-anchor-mse") return 5.0;
    return 7.5;
}

Tensor image_to_tensor(const ImageBuffer& img) {
    Tensor t({1, 3, img.height, img.width});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                t.data[size_t((int64_t(c) * img.height + y) * img.width + x)] =
                    img.at(y, x, c);
    return t;
}

ImageBuffer tensor_to_image_clamped(const Tensor& t, int64_t b) {
    require(t.rank() == 4 && t.shape[1] == 3, ErrKind::internal,
            "tensor_to_image expects [B,3,H,W]");
    int h = int(t.shape[2]), w = int(t.shape[3]);
    ImageBuffer img(h, w);
    const double* p = t.ptr() + b * 3 * h * w;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = p[(int64_t(c) * h + y) * w + x];
                img.at(y, x, c) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            }
    return img;
}

Compensator::Compensator(const ModelConfig& cfg)
    : cfg_(cfg),
      sched_(NoiseSchedule::linear(cfg.timesteps, cfg.beta_start, cfg.beta_end)) {
    Rng rng(cfg.init_seed);
    text_ = std::make_unique<TextEncoder>(cfg_, ps_, rng);
    vae_ = std::make_unique<VaeModel>(cfg_, ps_, rng);
    unet_ = std::make_unique<UNetModel>(cfg_, ps_, rng);
    adapter_ = std::make_unique<AdapterModel>(cfg_, ps_, rng);
    refiner_ = std::make_unique<RefinerModule>(cfg_, ps_, rng);
    disc_ = std::make_unique<Discriminator>(cfg_, ps_, rng);

    Tensor nc({int64_t(cfg.text_dim)});
    rng.fill_gaussian(nc.ptr(), size_t(nc.numel()));
    nc.scale_(0.02);
    null_conp_ = ps_.add("null.conp", std::move(nc));
    Tensor nm({int64_t(cfg.text_dim)});
    rng.fill_gaussian(nm.ptr(), size_t(nm.numel()));
    nm.scale_(0.02);
    null_comp_ = ps_.add("null.comp", std::move(nm));
}

Var Compensator::encode_conditions(Tape& t, const std::vector<const std::string*>& texts,
                                   bool comp) const {
    return text_->encode_batch(t, ps_, texts, comp ? null_comp_ : null_conp_);
}

Tensor Compensator::text_memory(const std::optional<std::string>& text,
                                bool comp) const {
    Tape t(false);
    ps_.bind(t);
    std::vector<const std::string*> texts = {text ? &*text : nullptr};
    Var mem = encode_conditions(t, texts, comp);
    return t.val(mem);  // [1,L,D]
}

Tensor Compensator::comp_memory_for_point(const CodecDescriptor& d, ConpLevel level,
                                          const CodecRegistry* registry) const {
    if (!registry || registry->contains(d.name, d.quality)) {
        std::string text = render_compression_prompt(d, level).text;
        return text_memory(text, /*comp=*/true);
    }
    // unseen quality: interpolate between the nearest bracketing points
    auto points = registry->points_for(d.name);
    require(points.size() >= 2, ErrKind::not_found,
            "codec " + d.name + " has no registered points to interpolate between");
    double q = CodecDescriptor::canonical_quality(d.quality);
    const CodecDescriptor* lo = nullptr;
    const CodecDescriptor* hi = nullptr;
    for (uint16_t id : points) {
        const CodecDescriptor& pd = registry->descriptor(id);
        if (pd.quality <= q) lo = &pd;
        if (pd.quality >= q && !hi) hi = &pd;
    }
    require(lo && hi, ErrKind::not_found,
            "quality " + CodecDescriptor::format_quality(d.quality) + " of codec " +
                d.name + " is outside the registered range");
    double alpha = interpolation_alpha(q, lo->quality, hi->quality);
    Tensor mem_lo =
        text_memory(render_compression_prompt(*lo, level).text, /*comp=*/true);
    Tensor mem_hi =
        text_memory(render_compression_prompt(*hi, level).text, /*comp=*/true);
    return interpolate_comp_embeddings(mem_lo, mem_hi, alpha);
}

Tensor Compensator::encode_image_mean(const ImageBuffer& img) const {
    ImageBuffer padded = reflect_pad_to_multiple(img, kModelPadMultiple);
    Tape t(false);
    ps_.bind(t);
    Var x = t.constant(image_to_tensor(padded));
    Var moments = vae_->encode_moments(t, ps_, x);
    return t.val(vae_->moments_mean(t, moments));
}

static Tensor stack_two(const Tensor& a, const Tensor& b) {
    require(a.shape == b.shape && a.shape[0] == 1, ErrKind::internal,
            "stack_two expects matching [1,...] tensors");
    std::vector<int64_t> shape = a.shape;
    shape[0] = 2;
    Tensor out(shape);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.numel());
    return out;
}

static Tensor row_of(const Tensor& t, int64_t row) {
    int64_t stride = t.numel() / t.shape[0];
    std::vector<int64_t> shape = t.shape;
    shape[0] = 1;
    Tensor out(shape);
    std::copy(t.data.begin() + row * stride, t.data.begin() + (row + 1) * stride,
              out.data.begin());
    return out;
}

Tensor Compensator::sample(const ImageBuffer& x_v, const SampleConditions& cond,
                           const GuidanceConfig& g, uint64_t seed) const {
    require(g.steps >= 1, ErrKind::invalid_argument, "sampler steps must be >= 1");
    require(std::isfinite(g.w), ErrKind::invalid_argument, "guidance weight not finite");

    ImageBuffer padded = reflect_pad_to_multiple(x_v, kModelPadMultiple);
    Tensor xv_t = image_to_tensor(padded);
    Tensor xv2 = stack_two(xv_t, xv_t);

    // conditioning memories are timestep-independent; compute once
    Tensor conp_mem = text_memory(cond.conp_text, /*comp=*/false);
    Tensor comp_mem;
    if (cond.comp_memory) {
        const Tensor& m = *cond.comp_memory;
        comp_mem = m.rank() == 2
                       ? m.reshaped({1, m.shape[0], m.shape[1]})
                       : m;
    } else {
        comp_mem = text_memory(cond.comp_text, /*comp=*/true);
    }
    Tensor null_conp_mem = text_memory(std::nullopt, /*comp=*/false);
    Tensor null_comp_mem = text_memory(std::nullopt, /*comp=*/true);
    Tensor conp2 = stack_two(conp_mem, null_conp_mem);
    Tensor comp2 = stack_two(comp_mem, null_comp_mem);

    int64_t zc = cfg_.latent_channels;
    int64_t lh = padded.height / 4, lw = padded.width / 4;
    Rng rng(seed);
    Tensor z({1, zc, lh, lw});
    rng.fill_gaussian(z.ptr(), size_t(z.numel()));

    std::vector<int> ladder = ddim_timesteps(sched_.timesteps(), g.steps);
    for (size_t i = 0; i < ladder.size(); ++i) {
        int t_cur = ladder[i];
        int t_prev = i + 1 < ladder.size() ? ladder[i + 1] : 0;

        Tape tape(false);
        ps_.bind(tape);
        Var z_in = tape.constant(stack_two(z, z));
        Var xv_var = tape.constant(xv2);
        Var conp_var = tape.constant(conp2);
        Var comp_var = tape.constant(comp2);
        std::vector<int> t_batch = {t_cur, t_cur};
        AdapterState ad = adapter_->fwd(tape, ps_, xv_var, t_batch, comp_var);
        Var eps = unet_->predict(tape, ps_, z_in, t_batch, conp_var, ad);
        const Tensor& eps_v = tape.val(eps);
        Tensor eps_hat = cfg_combine(row_of(eps_v, 0), row_of(eps_v, 1), g.w);
        z = ddim_step(z, t_cur, t_prev, eps_hat, g.eta, sched_, &rng);
    }
    require(z.all_finite(), ErrKind::internal, "sampler produced non-finite latent");
    return z;
}

ImageBuffer Compensator::decode_latent(const Tensor& z0, const ImageBuffer& x_v,
                                       bool use_refiner, int out_h, int out_w) const {
    ImageBuffer padded = reflect_pad_to_multiple(x_v, kModelPadMultiple);
    Tape t(false);
    ps_.bind(t);
    Var z = t.constant(z0);
    Var out;
    if (use_refiner) {
        Var xv_var = t.constant(image_to_tensor(padded));
        VaeTaps taps;
        vae_->encode_moments(t, ps_, xv_var, &taps);
        auto hook = refiner_->hook(ps_);
        out = vae_->decode(t, ps_, z, &taps, &hook);
    } else {
        out = vae_->decode(t, ps_, z);
    }
    ImageBuffer img = tensor_to_image_clamped(t.val(out), 0);
    if (img.height != out_h || img.width != out_w)
        img = crop(img, 0, 0, out_h, out_w);
    return img;
}

Tensor Compensator::predict_noise_once(const Tensor& z_t,
                                       const std::vector<int>& t_batch,
                                       const std::vector<const std::string*>& conp,
                                       const std::vector<const std::string*>& comp,
                                       const Tensor& x_v) const {
    Tape t(false);
    ps_.bind(t);
    Var z = t.constant(z_t);
    Var xv = t.constant(x_v);
    Var conp_mem = encode_conditions(t, conp, /*comp=*/false);
    Var comp_mem = encode_conditions(t, comp, /*comp=*/true);
    AdapterState ad = adapter_->fwd(t, ps_, xv, t_batch, comp_mem);
    return t.val(unet_->predict(t, ps_, z, t_batch, conp_mem, ad));
}

void Compensator::save(const std::string& path,
                       const nlohmann::json& run_manifest) const {
    CheckpointData ckpt;
    ckpt.magic = kDiffusionMagic;
    ckpt.manifest = {{"model", cfg_.to_json()}, {"run", run_manifest}};
    store_params(ps_, ckpt);
    save_checkpoint_file(path, ckpt);
}

std::unique_ptr<Compensator> Compensator::load(const std::string& path,
                                               nlohmann::json* run_manifest,
                                               CheckpointData* raw) {
    CheckpointData ckpt = load_checkpoint_file(path, kDiffusionMagic);
    ModelConfig cfg = ModelConfig::from_json(ckpt.manifest.at("model"));
    auto model = std::make_unique<Compensator>(cfg);
    load_params(model->params(), ckpt);
    if (run_manifest) *run_manifest = ckpt.manifest.value("run", nlohmann::json::object());
    if (raw) *raw = std::move(ckpt);
    return model;
}

}  // namespace umic
