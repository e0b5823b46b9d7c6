#include "codec/neural.hpp"

#include <zlib.h>

#include <cmath>

#include "train/optimizer.hpp"

namespace umic {

Var ssim_index(Tape& t, Var a, Var b, int window) {
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    Var mu_a = avg_pool2d(t, a, window, 1);
    Var mu_b = avg_pool2d(t, b, window, 1);
    Var a2 = avg_pool2d(t, mul(t, a, a), window, 1);
    Var b2 = avg_pool2d(t, mul(t, b, b), window, 1);
    Var ab = avg_pool2d(t, mul(t, a, b), window, 1);
    Var var_a = sub(t, a2, mul(t, mu_a, mu_a));
    Var var_b = sub(t, b2, mul(t, mu_b, mu_b));
    Var cov = sub(t, ab, mul(t, mu_a, mu_b));
    Var num = mul(t, scalar_add(t, scalar_mul(t, mul(t, mu_a, mu_b), 2.0), c1),
                  scalar_add(t, scalar_mul(t, cov, 2.0), c2));
    Var den = mul(t, scalar_add(t, add(t, mul(t, mu_a, mu_a), mul(t, mu_b, mu_b)), c1),
                  scalar_add(t, add(t, var_a, var_b), c2));
    // den > 0 by construction; use exp(log) free division via reciprocal
    Var ratio = mul(t, num, exp_op(t, neg(t, log_op(t, den))));
    return mean_all(t, ratio);
}

ToyNeuralModel::ToyNeuralModel(int latent_channels, int base_width, uint64_t seed)
    : latent_channels_(latent_channels), base_width_(base_width) {
    Rng rng(seed);
    enc1_.init(ps_, "enc1", 3, base_width, 3, 2, 1, rng);
    enc2_.init(ps_, "enc2", base_width, latent_channels, 3, 2, 1, rng);
    dec1_.init(ps_, "dec1", latent_channels, base_width, 3, 1, 1, rng);
    dec2_.init(ps_, "dec2", base_width, 3, 3, 1, 1, rng);
    rate_log_scale_ = ps_.add("rate.log_scale", Tensor({int64_t(latent_channels)}));
}

Var ToyNeuralModel::encode(Tape& t, Var x) const {
    Var h = silu(t, enc1_.fwd(t, ps_, x));
    return enc2_.fwd(t, ps_, h);
}

Var ToyNeuralModel::decode(Tape& t, Var y) const {
    Var h = silu(t, dec1_.fwd(t, ps_, upsample_nearest2(t, y)));
    return dec2_.fwd(t, ps_, upsample_nearest2(t, h));
}

Var ToyNeuralModel::rate_bits(Tape& t, Var y) const {
    // discretized logistic: P(y) = sigmoid((y+0.5)/s) - sigmoid((y-0.5)/s)
    const Tensor& yv = t.val(y);
    Var log_s = ps_.var(rate_log_scale_);
    Var inv_s = exp_op(t, neg(t, log_s));
    inv_s = reshape(t, inv_s, {1, yv.shape[1], 1, 1});
    Var hi = sigmoid(t, mul(t, scalar_add(t, y, 0.5), inv_s));
    Var lo = sigmoid(t, mul(t, scalar_add(t, y, -0.5), inv_s));
    Var p = scalar_add(t, sub(t, hi, lo), 1e-9);
    Var bits = scalar_mul(t, log_op(t, p), -1.0 / std::log(2.0));
    return sum_all(t, bits);
}

namespace {

Tensor images_to_tensor(const std::vector<ImageBuffer>& imgs) {
    require(!imgs.empty(), ErrKind::invalid_argument, "empty image batch");
    int h = imgs[0].height, w = imgs[0].width;
    Tensor x({int64_t(imgs.size()), 3, h, w});
    for (size_t b = 0; b < imgs.size(); ++b) {
        require(imgs[b].height == h && imgs[b].width == w, ErrKind::invalid_argument,
                "batch images must share dimensions");
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    x.data[size_t((((int64_t(b) * 3) + c) * h + y) * w + xx)] =
                        imgs[b].at(y, xx, c);
    }
    return x;
}

ImageBuffer tensor_to_image(const Tensor& x, int64_t batch_index) {
    int64_t h = x.shape[2], w = x.shape[3];
    ImageBuffer img(static_cast<int>(h), static_cast<int>(w));
    for (int c = 0; c < 3; ++c)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t xx = 0; xx < w; ++xx) {
                double v = x.data[size_t((((batch_index * 3) + c) * h + y) * w + xx)];
                img.at(int(y), int(xx), c) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            }
    return img;
}

void put_varint(Bytes& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(uint8_t(v) | 0x80);
        v >>= 7;
    }
    out.push_back(uint8_t(v));
}

uint64_t get_varint(ByteReader& r) {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
        uint8_t b = r.u8("varint");
        v |= uint64_t(b & 0x7f) << shift;
        if (!(b & 0x80)) return v;
        shift += 7;
        require(shift < 64, ErrKind::format, "varint overflow");
    }
}

uint64_t zz_encode(int64_t v) { return (uint64_t(v) << 1) ^ uint64_t(v >> 63); }
int64_t zz_decode(uint64_t v) { return int64_t(v >> 1) ^ -int64_t(v & 1); }

}  // namespace

ToyNeuralTrainResult train_toy_neural_codec(const std::vector<ImageBuffer>& dataset,
                                            OptMetric metric, double lambda,
                                            const ToyNeuralTrainConfig& cfg,
                                            const std::string& checkpoint_path) {
    require(!dataset.empty(), ErrKind::data, "toy neural codec: dataset is empty");
    require(metric == OptMetric::psnr || metric == OptMetric::ms_ssim,
            ErrKind::invalid_argument, "toy neural codec metric must be MSE or MS-SSIM");
    require(lambda > 0.0, ErrKind::invalid_argument, "lambda must be positive");

    ToyNeuralModel model(cfg.latent_channels, cfg.base_width, cfg.seed);
    Adam opt({cfg.lr});
    Rng rng(cfg.seed + 1);

    ToyNeuralTrainResult result;
    for (int it = 0; it < cfg.iterations; ++it) {
        std::vector<ImageBuffer> batch;
        for (int b = 0; b < cfg.batch; ++b) {
            const ImageBuffer& src = dataset[rng.uniform_index(dataset.size())];
            ImageBuffer padded = reflect_pad_to_multiple(src, cfg.patch);
            int y0 = padded.height > cfg.patch
                         ? int(rng.uniform_index(uint64_t(padded.height - cfg.patch + 1)))
                         : 0;
            int x0 = padded.width > cfg.patch
                         ? int(rng.uniform_index(uint64_t(padded.width - cfg.patch + 1)))
                         : 0;
            batch.push_back(crop(padded, y0, x0, cfg.patch, cfg.patch));
        }
        Tensor xt = images_to_tensor(batch);
        Tensor noise(std::vector<int64_t>{int64_t(cfg.batch), model.latent_channels(),
                                          cfg.patch / 4, cfg.patch / 4});
        for (double& v : noise.data) v = rng.uniform() - 0.5;

        Tape tape;
        model.params().bind(tape);
        Var x = tape.constant(xt);
        Var y = model.encode(tape, x);
        Var y_noisy = add(tape, y, tape.constant(noise));
        Var x_hat = model.decode(tape, y_noisy);
        double pixels = double(cfg.batch) * cfg.patch * cfg.patch;
        Var rate_bpp = scalar_mul(tape, model.rate_bits(tape, y_noisy), 1.0 / pixels);
        Var dist;
        if (metric == OptMetric::psnr) {
            dist = scalar_mul(tape, mse_loss(tape, x_hat, x), 255.0 * 255.0);
        } else {
            dist = scalar_add(tape, neg(tape, ssim_index(tape, x_hat, x)), 1.0);
        }
        Var loss = add(tape, rate_bpp, scalar_mul(tape, dist, lambda));
        double loss_v = tape.val(loss).item();
        require(std::isfinite(loss_v), ErrKind::state,
                "toy neural codec training diverged (non-finite loss) at iteration " +
                    std::to_string(it));
        result.loss_curve.push_back(loss_v);
        tape.backward(loss);
        opt.step(model.params(), tape);
    }

    int warm = std::min<int>(10, int(result.loss_curve.size()));
    for (int i = 0; i < warm; ++i) result.initial_loss += result.loss_curve[size_t(i)];
    result.initial_loss /= warm;
    for (int i = 0; i < warm; ++i)
        result.final_loss +=
            result.loss_curve[result.loss_curve.size() - 1 - size_t(i)];
    result.final_loss /= warm;

    CodecDescriptor d;
    d.category = CodecCategory::neural;
    d.name = metric == OptMetric::psnr ? "toy-neural-mse" : "toy-neural-msssim";
    d.metric = metric;
    d.quality = lambda;
    result.descriptor = d;

    CheckpointData ckpt;
    ckpt.magic = kToyCodecMagic;
    ckpt.manifest = {{"latent_channels", cfg.latent_channels},
                     {"base_width", cfg.base_width},
                     {"metric", opt_metric_name(metric)},
                     {"lambda", lambda},
                     {"name", d.name},
                     {"seed", cfg.seed},
                     {"iterations", cfg.iterations},
                     {"final_loss", result.final_loss}};
    store_params(model.params(), ckpt);
    save_checkpoint_file(checkpoint_path, ckpt);
    return result;
}

uint16_t register_neural_checkpoint(CodecRegistry& reg, const std::string& path) {
    CheckpointData ckpt = load_checkpoint_file(path, kToyCodecMagic);
    int latent = ckpt.manifest.at("latent_channels").get<int>();
    int base = ckpt.manifest.at("base_width").get<int>();
    auto model = std::make_shared<ToyNeuralModel>(latent, base, 0);
    load_params(model->params(), ckpt);
    CodecDescriptor d;
    d.category = CodecCategory::neural;
    d.name = ckpt.manifest.at("name").get<std::string>();
    d.metric = opt_metric_from_name(ckpt.manifest.at("metric").get<std::string>());
    d.quality = ckpt.manifest.at("lambda").get<double>();
    double lambda = d.quality;
    return reg.register_codec(d, std::make_shared<ToyNeuralCodec>(model, lambda));
}

ToyNeuralCodec::ToyNeuralCodec(std::shared_ptr<ToyNeuralModel> model, double lambda)
    : model_(std::move(model)), lambda_(lambda) {}

std::pair<Bytes, ImageBuffer> ToyNeuralCodec::encode(const ImageBuffer& image,
                                                     const CodecDescriptor& d) {
    image.validate("toy neural input");
    ImageBuffer padded = reflect_pad_to_multiple(image, 4);
    Tape tape(false);
    model_->params().bind(tape);
    Var x = tape.constant(images_to_tensor({padded}));
    Var y = model_->encode(tape, x);
    const Tensor& yv = tape.val(y);
    std::vector<int64_t> q(size_t(yv.numel()));
    for (int64_t i = 0; i < yv.numel(); ++i)
        q[size_t(i)] = std::llround(yv.data[size_t(i)]);

    Bytes raw;
    for (int64_t v : q) put_varint(raw, zz_encode(v));
    uLongf bound = compressBound(uLong(raw.size()));
    Bytes packed(bound);
    int rc = compress2(packed.data(), &bound, raw.data(), uLong(raw.size()),
                       Z_BEST_COMPRESSION);
    require(rc == Z_OK, ErrKind::internal, "zlib compress failed");
    packed.resize(bound);

    ByteWriter w;
    w.str("TN1");
    w.u16(uint16_t(image.height));
    w.u16(uint16_t(image.width));
    w.u32(d.quality_code());
    w.u32(uint32_t(raw.size()));
    w.raw(packed.data(), packed.size());

    // decode loopback through the same path as decode()
    ImageBuffer decoded = decode(w.out, d);
    return {std::move(w.out), std::move(decoded)};
}

ImageBuffer ToyNeuralCodec::decode(const Bytes& payload, const CodecDescriptor& d) {
    ByteReader r(payload);
    require(r.str(3, "magic") == "TN1", ErrKind::format,
            "toy neural payload: bad magic");
    int h = r.u16("height"), w = r.u16("width");
    require(h >= 1 && w >= 1, ErrKind::format, "toy neural payload: bad dimensions");
    uint32_t qcode = r.u32("quality code");
    require(qcode == d.quality_code(), ErrKind::format,
            "toy neural payload quality does not match descriptor");
    uint32_t raw_len = r.u32("raw length");
    Bytes packed = r.raw(r.remaining(), "compressed latents");
    Bytes raw(raw_len);
    uLongf dst = raw_len;
    int rc = uncompress(raw.data(), &dst, packed.data(), uLong(packed.size()));
    require(rc == Z_OK && dst == raw_len, ErrKind::format,
            "toy neural payload: corrupt compressed body");

    int ph = (h + 3) / 4 * 4, pw = (w + 3) / 4 * 4;
    int64_t C = model_->latent_channels();
    Tensor y({1, C, ph / 4, pw / 4});
    ByteReader ints(raw);
    for (int64_t i = 0; i < y.numel(); ++i)
        y.data[size_t(i)] = double(zz_decode(get_varint(ints)));
    require(ints.remaining() == 0, ErrKind::format,
            "toy neural payload: latent count mismatch");

    Tape tape(false);
    model_->params().bind(tape);
    Tensor xt = tape.val(model_->decode(tape, tape.constant(y)));
    ImageBuffer out = tensor_to_image(xt, 0);
    return (ph == h && pw == w) ? out : crop(out, 0, 0, h, w);
}

}  // namespace umic
