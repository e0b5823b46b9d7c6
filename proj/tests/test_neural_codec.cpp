#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "codec/neural.hpp"
#include "codec/registry.hpp"
#include "testutil.hpp"

using namespace umic;

namespace {

std::vector<ImageBuffer> toy_images(int n, uint64_t seed) {
    std::vector<ImageBuffer> out;
    for (int i = 0; i < n; ++i)
        out.push_back(test::make_toy_scene(64, 64, seed + uint64_t(i)).image);
    return out;
}

double psnr_of(const ImageBuffer& a, const ImageBuffer& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.pix.size(); ++i) {
        double d = a.pix[i] - b.pix[i];
        s += d * d;
    }
    double m = s / double(a.pix.size());
    return 10.0 * std::log10(1.0 / m);
}

}  // namespace

TEST_CASE("ssim index sanity") {
    Tape t;
    Rng rng(3);
    Tensor a({1, 3, 16, 16});
    for (double& v : a.data) v = rng.uniform();
    Var va = t.constant(a);
    CHECK(t.val(ssim_index(t, va, va)).item() == doctest::Approx(1.0).epsilon(1e-9));

    Tensor b = a;
    for (double& v : b.data) v = 1.0 - v;
    CHECK(t.val(ssim_index(t, va, t.constant(b))).item() < 0.5);
}

TEST_CASE("training reduces loss and registers a working codec") {
    std::string dir = test::temp_dir("neural_codec");
    auto imgs = toy_images(48, 1000);
    ToyNeuralTrainConfig cfg;
    cfg.iterations = 220;
    cfg.seed = 42;
    auto result = train_toy_neural_codec(imgs, OptMetric::psnr, 0.01, cfg,
                                         dir + "/codec.umtc");
    CHECK(result.final_loss < result.initial_loss);
    CHECK(result.descriptor.name == "toy-neural-mse");
    CHECK(result.descriptor.metric == OptMetric::psnr);
    CHECK(result.descriptor.category == CodecCategory::neural);

    CodecRegistry reg;
    uint16_t id = register_neural_checkpoint(reg, dir + "/codec.umtc");
    ImageBuffer held_out = test::make_toy_scene(64, 64, 555).image;
    auto enc = reg.encode_visual(held_out, id);
    CHECK(enc.payload.byte_count > 0);
    CHECK(enc.decoded.height == 64);

    // deterministic decode, loopback equality
    ImageBuffer dec = reg.decode_visual(enc.payload, id);
    CHECK(dec.pix == enc.decoded.pix);

    // odd sizes survive the pad/crop path
    ImageBuffer odd = test::make_toy_scene(37, 53, 7).image;
    auto enc_odd = reg.encode_visual(odd, id);
    CHECK(enc_odd.decoded.height == 37);
    CHECK(enc_odd.decoded.width == 53);
}

TEST_CASE("higher lambda trades rate for distortion") {
    std::string dir = test::temp_dir("neural_codec_lambda");
    auto imgs = toy_images(48, 2000);
    ToyNeuralTrainConfig cfg;
    cfg.iterations = 260;
    cfg.seed = 42;

    auto lo = train_toy_neural_codec(imgs, OptMetric::psnr, 0.002, cfg, dir + "/lo.umtc");
    auto hi = train_toy_neural_codec(imgs, OptMetric::psnr, 0.05, cfg, dir + "/hi.umtc");

    CodecRegistry reg;
    uint16_t lo_id = register_neural_checkpoint(reg, dir + "/lo.umtc");
    uint16_t hi_id = register_neural_checkpoint(reg, dir + "/hi.umtc");

    ImageBuffer held_out = test::make_toy_scene(64, 64, 3333).image;
    auto el = reg.encode_visual(held_out, lo_id);
    auto eh = reg.encode_visual(held_out, hi_id);
    CHECK(eh.payload.byte_count > el.payload.byte_count);
    CHECK(psnr_of(held_out, eh.decoded) > psnr_of(held_out, el.decoded));
}

TEST_CASE("ms-ssim metric propagates to the descriptor") {
    std::string dir = test::temp_dir("neural_codec_msssim");
    auto imgs = toy_images(16, 3000);
    ToyNeuralTrainConfig cfg;
    cfg.iterations = 30;
    auto result = train_toy_neural_codec(imgs, OptMetric::ms_ssim, 4.0, cfg,
                                         dir + "/m.umtc");
    CHECK(result.descriptor.metric == OptMetric::ms_ssim);
    CHECK(result.descriptor.name == "toy-neural-msssim");

    CodecRegistry reg;
    uint16_t id = register_neural_checkpoint(reg, dir + "/m.umtc");
    CHECK(reg.descriptor(id).metric == OptMetric::ms_ssim);
}

TEST_CASE("empty dataset and divergence are rejected") {
    ToyNeuralTrainConfig cfg;
    cfg.iterations = 5;
    CHECK_THROWS_AS(train_toy_neural_codec({}, OptMetric::psnr, 0.01, cfg, "/tmp/x"),
                    Error);

    // absurd learning rate drives the loss non-finite; the trainer must abort
    auto imgs = toy_images(8, 4000);
    ToyNeuralTrainConfig bad;
    bad.iterations = 400;
    bad.lr = 1e18;
    std::string dir = test::temp_dir("neural_codec_diverge");
    CHECK_THROWS_WITH_AS(
        train_toy_neural_codec(imgs, OptMetric::psnr, 1000.0, bad, dir + "/d.umtc"),
        doctest::Contains("diverged"), Error);
}

TEST_CASE("checkpoint tampering is refused") {
    std::string dir = test::temp_dir("neural_codec_tamper");
    auto imgs = toy_images(8, 5000);
    ToyNeuralTrainConfig cfg;
    cfg.iterations = 10;
    train_toy_neural_codec(imgs, OptMetric::psnr, 0.01, cfg, dir + "/c.umtc");

    Bytes raw = read_file_bytes(dir + "/c.umtc");
    raw[raw.size() / 2] ^= 0x01;
    write_file_bytes(dir + "/c.umtc", raw);
    CodecRegistry reg;
    CHECK_THROWS_WITH_AS(register_neural_checkpoint(reg, dir + "/c.umtc"),
                         doctest::Contains("hash mismatch"), Error);
}
