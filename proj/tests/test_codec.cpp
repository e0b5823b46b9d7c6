#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "codec/external.hpp"
#include "codec/registry.hpp"
#include "codec/toy_dct.hpp"
#include "testutil.hpp"

using namespace umic;

namespace {

double mse(const ImageBuffer& a, const ImageBuffer& b) {
    REQUIRE(a.same_shape(b));
    double s = 0.0;
    for (size_t i = 0; i < a.pix.size(); ++i) {
        double d = a.pix[i] - b.pix[i];
        s += d * d;
    }
    return s / double(a.pix.size());
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.pix.size(); ++i)
        m = std::max(m, std::fabs(a.pix[i] - b.pix[i]));
    return m;
}

CodecDescriptor dct_desc(double qf) {
    CodecDescriptor d;
    d.category = CodecCategory::traditional;
    d.name = "toy-dct";
    d.metric = OptMetric::psnr;
    d.quality = qf;
    return d;
}

}  // namespace

TEST_CASE("registry round trip and duplicate rejection") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    CHECK(reg.count() == 4);
    CHECK(reg.contains("toy-dct", 5));
    uint16_t id = reg.find("toy-dct", 5);
    CHECK(reg.descriptor(id).quality == 5.0);

    auto listed = reg.list_codecs();
    bool found = false;
    for (const auto& d : listed)
        if (d.name == "toy-dct" && d.quality == 5.0) found = true;
    CHECK(found);

    CHECK_THROWS_AS(reg.register_codec(dct_desc(5), std::make_shared<ToyDctCodec>()),
                    Error);
    CHECK_THROWS_AS(reg.find("toy-dct", 42), Error);
    CHECK_THROWS_AS((void)reg.descriptor(uint16_t(200)), Error);

    auto points = reg.points_for("toy-dct");
    REQUIRE(points.size() == 4);
    CHECK(reg.descriptor(points[0]).quality == 5.0);
    CHECK(reg.descriptor(points[3]).quality == 95.0);
}

TEST_CASE("constant-gray image through QF=95 stays within 0.02 max abs error") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    ImageBuffer gray(64, 64, 0.6);
    auto res = reg.encode_visual(gray, reg.find("toy-dct", 95));
    CHECK(res.payload.byte_count > 0);
    double err = max_abs_diff(gray, res.decoded);
    CHECK(err <= 0.02);
    // empirically measured bound, frozen as the regression value
    CHECK(err <= 0.005);
}

TEST_CASE("toy-dct rate and distortion move with QF") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    ImageBuffer img = test::make_toy_scene(64, 64, 4242).image;

    auto low = reg.encode_visual(img, reg.find("toy-dct", 5));
    auto high = reg.encode_visual(img, reg.find("toy-dct", 95));
    CHECK(low.payload.byte_count < high.payload.byte_count);
    CHECK(mse(img, low.decoded) > mse(img, high.decoded));

    // rate monotonicity across {95, 50, 20, 5}
    size_t prev = SIZE_MAX;
    for (double qf : {95.0, 50.0, 20.0, 5.0}) {
        auto r = reg.encode_visual(img, reg.find("toy-dct", qf));
        CHECK(r.payload.byte_count <= prev);
        prev = r.payload.byte_count;
    }
}

TEST_CASE("decode matches encode loopback bit-exactly and is pure") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    ImageBuffer img = test::make_toy_scene(48, 40, 17).image;  // non multiple of 8
    uint16_t id = reg.find("toy-dct", 20);
    auto enc = reg.encode_visual(img, id);
    CHECK(enc.decoded.height == 48);
    CHECK(enc.decoded.width == 40);
    ImageBuffer dec1 = reg.decode_visual(enc.payload, id);
    ImageBuffer dec2 = reg.decode_visual(enc.payload, id);
    CHECK(dec1.pix == enc.decoded.pix);
    CHECK(dec1.pix == dec2.pix);
}

TEST_CASE("corrupt payloads decode to errors, not garbage") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    ImageBuffer img = test::make_toy_scene(32, 32, 5).image;
    uint16_t id = reg.find("toy-dct", 50);
    auto enc = reg.encode_visual(img, id);

    VisualPayload truncated;
    truncated.bytes = Bytes(enc.payload.bytes.begin(), enc.payload.bytes.end() - 8);
    truncated.byte_count = uint32_t(truncated.bytes.size());
    CHECK_THROWS_AS(reg.decode_visual(truncated, id), Error);

    VisualPayload bad_magic = enc.payload;
    bad_magic.bytes[0] = 'X';
    CHECK_THROWS_AS(reg.decode_visual(bad_magic, id), Error);

    // wrong descriptor (different QF) must be rejected
    CHECK_THROWS_AS(reg.decode_visual(enc.payload, reg.find("toy-dct", 5)), Error);
}

TEST_CASE("registry isolation: registering another codec changes nothing") {
    CodecRegistry reg;
    register_builtin_codecs(reg);
    ImageBuffer img = test::make_toy_scene(32, 32, 9).image;
    uint16_t id = reg.find("toy-dct", 20);
    Bytes before = reg.encode_visual(img, id).payload.bytes;

    CodecDescriptor extra = dct_desc(77);
    reg.register_codec(extra, std::make_shared<ToyDctCodec>());
    Bytes after = reg.encode_visual(img, id).payload.bytes;
    CHECK(before == after);
}

TEST_CASE("external codec adapter round trip") {
    namespace fs = std::filesystem;
    std::string dir = test::temp_dir("external_codec");
    std::string manifest_path = dir + "/manifest.txt";
    // identity codec: the payload is the PNG itself
    write_file_text(manifest_path,
                    "# test manifest\n"
                    "[copycodec]\n"
                    "category = traditional\n"
                    "encode = cp {in} {out}\n"
                    "decode = cp {in} {out}\n"
                    "qualities = 1, 2\n");
    CodecRegistry reg;
    register_builtin_codecs(reg);
    size_t before = reg.count();
    register_manifest_codecs(reg, manifest_path, dir + "/work");
    CHECK(reg.count() == before + 2);

    ImageBuffer img = test::make_toy_scene(64, 64, 31).image;
    uint16_t id = reg.find("copycodec", 1);
    auto enc = reg.encode_visual(img, id);
    CHECK(enc.payload.byte_count > 0);
    CHECK(enc.decoded.height == 64);
    CHECK(enc.decoded.width == 64);
    // identity codec only loses 8-bit quantization
    CHECK(max_abs_diff(img, enc.decoded) <= 0.5 / 255.0 + 1e-9);

    ImageBuffer dec = reg.decode_visual(enc.payload, id);
    CHECK(dec.pix == enc.decoded.pix);
}

TEST_CASE("external codec failure surfaces exit code and stderr") {
    std::string dir = test::temp_dir("external_fail");
    write_file_text(dir + "/manifest.txt",
                    "[badcodec]\n"
                    "encode = sh -c exit_42_is_not_a_command\n"
                    "decode = sh -c exit_42_is_not_a_command\n"
                    "qualities = 1\n");
    CodecRegistry reg;
    register_manifest_codecs(reg, dir + "/manifest.txt", dir + "/work");
    ImageBuffer img(16, 16, 0.5);
    try {
        reg.encode_visual(img, reg.find("badcodec", 1));
        FAIL("expected codec error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrKind::codec);
        CHECK(std::string(e.what()).find("exit code") != std::string::npos);
    }
}

TEST_CASE("manifest parse errors") {
    CHECK_THROWS_AS(parse_codec_manifest("key = outside stanza\n"), Error);
    CHECK_THROWS_AS(parse_codec_manifest("[x]\nencode = a\n"), Error);  // incomplete
    CHECK_THROWS_AS(parse_codec_manifest(""), Error);
    auto specs = parse_codec_manifest(
        "[webp]\ncategory = traditional\nencode = e {in} {out} {q}\n"
        "decode = d {in} {out}\nqualities = 10, 30\n");
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].name == "webp");
    CHECK(specs[0].qualities == std::vector<double>{10, 30});
}
