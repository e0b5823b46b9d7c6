#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "core/bytes.hpp"
#include "core/config.hpp"
#include "core/image.hpp"
#include "core/rng.hpp"
#include "core/sha256.hpp"
#include "core/subprocess.hpp"
#include "testutil.hpp"

using namespace umic;

TEST_CASE("rng is deterministic and serializable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(7);
    for (int i = 0; i < 17; ++i) c.gaussian();
    std::string state = c.serialize();
    Rng d = Rng::deserialize(state);
    for (int i = 0; i < 50; ++i) CHECK(c.gaussian() == d.gaussian());
}

TEST_CASE("rng gaussian moments") {
    Rng r(123);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double g = r.gaussian();
        sum += g;
        sum2 += g * g;
    }
    CHECK(std::fabs(sum / n) < 0.02);
    CHECK(std::fabs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("sha256 known vector") {
    CHECK(sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing, defaults, hash") {
    Config c = Config::from_text("a = 1\n# comment\nb=hello world\nlist = x, y ,z\n");
    CHECK(c.get_int("a") == 1);
    CHECK(c.get_str("b") == "hello world");
    CHECK(c.get_list("list") == std::vector<std::string>{"x", "y", "z"});
    CHECK(c.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(c.get_str("missing"), Error);
    std::string h1 = c.hash();
    c.set("a", "2");
    CHECK(c.hash() != h1);
    CHECK_THROWS_AS(Config::from_text("not a kv line\n"), Error);
}

TEST_CASE("byte writer/reader round trip big-endian") {
    ByteWriter w;
    w.u8(0xAB);
    w.u16(0x1234);
    w.u32(0xDEADBEEF);
    w.f64(-1.5);
    CHECK(w.out[1] == 0x12);
    CHECK(w.out[2] == 0x34);
    ByteReader r(w.out);
    CHECK(r.u8() == 0xAB);
    CHECK(r.u16() == 0x1234);
    CHECK(r.u32() == 0xDEADBEEF);
    CHECK(r.f64() == -1.5);
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(r.u8(), Error);
}

TEST_CASE("png round trip preserves 8-bit pixels") {
    Rng rng(5);
    ImageBuffer img(13, 9);
    for (double& v : img.pix) v = std::floor(rng.uniform() * 256.0) / 255.0;
    img = clamp01(img);
    Bytes png = encode_png(img);
    ImageBuffer back = decode_png(png);
    REQUIRE(back.same_shape(img));
    for (size_t i = 0; i < img.pix.size(); ++i)
        CHECK(back.pix[i] == doctest::Approx(img.pix[i]).epsilon(1e-12));
    CHECK_THROWS_AS(decode_png(Bytes{1, 2, 3, 4}), Error);
}

TEST_CASE("reflect padding and patch split") {
    ImageBuffer img(5, 7);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = y * 10 + x;
    ImageBuffer padded = reflect_pad_to_multiple(img, 4);
    CHECK(padded.height == 8);
    CHECK(padded.width == 8);
    // reflection should not repeat the edge row
    CHECK(padded.at(5, 0, 0) == img.at(3, 0, 0));
    CHECK(padded.at(0, 7, 0) == img.at(0, 5, 0));

    ImageBuffer big(768, 768);
    CHECK(split_patches(big, 256).size() == 9);
    CHECK(split_patches(img, 2).size() == 2 * 3);
}

TEST_CASE("subprocess captures exit code and stderr") {
    auto ok = run_subprocess({"true"});
    CHECK(ok.exit_code == 0);
    auto bad = run_subprocess({"false"});
    CHECK(bad.exit_code == 1);
    auto missing = run_subprocess({"definitely-not-a-real-binary-xyz"});
    CHECK(missing.exit_code == 127);
    CHECK(missing.stderr_text.find("exec failed") != std::string::npos);
    CHECK(split_command("cp {a}  b") ==
          std::vector<std::string>{"cp", "{a}", "b"});
}

TEST_CASE("toy scene generator is deterministic") {
    auto a = test::make_toy_scene(32, 32, 99);
    auto b = test::make_toy_scene(32, 32, 99);
    CHECK(a.image.pix == b.image.pix);
    CHECK(a.detailed == b.detailed);
    CHECK(!a.concise.empty());
}
