#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "container/container.hpp"
#include "core/sha256.hpp"
#include "testutil.hpp"
#include "text/prompt_codec.hpp"

using namespace umic;

namespace {

UniMICStream make_stream(Rng& rng, size_t visual_len, ConpLevel level) {
    UniMICStream s;
    s.header.codec_id = uint16_t(rng.uniform_index(32));
    s.header.quality_code = uint32_t(1 + rng.uniform_index(1000000));
    s.header.conp_level = level;
    s.header.image_height = uint16_t(1 + rng.uniform_index(2048));
    s.header.image_width = uint16_t(1 + rng.uniform_index(2048));
    s.visual.resize(visual_len);
    for (auto& b : s.visual) b = uint8_t(rng.uniform_index(256));
    s.header.visual_length = uint32_t(visual_len);
    if (level != ConpLevel::none) {
        std::string text = "prompt-" + std::to_string(rng.next_u64() % 1000);
        s.prompt = prompt_to_wire(compress_prompt(text));
    }
    return s;
}

}  // namespace

TEST_CASE("header is exactly 20 bytes; 100-byte visual packs to 120") {
    UniMICStream s;
    s.header.codec_id = 3;
    s.header.quality_code = 50000;
    s.header.conp_level = ConpLevel::none;
    s.header.image_height = 64;
    s.header.image_width = 64;
    s.visual.assign(100, 0x5A);
    s.header.visual_length = 100;
    Bytes packed = pack(s);
    CHECK(packed.size() == 120);
    CHECK(kContainerHeaderSize == 20);
    UniMICStream back = unpack(packed);
    CHECK(back == s);
}

TEST_CASE("pack validation") {
    UniMICStream s;
    s.header.codec_id = 0;
    s.header.quality_code = 1;
    s.header.image_height = 8;
    s.header.image_width = 8;
    s.visual.assign(10, 1);
    s.header.visual_length = 9;  // wrong
    CHECK_THROWS_AS(pack(s), Error);

    s.header.visual_length = 10;
    s.prompt = {1, 2, 3, 4};  // prompt at level none
    CHECK_THROWS_AS(pack(s), Error);

    s.prompt.clear();
    s.header.conp_level = ConpLevel::detailed;  // level without prompt
    CHECK_THROWS_AS(pack(s), Error);
}

TEST_CASE("unpack error kinds") {
    Rng rng(3);
    UniMICStream s = make_stream(rng, 64, ConpLevel::concise);
    Bytes good = pack(s);

    Bytes bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(unpack(bad_magic), doctest::Contains("bad magic"), Error);

    Bytes bad_version = good;
    bad_version[4] = 255;
    CHECK_THROWS_WITH_AS(unpack(bad_version), doctest::Contains("unsupported version"),
                         Error);

    Bytes truncated_header(good.begin(), good.begin() + 10);
    CHECK_THROWS_WITH_AS(unpack(truncated_header), doctest::Contains("truncated header"),
                         Error);

    Bytes truncated_visual(good.begin(), good.begin() + 30);
    CHECK_THROWS_WITH_AS(unpack(truncated_visual),
                         doctest::Contains("truncated visual"), Error);

    // prompt section cut down to below the minimum
    Bytes truncated_prompt(good.begin(), good.begin() + 20 + 64 + 1);
    CHECK_THROWS_AS(unpack(truncated_prompt), Error);
}

TEST_CASE("golden fixture stream") {
    UniMICStream s;
    s.header.codec_id = 7;
    s.header.quality_code = 520000;  // quality 52
    s.header.conp_level = ConpLevel::moderate;
    s.header.image_height = 768;
    s.header.image_width = 512;
    s.visual = Bytes{0xDE, 0xAD, 0xBE, 0xEF, 0x01, 0x02};
    s.header.visual_length = 6;
    s.prompt = prompt_to_wire(compress_prompt("golden fixture prompt"));
    Bytes packed = pack(s);

    // header bytes are fixed by the format definition
    const uint8_t expect_header[20] = {'U', 'M',  'I',  'C',  1,    0, 7,
                                       0,   0x07, 0xEF, 0x40,  // 520000
                                       2,   0x03, 0x00,        // h=768
                                       2,   0x00,              // w=512
                                       0,   0,    0,    6};
    for (size_t i = 0; i < 20; ++i) CHECK(packed[i] == expect_header[i]);

    // frozen digest of the full golden stream (zlib 1.2.11 prompt body)
    CHECK(sha256_hex(packed) ==
          "894612e3b03f4414686d4c7eeecaa9b303ac9729e639102fef1aea43445dfac4");

    UniMICStream back = unpack(packed);
    CHECK(back.header.codec_id == 7);
    CHECK(back.header.quality_code == 520000);
    CHECK(back.header.conp_level == ConpLevel::moderate);
    CHECK(back.header.image_height == 768);
    CHECK(back.header.image_width == 512);
    CHECK(decompress_prompt(prompt_from_wire(back.prompt)) == "golden fixture prompt");
}

TEST_CASE("round-trip fuzz over random section lengths") {
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        ConpLevel level = ConpLevel(rng.uniform_index(4));
        size_t visual_len = 1 + rng.uniform_index(i % 50 == 0 ? (1u << 20) : 4096);
        UniMICStream s = make_stream(rng, visual_len, level);
        Bytes packed = pack(s);
        CHECK(packed.size() == 20 + s.visual.size() + s.prompt.size());
        UniMICStream back = unpack(packed);
        CHECK(back == s);
        CHECK(pack(back) == packed);
    }
}

TEST_CASE("bpp arithmetic") {
    UniMICStream s;
    s.header.codec_id = 0;
    s.header.quality_code = 1;
    s.header.conp_level = ConpLevel::none;
    s.header.image_height = 768;
    s.header.image_width = 768;
    s.visual.assign(960, 0);
    s.header.visual_length = 960;

    double bpp0 = compute_bpp(s);
    CHECK(bpp0 == doctest::Approx(8.0 * 980.0 / 589824.0).epsilon(1e-12));
    CHECK(bpp0 == doctest::Approx(0.013292).epsilon(1e-4));

    BppBreakdown b0 = compute_bpp_breakdown(s);
    CHECK(b0.prompt == 0.0);
    CHECK(b0.total == doctest::Approx(b0.header + b0.visual + b0.prompt).epsilon(1e-14));

    // adding a 240-byte prompt raises bpp by exactly 8*240/(768*768)
    UniMICStream s2 = s;
    s2.header.conp_level = ConpLevel::detailed;
    s2.prompt.assign(240, 0x11);
    double bpp1 = compute_bpp(s2);
    CHECK(bpp1 - bpp0 == doctest::Approx(8.0 * 240.0 / 589824.0).epsilon(1e-12));
    CHECK(bpp1 - bpp0 == doctest::Approx(0.003255).epsilon(1e-3));

    UniMICStream zero = s;
    zero.header.image_height = 0;
    CHECK_THROWS_AS(compute_bpp(zero), Error);
}

TEST_CASE("bpp additivity is exact across random prompts") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        UniMICStream without = make_stream(rng, 100 + rng.uniform_index(4000),
                                           ConpLevel::none);
        UniMICStream with = without;
        with.header.conp_level = ConpLevel::detailed;
        std::string text(1 + rng.uniform_index(300), 'a');
        with.prompt = prompt_to_wire(compress_prompt(text));
        double pixels = double(without.header.image_height) *
                        double(without.header.image_width);
        double delta = compute_bpp(with) - compute_bpp(without);
        double expect = 8.0 * double(with.prompt.size()) / pixels;
        CHECK(delta == doctest::Approx(expect).epsilon(1e-12));
    }
}
