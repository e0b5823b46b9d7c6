#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <sstream>

#include "testutil.hpp"
#include "text/captions.hpp"
#include "text/prompt_codec.hpp"
#include "text/prompts.hpp"

using namespace umic;

namespace {

std::string make_words(int n, const char* stem = "word") {
    std::ostringstream os;
    for (int i = 0; i < n; ++i) os << (i ? " " : "") << stem << i;
    return os.str();
}

std::string random_utf8(Rng& rng, int max_len) {
    std::string s;
    int len = int(rng.uniform_index(uint64_t(max_len)));
    for (int i = 0; i < len; ++i) {
        double pick = rng.uniform();
        if (pick < 0.7) {
            s.push_back(char(32 + rng.uniform_index(95)));
        } else if (pick < 0.9) {  // 2-byte sequence
            uint32_t cp = 0x80 + uint32_t(rng.uniform_index(0x700));
            s.push_back(char(0xC0 | (cp >> 6)));
            s.push_back(char(0x80 | (cp & 0x3F)));
        } else {  // 3-byte sequence
            uint32_t cp = 0x800 + uint32_t(rng.uniform_index(0xF000));
            s.push_back(char(0xE0 | (cp >> 12)));
            s.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
            s.push_back(char(0x80 | (cp & 0x3F)));
        }
    }
    return s;
}

}  // namespace

TEST_CASE("word limits per level") {
    CHECK(word_limit(ConpLevel::concise) == 16);
    CHECK(word_limit(ConpLevel::moderate) == 36);
    CHECK(word_limit(ConpLevel::detailed) == 75);
    CHECK(word_limit(ConpLevel::none) == 0);
}

TEST_CASE("truncate_to_level") {
    std::string ten = make_words(10);
    ContentPrompt p = truncate_to_level(ten, ConpLevel::concise);
    CHECK(p.text == ten);
    CHECK(count_words(p.text) == 10);

    std::string forty = make_words(40);
    ContentPrompt q = truncate_to_level(forty, ConpLevel::concise);
    CHECK(count_words(q.text) == 16);
    CHECK(q.text == make_words(16));
    CHECK(forty.rfind(q.text, 0) == 0);  // prefix

    ContentPrompt r = truncate_to_level(forty, ConpLevel::detailed);
    CHECK(r.text == forty);

    CHECK_THROWS_AS(truncate_to_level("", ConpLevel::concise), Error);
    CHECK_THROWS_AS(truncate_to_level("   ", ConpLevel::concise), Error);
    CHECK_THROWS_AS(truncate_to_level("x", ConpLevel::none), Error);
}

TEST_CASE("word limit enforcement property") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        int n = 1 + int(rng.uniform_index(120));
        for (ConpLevel lv : {ConpLevel::concise, ConpLevel::moderate, ConpLevel::detailed}) {
            ContentPrompt p = truncate_to_level(make_words(n), lv);
            CHECK(count_words(p.text) <= word_limit(lv));
            p.validate();
        }
    }
}

TEST_CASE("prompt compression round trips") {
    PromptBytes empty = compress_prompt("");
    CHECK(empty.raw_byte_count == 0);
    CHECK(decompress_prompt(empty).empty());

    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        std::string s = random_utf8(rng, 400);
        PromptBytes pb = compress_prompt(s);
        CHECK(pb.compressed_byte_count == pb.compressed.size());
        CHECK(decompress_prompt(pb) == s);
        // wire round trip
        PromptBytes back = prompt_from_wire(prompt_to_wire(pb));
        CHECK(back.raw_byte_count == pb.raw_byte_count);
        CHECK(back.compressed == pb.compressed);
    }
}

TEST_CASE("english captions compress below raw size") {
    // 20 sample captions, each a 75-word description
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto scene = test::make_toy_scene(16, 16, seed);
        std::ostringstream os;
        while (count_words(os.str()) < 75) os << scene.detailed << " ";
        std::string caption = truncate_to_level(os.str(), ConpLevel::detailed).text;
        PromptBytes pb = compress_prompt(caption);
        CHECK(pb.compressed_byte_count < pb.raw_byte_count);
    }
}

TEST_CASE("corrupt prompt stream never yields wrong text silently") {
    std::string text = "a quiet harbor with three sailboats at dawn";
    PromptBytes pb = compress_prompt(text);
    int silent_wrong = 0;
    for (size_t i = 0; i < pb.compressed.size(); ++i) {
        PromptBytes bad = pb;
        bad.compressed[i] ^= 0x10;
        try {
            std::string out = decompress_prompt(bad);
            if (out != text) ++silent_wrong;
        } catch (const Error&) {
            // expected: checksum or stream error
        }
    }
    CHECK(silent_wrong == 0);
}

TEST_CASE("stream from an independent deflate producer decodes") {
    // stored-block DEFLATE wrapped in the zlib container, built by hand
    std::string text = "interop check payload";
    Bytes stream;
    stream.push_back(0x78);  // CMF: deflate, 32k window
    stream.push_back(0x01);  // FLG with check bits, no dict
    stream.push_back(0x01);  // BFINAL=1, BTYPE=00 (stored)
    uint16_t len = uint16_t(text.size());
    stream.push_back(uint8_t(len & 0xFF));
    stream.push_back(uint8_t(len >> 8));
    stream.push_back(uint8_t(~len & 0xFF));
    stream.push_back(uint8_t((~len >> 8) & 0xFF));
    for (char c : text) stream.push_back(uint8_t(c));
    uint32_t a = 1, b = 0;
    for (char c : text) {
        a = (a + uint8_t(c)) % 65521;
        b = (b + a) % 65521;
    }
    uint32_t adler = (b << 16) | a;
    for (int shift = 24; shift >= 0; shift -= 8)
        stream.push_back(uint8_t(adler >> shift));

    PromptBytes pb;
    pb.compressed = stream;
    pb.raw_byte_count = uint32_t(text.size());
    pb.compressed_byte_count = uint32_t(stream.size());
    CHECK(decompress_prompt(pb) == text);
}

TEST_CASE("compression prompt render and parse") {
    CodecDescriptor vtm;
    vtm.category = CodecCategory::traditional;
    vtm.name = "vtm";
    vtm.metric = OptMetric::psnr;
    vtm.quality = 52;
    CompressionPrompt p = render_compression_prompt(vtm, ConpLevel::detailed);
    CHECK(p.text == "category:traditional|codec:vtm|metric:PSNR|quality:52|conp:detailed");

    auto [d, level] = parse_compression_prompt(p.text);
    CHECK(level == ConpLevel::detailed);
    CHECK(d.same_point(vtm));
    CHECK(d.category == vtm.category);
    CHECK(d.metric == vtm.metric);

    // round trip across categories, metrics, qualities and levels
    for (double q : {0.0018, 0.0004, 5.0, 47.0, 8.73}) {
        for (OptMetric m : {OptMetric::psnr, OptMetric::ms_ssim, OptMetric::gan}) {
            CodecDescriptor nd;
            nd.category = CodecCategory::neural;
            nd.name = "codec-x";
            nd.metric = m;
            nd.quality = q;
            for (ConpLevel lv : {ConpLevel::none, ConpLevel::concise,
                                 ConpLevel::moderate, ConpLevel::detailed}) {
                auto rendered = render_compression_prompt(nd, lv);
                auto [pd, plv] = parse_compression_prompt(rendered.text);
                CHECK(plv == lv);
                CHECK(pd.same_point(nd));
                CHECK(pd.metric == m);
                CHECK(pd.category == CodecCategory::neural);
            }
        }
    }

    // injectivity in quality
    CodecDescriptor a = vtm, b = vtm;
    b.quality = 47;
    CHECK(render_compression_prompt(a, ConpLevel::none).text !=
          render_compression_prompt(b, ConpLevel::none).text);

    CHECK_THROWS_AS(parse_compression_prompt("category:traditional|codec:x"), Error);
    CHECK_THROWS_AS(parse_compression_prompt("not a prompt"), Error);
}

TEST_CASE("traditional codecs must be PSNR-optimized") {
    CodecDescriptor d;
    d.category = CodecCategory::traditional;
    d.name = "jpeg";
    d.metric = OptMetric::gan;
    d.quality = 5;
    CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("level monotonicity on prefix-nested captions") {
    for (uint64_t seed = 100; seed < 130; ++seed) {
        auto sc = test::make_toy_scene(16, 16, seed);
        size_t rc = compress_prompt(truncate_to_level(sc.concise, ConpLevel::concise).text)
                        .raw_byte_count;
        size_t rm = compress_prompt(truncate_to_level(sc.moderate, ConpLevel::moderate).text)
                        .raw_byte_count;
        size_t rd = compress_prompt(truncate_to_level(sc.detailed, ConpLevel::detailed).text)
                        .raw_byte_count;
        CHECK(rc <= rm);
        CHECK(rm <= rd);
    }
}

TEST_CASE("caption sidecar ingestion") {
    std::string json = R"([
      {"id": "a", "concise": "a red circle", "moderate": "a red circle on gray",
       "detailed": "a red circle on a gray background with soft light"},
      {"id": "b", "concise": "two squares", "moderate": "two blue squares stacked",
       "detailed": ")" + make_words(80) + R"("}
    ])";
    CaptionStore store = CaptionStore::from_json_text(json);
    CHECK(store.count() == 2);
    CHECK(store.lookup("a").concise == "a red circle");
    // 80-word detailed caption truncated to 75 with a warning
    CHECK(count_words(store.lookup("b").detailed) == 75);
    REQUIRE(store.warnings().size() == 1);
    CHECK(store.warnings()[0].find("b.detailed") != std::string::npos);

    CHECK_THROWS_AS(store.lookup("missing"), Error);
    CHECK_THROWS_AS(CaptionStore::from_json_text("{not json"), Error);
    CHECK_THROWS_AS(CaptionStore::from_json_text(R"([{"id":"x","concise":"y"}])"), Error);
}

TEST_CASE("caption set selection by level") {
    CaptionSet set{"c", "m", "d"};
    CHECK(set.for_level(ConpLevel::concise) == "c");
    CHECK(set.for_level(ConpLevel::moderate) == "m");
    CHECK(set.for_level(ConpLevel::detailed) == "d");
    CHECK_THROWS_AS(set.for_level(ConpLevel::none), Error);
}
