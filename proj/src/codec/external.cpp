#include "codec/external.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "core/subprocess.hpp"

namespace umic {

namespace fs = std::filesystem;

static std::string trim_ws(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<ExternalCodecSpec> parse_codec_manifest(const std::string& text) {
    std::vector<ExternalCodecSpec> specs;
    ExternalCodecSpec cur;
    bool open = false;
    auto flush = [&]() {
        if (!open) return;
        require(!cur.encode_command.empty() && !cur.decode_command.empty(),
                ErrKind::format, "manifest codec " + cur.name + " missing commands");
        require(!cur.qualities.empty(), ErrKind::format,
                "manifest codec " + cur.name + " lists no qualities");
        specs.push_back(cur);
        cur = ExternalCodecSpec{};
        open = false;
    };

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim_ws(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            flush();
            cur.name = trim_ws(line.substr(1, line.size() - 2));
            require(!cur.name.empty(), ErrKind::format, "manifest: empty codec name");
            open = true;
            continue;
        }
        require(open, ErrKind::format,
                "manifest line " + std::to_string(lineno) + " outside a [codec] stanza");
        size_t eq = line.find('=');
        require(eq != std::string::npos, ErrKind::format,
                "manifest line " + std::to_string(lineno) + " is not key=value");
        std::string key = trim_ws(line.substr(0, eq));
        std::string val = trim_ws(line.substr(eq + 1));
        if (key == "category") cur.category = codec_category_from_name(val);
        else if (key == "metric") cur.metric = opt_metric_from_name(val);
        else if (key == "encode") cur.encode_command = val;
        else if (key == "decode") cur.decode_command = val;
        else if (key == "qualities") {
            std::istringstream qs(val);
            std::string tok;
            while (std::getline(qs, tok, ',')) {
                tok = trim_ws(tok);
                if (tok.empty()) continue;
                cur.qualities.push_back(std::strtod(tok.c_str(), nullptr));
            }
        } else {
            fail(ErrKind::format, "manifest: unknown key '" + key + "'");
        }
    }
    flush();
    require(!specs.empty(), ErrKind::format, "manifest defines no codecs");
    return specs;
}

ExternalCodec::ExternalCodec(ExternalCodecSpec spec, std::string work_dir)
    : spec_(std::move(spec)), work_dir_(std::move(work_dir)) {
    fs::create_directories(work_dir_);
}

static std::string substitute(const std::string& tmpl, const std::string& in,
                              const std::string& out, const std::string& q) {
    std::string s = tmpl;
    auto replace_all = [&s](const std::string& from, const std::string& to) {
        size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("{in}", in);
    replace_all("{out}", out);
    replace_all("{q}", q);
    return s;
}

static void run_codec_command(const std::string& cmd, const std::string& what) {
    SubprocessResult res = run_subprocess(split_command(cmd));
    if (res.exit_code != 0) {
        fail(ErrKind::codec, what + " failed with exit code " +
                                 std::to_string(res.exit_code) + ": " + cmd +
                                 (res.stderr_text.empty() ? "" : "\nstderr: " +
                                                                     res.stderr_text));
    }
}

std::pair<Bytes, ImageBuffer> ExternalCodec::encode(const ImageBuffer& image,
                                                    const CodecDescriptor& d) {
    std::string tag = spec_.name + "_" + std::to_string(counter_++);
    fs::path in_png = fs::path(work_dir_) / (tag + "_in.png");
    fs::path out_bin = fs::path(work_dir_) / (tag + "_payload.bin");
    write_png(in_png.string(), image);
    std::string q = CodecDescriptor::format_quality(d.quality);
    run_codec_command(substitute(spec_.encode_command, in_png.string(),
                                 out_bin.string(), q),
                      "external codec '" + spec_.name + "' encode");
    Bytes payload = read_file_bytes(out_bin.string());
    require(!payload.empty(), ErrKind::codec,
            "external codec '" + spec_.name + "' produced empty payload");
    ImageBuffer decoded = decode(payload, d);
    require(decoded.height == image.height && decoded.width == image.width,
            ErrKind::codec,
            "external codec '" + spec_.name + "' changed image dimensions");
    fs::remove(in_png);
    fs::remove(out_bin);
    return {std::move(payload), std::move(decoded)};
}

ImageBuffer ExternalCodec::decode(const Bytes& payload, const CodecDescriptor& d) {
    std::string tag = spec_.name + "_" + std::to_string(counter_++);
    fs::path in_bin = fs::path(work_dir_) / (tag + "_in.bin");
    fs::path out_png = fs::path(work_dir_) / (tag + "_out.png");
    write_file_bytes(in_bin.string(), payload);
    std::string q = CodecDescriptor::format_quality(d.quality);
    run_codec_command(substitute(spec_.decode_command, in_bin.string(),
                                 out_png.string(), q),
                      "external codec '" + spec_.name + "' decode");
    ImageBuffer decoded = read_image(out_png.string());
    fs::remove(in_bin);
    fs::remove(out_png);
    return decoded;
}

void register_manifest_codecs(CodecRegistry& reg, const std::string& manifest_path,
                              const std::string& work_dir) {
    auto specs = parse_codec_manifest(read_file_text(manifest_path));
    for (const auto& spec : specs) {
        auto impl = std::make_shared<ExternalCodec>(spec, work_dir);
        for (double q : spec.qualities) {
            CodecDescriptor d;
            d.category = spec.category;
            d.name = spec.name;
            d.metric = spec.category == CodecCategory::traditional ? OptMetric::psnr
                                                                   : spec.metric;
            d.quality = q;
            reg.register_codec(d, impl);
        }
    }
}

}  // namespace umic
