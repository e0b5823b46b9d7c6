#include "core/image.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>

#include "core/error.hpp"

namespace umic {

void ImageBuffer::validate(const char* what) const {
    require(height >= 1 && width >= 1, ErrKind::invalid_argument,
            std::string(what) + ": dimensions must be >= 1");
    require(pix.size() == size_t(height) * width * 3, ErrKind::invalid_argument,
            std::string(what) + ": pixel buffer size mismatch");
    for (double v : pix)
        require(std::isfinite(v), ErrKind::invalid_argument,
                std::string(what) + ": non-finite pixel value");
}

ImageBuffer clamp01(const ImageBuffer& img) {
    ImageBuffer out = img;
    for (double& v : out.pix) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return out;
}

static int reflect_index(int i, int n) {
    // reflect without repeating the edge sample: n=4 -> 0 1 2 3 2 1 0 1 ...
    if (n == 1) return 0;
    int period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

ImageBuffer reflect_pad_to_multiple(const ImageBuffer& img, int multiple) {
    require(multiple >= 1, ErrKind::invalid_argument, "pad multiple must be >= 1");
    int ph = (img.height + multiple - 1) / multiple * multiple;
    int pw = (img.width + multiple - 1) / multiple * multiple;
    if (ph == img.height && pw == img.width) return img;
    ImageBuffer out(ph, pw);
    for (int y = 0; y < ph; ++y) {
        int sy = reflect_index(y, img.height);
        for (int x = 0; x < pw; ++x) {
            int sx = reflect_index(x, img.width);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

ImageBuffer crop(const ImageBuffer& img, int y0, int x0, int h, int w) {
    require(y0 >= 0 && x0 >= 0 && h >= 1 && w >= 1 && y0 + h <= img.height &&
                x0 + w <= img.width,
            ErrKind::invalid_argument, "crop window outside image");
    ImageBuffer out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

std::vector<ImageBuffer> split_patches(const ImageBuffer& img, int patch) {
    require(patch >= 1, ErrKind::invalid_argument, "patch size must be >= 1");
    std::vector<ImageBuffer> out;
    int ny = img.height / patch, nx = img.width / patch;
    for (int py = 0; py < ny; ++py)
        for (int px = 0; px < nx; ++px)
            out.push_back(crop(img, py * patch, px * patch, patch, patch));
    return out;
}

std::vector<uint8_t> to_rgb8(const ImageBuffer& img) {
    std::vector<uint8_t> out(img.pix.size());
    for (size_t i = 0; i < img.pix.size(); ++i) {
        double v = img.pix[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out[i] = uint8_t(std::lround(v * 255.0));
    }
    return out;
}

ImageBuffer from_rgb8(const uint8_t* data, int h, int w) {
    ImageBuffer img(h, w);
    for (size_t i = 0; i < img.pix.size(); ++i) img.pix[i] = data[i] / 255.0;
    return img;
}

namespace {

struct PngReadState {
    const uint8_t* data;
    size_t size;
    size_t pos;
};

void png_read_cb(png_structp png, png_bytep dst, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->size) png_error(png, "png: read past end");
    std::memcpy(dst, st->data + st->pos, n);
    st->pos += n;
}

void png_write_cb(png_structp png, png_bytep src, png_size_t n) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), src, src + n);
}

void png_flush_cb(png_structp) {}

}  // namespace

Bytes encode_png(const ImageBuffer& img) {
    img.validate("png encode");
    std::vector<uint8_t> rgb = to_rgb8(img);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrKind::internal, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrKind::internal, "png_create_info_struct failed");
    }
    Bytes out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrKind::io, "png encode failed");
    }
    png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(rgb.data() + size_t(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

ImageBuffer decode_png(const Bytes& data) {
    require(data.size() >= 8 && png_sig_cmp(data.data(), 0, 8) == 0, ErrKind::format,
            "not a png stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrKind::internal, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrKind::internal, "png_create_info_struct failed");
    }
    PngReadState st{data.data(), data.size(), 0};
    std::vector<uint8_t> rgb;
    int h = 0, w = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrKind::format, "png decode failed");
    }
    png_set_read_fn(png, &st, png_read_cb);
    png_read_info(png, info);
    w = int(png_get_image_width(png, info));
    h = int(png_get_image_height(png, info));
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    rgb.resize(size_t(h) * w * 3);
    for (int y = 0; y < h; ++y) png_read_row(png, rgb.data() + size_t(y) * w * 3, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_rgb8(rgb.data(), h, w);
}

void write_png(const std::string& path, const ImageBuffer& img) {
    write_file_bytes(path, encode_png(img));
}

ImageBuffer read_png(const std::string& path) {
    return decode_png(read_file_bytes(path));
}

static ImageBuffer read_ppm(const Bytes& data) {
    // binary P6, maxval 255
    ByteReader r(data);
    std::string magic = r.str(2, "ppm magic");
    require(magic == "P6", ErrKind::format, "not a P6 ppm");
    auto next_int = [&]() {
        int v = -1;
        bool in_comment = false;
        while (r.remaining()) {
            char c = char(r.u8("ppm header"));
            if (in_comment) {
                if (c == '\n') in_comment = false;
                continue;
            }
            if (c == '#') {
                in_comment = true;
                continue;
            }
            if (c >= '0' && c <= '9') {
                v = (v < 0 ? 0 : v * 10) + (c - '0');
            } else if (v >= 0) {
                return v;
            }
        }
        fail(ErrKind::format, "truncated ppm header");
    };
    int w = next_int(), h = next_int(), maxv = next_int();
    require(maxv == 255, ErrKind::format, "ppm maxval must be 255");
    require(w >= 1 && h >= 1, ErrKind::format, "bad ppm dimensions");
    Bytes rgb = r.raw(size_t(h) * w * 3, "ppm pixels");
    return from_rgb8(rgb.data(), h, w);
}

ImageBuffer read_image(const std::string& path) {
    Bytes data = read_file_bytes(path);
    require(!data.empty(), ErrKind::format, "empty image file: " + path);
    if (data.size() >= 8 && png_sig_cmp(data.data(), 0, 8) == 0) return decode_png(data);
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') return read_ppm(data);
    fail(ErrKind::format, "unsupported image format: " + path);
}

}  // namespace umic
