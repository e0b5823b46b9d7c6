#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/bytes.hpp"

namespace umic {

// RGB image, values in [0,1], row-major, interleaved channels.
struct ImageBuffer {
    int height = 0;
    int width = 0;
    std::vector<double> pix;  // height*width*3

    ImageBuffer() = default;
    ImageBuffer(int h, int w, double fill = 0.0)
        : height(h), width(w), pix(size_t(h) * w * 3, fill) {}

    double& at(int y, int x, int c) { return pix[(size_t(y) * width + x) * 3 + c]; }
    double at(int y, int x, int c) const { return pix[(size_t(y) * width + x) * 3 + c]; }
    size_t size() const { return pix.size(); }
    bool same_shape(const ImageBuffer& o) const {
        return height == o.height && width == o.width;
    }

    void validate(const char* what = "image") const;  // finite, dims >= 1
};

ImageBuffer clamp01(const ImageBuffer& img);

// Reflect-pads so that height and width are multiples of `multiple`.
ImageBuffer reflect_pad_to_multiple(const ImageBuffer& img, int multiple);
ImageBuffer crop(const ImageBuffer& img, int y0, int x0, int h, int w);

// Non-overlapping patch grid: floor(H/p) x floor(W/p) patches, remainder dropped.
std::vector<ImageBuffer> split_patches(const ImageBuffer& img, int patch);

// 8-bit quantization used at every file boundary.
std::vector<uint8_t> to_rgb8(const ImageBuffer& img);
ImageBuffer from_rgb8(const uint8_t* data, int h, int w);

Bytes encode_png(const ImageBuffer& img);
ImageBuffer decode_png(const Bytes& data);
void write_png(const std::string& path, const ImageBuffer& img);
ImageBuffer read_png(const std::string& path);

// Any supported raster file (currently PNG and binary PPM).
ImageBuffer read_image(const std::string& path);

}  // namespace umic
