#include "codec/toy_dct.hpp"

#include <zlib.h>

#include <array>
#include <cmath>

namespace umic {

namespace {

constexpr int kBlock = 8;
constexpr uint32_t kEob = 64;  // zero runs are <= 63, so 64 terminates a block

struct DctTables {
    // orthonormal DCT-II basis: basis[k][n]
    double basis[kBlock][kBlock];
    int zigzag[kBlock * kBlock];  // zigzag order -> raster index

    DctTables() {
        for (int k = 0; k < kBlock; ++k) {
            double s = k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
            for (int n = 0; n < kBlock; ++n)
                basis[k][n] = s * std::cos((2.0 * n + 1.0) * k * M_PI / (2.0 * kBlock));
        }
        int idx = 0;
        for (int d = 0; d < 2 * kBlock - 1; ++d) {
            // walk anti-diagonals, alternating direction
            for (int i = 0; i < kBlock; ++i) {
                int u = (d % 2 == 0) ? d - i : i;
                int v = d - u;
                if (u < 0 || u >= kBlock || v < 0 || v >= kBlock) continue;
                zigzag[idx++] = u * kBlock + v;
            }
        }
    }
};

const DctTables& tables() {
    static DctTables t;
    return t;
}

void dct2d(const double* in, double* out) {
    const auto& b = tables().basis;
    double tmp[kBlock][kBlock];
    for (int k = 0; k < kBlock; ++k)
        for (int n = 0; n < kBlock; ++n) {
            double s = 0.0;
            for (int j = 0; j < kBlock; ++j) s += b[k][j] * in[j * kBlock + n];
            tmp[k][n] = s;
        }
    for (int k = 0; k < kBlock; ++k)
        for (int l = 0; l < kBlock; ++l) {
            double s = 0.0;
            for (int j = 0; j < kBlock; ++j) s += tmp[k][j] * b[l][j];
            out[k * kBlock + l] = s;
        }
}

void idct2d(const double* in, double* out) {
    const auto& b = tables().basis;
    double tmp[kBlock][kBlock];
    for (int n = 0; n < kBlock; ++n)
        for (int l = 0; l < kBlock; ++l) {
            double s = 0.0;
            for (int k = 0; k < kBlock; ++k) s += b[k][n] * in[k * kBlock + l];
            tmp[n][l] = s;
        }
    for (int n = 0; n < kBlock; ++n)
        for (int m = 0; m < kBlock; ++m) {
            double s = 0.0;
            for (int l = 0; l < kBlock; ++l) s += tmp[n][l] * b[l][m];
            out[n * kBlock + m] = s;
        }
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

Bytes zlib_pack(const Bytes& raw) {
    uLongf bound = compressBound(uLong(raw.size()));
    Bytes out(bound);
    int rc = compress2(out.data(), &bound, raw.data(), uLong(raw.size()),
                       Z_BEST_COMPRESSION);
    require(rc == Z_OK, ErrKind::internal, "zlib compress failed");
    out.resize(bound);
    return out;
}

Bytes zlib_unpack(const Bytes& packed, uint32_t raw_size) {
    Bytes out(raw_size);
    uLongf dst = raw_size;
    int rc = uncompress(out.data(), &dst, packed.data(), uLong(packed.size()));
    require(rc == Z_OK && dst == raw_size, ErrKind::format,
            "toy-dct payload: corrupt compressed body");
    return out;
}

// shared by encode loopback and decode so both produce bit-identical pixels
ImageBuffer reconstruct(const std::vector<int32_t>& coeffs, int ph, int pw, int h,
                        int w, double step) {
    ImageBuffer padded(ph, pw);
    int by = ph / kBlock, bx = pw / kBlock;
    size_t pos = 0;
    double block[kBlock * kBlock], pixels[kBlock * kBlock];
    for (int c = 0; c < 3; ++c)
        for (int yb = 0; yb < by; ++yb)
            for (int xb = 0; xb < bx; ++xb) {
                for (int i = 0; i < kBlock * kBlock; ++i)
                    block[tables().zigzag[i]] = double(coeffs[pos++]) * step;
                idct2d(block, pixels);
                for (int y = 0; y < kBlock; ++y)
                    for (int x = 0; x < kBlock; ++x) {
                        double v = pixels[y * kBlock + x] + 0.5;
                        padded.at(yb * kBlock + y, xb * kBlock + x, c) =
                            v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                    }
            }
    return (ph == h && pw == w) ? padded : crop(padded, 0, 0, h, w);
}

}  // namespace

double ToyDctCodec::quant_step(double qf) {
    require(qf >= 1.0 && qf <= 100.0, ErrKind::invalid_argument,
            "toy-dct quality factor must be in [1,100]");
    double scale = qf < 50.0 ? 5000.0 / qf : 200.0 - 2.0 * qf;  // percent
    double step = 0.5 * scale / 100.0;
    return step < 0.004 ? 0.004 : step;
}

std::pair<Bytes, ImageBuffer> ToyDctCodec::encode(const ImageBuffer& image,
                                                  const CodecDescriptor& d) {
    image.validate("toy-dct input");
    require(image.height <= 65535 && image.width <= 65535, ErrKind::invalid_argument,
            "toy-dct: image too large");
    double step = quant_step(d.quality);
    ImageBuffer padded = reflect_pad_to_multiple(image, kBlock);
    int ph = padded.height, pw = padded.width;
    int by = ph / kBlock, bx = pw / kBlock;

    std::vector<int32_t> coeffs;
    coeffs.reserve(size_t(3) * by * bx * kBlock * kBlock);
    Bytes tokens;
    double block[kBlock * kBlock], freq[kBlock * kBlock];
    for (int c = 0; c < 3; ++c)
        for (int yb = 0; yb < by; ++yb)
            for (int xb = 0; xb < bx; ++xb) {
                for (int y = 0; y < kBlock; ++y)
                    for (int x = 0; x < kBlock; ++x)
                        block[y * kBlock + x] =
                            padded.at(yb * kBlock + y, xb * kBlock + x, c) - 0.5;
                dct2d(block, freq);
                int32_t q[kBlock * kBlock];
                for (int i = 0; i < kBlock * kBlock; ++i) {
                    q[i] = int32_t(std::lround(freq[tables().zigzag[i]] / step));
                    coeffs.push_back(q[i]);
                }
                // run-length of zeros before each nonzero, then EOB
                uint32_t run = 0;
                for (int i = 0; i < kBlock * kBlock; ++i) {
                    if (q[i] == 0) {
                        ++run;
                        continue;
                    }
                    put_varint(tokens, run);
                    put_varint(tokens, zz_encode(q[i]));
                    run = 0;
                }
                put_varint(tokens, kEob);
            }

    ByteWriter w;
    w.str("TD1");
    w.u16(uint16_t(image.height));
    w.u16(uint16_t(image.width));
    w.u32(d.quality_code());
    w.u32(uint32_t(tokens.size()));
    Bytes packed = zlib_pack(tokens);
    w.raw(packed.data(), packed.size());

    ImageBuffer decoded = reconstruct(coeffs, ph, pw, image.height, image.width, step);
    return {std::move(w.out), std::move(decoded)};
}

ImageBuffer ToyDctCodec::decode(const Bytes& payload, const CodecDescriptor& d) {
    ByteReader r(payload);
    require(r.str(3, "magic") == "TD1", ErrKind::format, "toy-dct payload: bad magic");
    int h = r.u16("height"), w = r.u16("width");
    require(h >= 1 && w >= 1, ErrKind::format, "toy-dct payload: bad dimensions");
    uint32_t qcode = r.u32("quality_code");
    require(qcode == d.quality_code(), ErrKind::format,
            "toy-dct payload quality does not match descriptor");
    uint32_t token_len = r.u32("token length");
    Bytes packed = r.raw(r.remaining(), "compressed body");
    Bytes tokens = zlib_unpack(packed, token_len);

    double step = quant_step(d.quality);
    int ph = (h + kBlock - 1) / kBlock * kBlock;
    int pw = (w + kBlock - 1) / kBlock * kBlock;
    int nblocks = 3 * (ph / kBlock) * (pw / kBlock);
    std::vector<int32_t> coeffs(size_t(nblocks) * kBlock * kBlock, 0);

    ByteReader tr(tokens);
    for (int b = 0; b < nblocks; ++b) {
        int i = 0;
        while (true) {
            uint64_t run = get_varint(tr);
            if (run == kEob) break;
            i += int(run);
            require(i < kBlock * kBlock, ErrKind::format,
                    "toy-dct payload: coefficient index overrun");
            int64_t v = zz_decode(get_varint(tr));
            coeffs[size_t(b) * kBlock * kBlock + i] = int32_t(v);
            ++i;
        }
    }
    require(tr.remaining() == 0, ErrKind::format,
            "toy-dct payload: trailing token bytes");
    return reconstruct(coeffs, ph, pw, h, w, step);
}

}  // namespace umic
