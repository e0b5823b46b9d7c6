#pragma once

#include "codec/registry.hpp"

namespace umic {

// 8x8 block-DCT codec with one uniform quantizer step per quality factor,
// zigzag scan, run-length + varint symbol coding and a zlib pass. Low QF
// produces the blocking artifacts the perception compensator is trained
// to remove.
class ToyDctCodec : public BasicCodec {
public:
    std::pair<Bytes, ImageBuffer> encode(const ImageBuffer& image,
                                         const CodecDescriptor& d) override;
    ImageBuffer decode(const Bytes& payload, const CodecDescriptor& d) override;

    static double quant_step(double qf);
};

}  // namespace umic
