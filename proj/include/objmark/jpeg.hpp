#pragma once

#include <array>

#include "objmark/raster.hpp"

namespace objmark {

/// Quantization table for the given quality (1..100), natural row-major
/// order, using the conventional linear scaling of the standard tables.
std::array<int, 64> jpeg_quant_table(int quality, bool chroma);

/// Baseline JPEG-style lossy round trip: 8-bit YCbCr, 4:2:0 chroma
/// subsampling, 8x8 DCT, quantization at `quality`, and back. No entropy
/// coding, which is lossless and therefore irrelevant to the distortion.
Image jpeg_roundtrip(const Image& image, int quality);

}  // namespace objmark
