#pragma once

#include <filesystem>

#include "objmark/raster.hpp"

namespace objmark {

/// Reads any PNG as 8-bit RGB (alpha is composited over black, gray is
/// expanded).
Image read_png_image(const std::filesystem::path& path);

/// Reads any PNG as an 8-bit gray mask; values >= 128 are object pixels.
BinaryMask read_png_mask(const std::filesystem::path& path);

/// Writes 8-bit RGB after clamping and rounding.
void write_png_image(const std::filesystem::path& path, const Image& image);

/// Writes an 8-bit gray PNG with 0 for background, 255 for object.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace objmark
