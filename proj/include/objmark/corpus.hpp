#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "objmark/raster.hpp"

namespace objmark {

struct CorpusItem {
    std::string id;
    Image image;
    BinaryMask mask;
};

enum class ShapeKind { ellipse, bar, polygon, blob };

const char* to_string(ShapeKind kind);

/// Fraction of pixels set.
double occupancy(const BinaryMask& mask);

/// One synthetic object image. The shape kind cycles with `index` and the
/// target occupancy bucket (25-30, 30-40, 40-50, 50-60 %) with index / 4.
/// Shapes are elongated enough for a stable principal axis and their axis
/// lies within about 40 degrees of horizontal.
CorpusItem make_desk_item(std::uint64_t seed, int index, int size = 256);

/// `count` items named obj_000, obj_001, ...
std::vector<CorpusItem> make_desk_corpus(std::uint64_t seed, int count = 50, int size = 256);

/// Smooth textured backgrounds for paste attacks.
Image make_background(std::uint64_t seed, int width = 512, int height = 512);
std::vector<Image> make_backgrounds(std::uint64_t seed, int count, int width = 512, int height = 512);

Image resize_bilinear(const Image& image, int width, int height);
/// Nearest-neighbour resize.
BinaryMask resize_mask(const BinaryMask& mask, int width, int height);

/// Loads name-matched PNG pairs from an image directory and a mask
/// directory (DUTS layout: masks share the image's stem). Everything is
/// resized to size x size; items whose mask covers less than
/// `min_occupancy` are skipped. Items are sorted by id.
std::vector<CorpusItem> load_corpus(const std::filesystem::path& image_dir,
                                    const std::filesystem::path& mask_dir, int size = 256,
                                    double min_occupancy = 0.25);

/// Loads every PNG in a directory (sorted by name), resized to the given size.
std::vector<Image> load_backgrounds(const std::filesystem::path& dir, int width = 512,
                                    int height = 512);

/// Writes <dir>/images/<id>.png and <dir>/masks/<id>.png.
void write_corpus(const std::vector<CorpusItem>& items, const std::filesystem::path& dir);

}  // namespace objmark
