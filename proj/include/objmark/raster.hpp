#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace objmark {

// Coordinates: x is the column index, y the row index, origin top-left,
// pixel centers at integer coordinates. A positive rotation angle turns +x
// towards +y, which with y pointing down is visually clockwise.

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

/// RGB raster in the processing domain. Values are nominally in [0, 1] but
/// are not clamped, so the same type carries signed residuals.
class Image {
public:
    static constexpr int channels = 3;

    Image(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    double& at(int x, int y, int c) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels + c];
    }
    double at(int x, int y, int c) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels + c];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> data_;
};

/// Per-pixel object membership.
class BinaryMask {
public:
    BinaryMask(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return data_.size(); }

    bool at(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool v) noexcept {
        data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
    }

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

/// Similarity transform mapping source to destination coordinates:
///
///     p' = pivot + scale * R(rotation) * (p - pivot) + translation
struct SimilarityTransform {
    Point translation;
    double rotation = 0.0;
    double scale = 1.0;
    Point pivot;

    static SimilarityTransform identity() { return {}; }

    /// Throws invalid_argument unless scale > 0 and all fields are finite.
    void validate() const;

    Point apply(Point p) const noexcept;
    SimilarityTransform inverse() const;
};

/// Returns the transform equivalent to applying `first`, then `second`.
/// The result keeps `first.pivot` as its pivot.
SimilarityTransform compose(const SimilarityTransform& second, const SimilarityTransform& first);

/// Resamples `src` through `transform`: each output pixel takes the bilinear
/// interpolation of `src` at the inverse-mapped location. Interpolation taps
/// that fall outside `src` contribute `fill`.
Image warp(const Image& src, const SimilarityTransform& transform, int out_width, int out_height,
           double fill = 0.0);

/// Bilinear coverage of the mask (as a 0/1 field) at every output pixel, with
/// the same sampling as warp() and zero fill.
std::vector<double> warp_coverage(const BinaryMask& src, const SimilarityTransform& transform,
                                  int out_width, int out_height);

/// warp_coverage() thresholded at 0.5.
BinaryMask warp_mask(const BinaryMask& src, const SimilarityTransform& transform, int out_width,
                     int out_height);

// 8-bit conversions: v = v8 / 255, v8 = round-half-up(clamp(v, 0, 1) * 255).
std::uint8_t to_u8(double v) noexcept;
std::vector<std::uint8_t> to_rgb8(const Image& image);
Image from_rgb8(int width, int height, std::span<const std::uint8_t> rgb);

/// Round trip through 8-bit storage, as happens whenever an image is saved.
Image quantize(const Image& image);

/// Per-channel clamp to [0, 1].
Image clamp01(Image image);

/// Mask as a 3-channel 0/1 image.
Image mask_to_image(const BinaryMask& mask);

/// Luminance plane (Rec. 601 weights), row-major.
std::vector<double> luminance(const Image& image);

}  // namespace objmark
