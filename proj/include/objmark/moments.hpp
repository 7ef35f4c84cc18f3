#pragma once

#include <optional>

#include "objmark/raster.hpp"

namespace objmark {

/// Region moments of a binary mask, summed over object pixels at their
/// integer (x, y) centers.
struct MomentSet {
    double m00 = 0.0;
    double m10 = 0.0;
    double m01 = 0.0;
    double mu11 = 0.0;
    double mu20 = 0.0;
    double mu02 = 0.0;
};

/// Axis-aligned square; may extend past the image on any side.
struct SquareRect {
    int x0 = 0;
    int y0 = 0;
    int side = 1;

    bool operator==(const SquareRect&) const = default;
};

/// Inclusive pixel bounds of the object pixels.
struct PixelBox {
    int x0, y0, x1, y1;
    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
};

inline constexpr double kDefaultDegenerateEps = 1e-3;

/// Throws empty_region for a mask with no object pixels.
///
/// Raw moments are integers; the central moments are formed from the exact
/// integer numerator (m00*m20 - m10^2 and friends) divided by m00, so results
/// do not depend on summation order. Up to 512 x 512 the numerator converts
/// to double exactly and the division is the only rounding.
MomentSet compute_moments(const BinaryMask& mask);

Point centroid(const MomentSet& m) noexcept;

/// 0.5 * atan2(2 mu11 / mu00, (mu20 - mu02) / mu00), in (-pi/2, pi/2].
double principal_orientation(const MomentSet& m) noexcept;

/// True when the normalized second-moment anisotropy
/// sqrt((2 mu11)^2 + (mu20 - mu02)^2) / m00^2 is below eps, i.e. the
/// orientation is numerically meaningless.
bool is_orientation_degenerate(const MomentSet& m, double eps = kDefaultDegenerateEps) noexcept;

std::optional<PixelBox> bounding_box(const BinaryMask& mask) noexcept;

/// Tight bounding rectangle padded to a square, rectangle centered; an odd
/// leftover pixel goes right/bottom. Throws empty_region for an empty mask.
SquareRect min_bounding_square(const BinaryMask& mask);

}  // namespace objmark
