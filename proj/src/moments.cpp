#include "objmark/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "objmark/error.hpp"

namespace objmark {

namespace {

// 128-bit so that m00 * m20 cannot overflow for any realistic image size.
__extension__ typedef __int128 Wide;

double exact_ratio(Wide numerator, Wide denominator) {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

MomentSet compute_moments(const BinaryMask& mask) {
    Wide n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int y = 0; y < mask.height(); ++y) {
        // Row sums first; y is constant along the row.
        Wide rn = 0, rx = 0, rxx = 0;
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                rn += 1;
                rx += x;
                rxx += static_cast<Wide>(x) * x;
            }
        }
        if (rn == 0) {
            continue;
        }
        n += rn;
        sx += rx;
        sxx += rxx;
        sy += rn * y;
        syy += rn * y * y;
        sxy += rx * y;
    }
    if (n == 0) {
        fail(Errc::empty_region, "moments of an empty mask are undefined");
    }
    MomentSet m;
    m.m00 = static_cast<double>(n);
    m.m10 = static_cast<double>(sx);
    m.m01 = static_cast<double>(sy);
    m.mu20 = exact_ratio(n * sxx - sx * sx, n);
    m.mu02 = exact_ratio(n * syy - sy * sy, n);
    m.mu11 = exact_ratio(n * sxy - sx * sy, n);
    return m;
}

Point centroid(const MomentSet& m) noexcept { return {m.m10 / m.m00, m.m01 / m.m00}; }

double principal_orientation(const MomentSet& m) noexcept {
    const double mu00 = m.m00;
    double phi = 0.5 * std::atan2(2.0 * m.mu11 / mu00, (m.mu20 - m.mu02) / mu00);
    // atan2(-0, negative) yields -pi; keep the half-open range.
    if (phi <= -std::numbers::pi / 2) {
        phi += std::numbers::pi;
    }
    return phi;
}

bool is_orientation_degenerate(const MomentSet& m, double eps) noexcept {
    const double anisotropy = std::hypot(2.0 * m.mu11, m.mu20 - m.mu02) / (m.m00 * m.m00);
    return anisotropy < eps;
}

std::optional<PixelBox> bounding_box(const BinaryMask& mask) noexcept {
    PixelBox box{mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                box.x0 = std::min(box.x0, x);
                box.x1 = std::max(box.x1, x);
                box.y0 = std::min(box.y0, y);
                box.y1 = std::max(box.y1, y);
            }
        }
    }
    if (box.x1 < 0) {
        return std::nullopt;
    }
    return box;
}

SquareRect min_bounding_square(const BinaryMask& mask) {
    const auto box = bounding_box(mask);
    if (!box) {
        fail(Errc::empty_region, "bounding square of an empty mask is undefined");
    }
    const int side = std::max(box->width(), box->height());
    return {box->x0 - (side - box->width()) / 2, box->y0 - (side - box->height()) / 2, side};
}

}  // namespace objmark
