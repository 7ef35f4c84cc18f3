#include "objmark/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "objmark/error.hpp"

namespace objmark {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::empty_region: return "empty-region";
        case Errc::placement_infeasible: return "placement-infeasible";
        case Errc::capacity_exceeded: return "capacity-exceeded";
        case Errc::no_signal: return "no-signal";
        case Errc::io: return "io";
    }
    return "unknown";
}

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
    require(width >= 1 && height >= 1,
            "image dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height));
    data_.assign(pixel_count() * channels, fill);
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    require(width >= 1 && height >= 1,
            "mask dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void SimilarityTransform::validate() const {
    const bool finite = std::isfinite(translation.x) && std::isfinite(translation.y) &&
                        std::isfinite(rotation) && std::isfinite(scale) &&
                        std::isfinite(pivot.x) && std::isfinite(pivot.y);
    require(finite, "similarity transform has non-finite fields");
    require(scale > 0.0, "similarity transform scale must be positive");
}

Point SimilarityTransform::apply(Point p) const noexcept {
    const double c = std::cos(rotation) * scale;
    const double s = std::sin(rotation) * scale;
    const double rx = p.x - pivot.x;
    const double ry = p.y - pivot.y;
    return {pivot.x + c * rx - s * ry + translation.x, pivot.y + s * rx + c * ry + translation.y};
}

SimilarityTransform SimilarityTransform::inverse() const {
    validate();
    SimilarityTransform inv;
    inv.pivot = {pivot.x + translation.x, pivot.y + translation.y};
    inv.rotation = -rotation;
    inv.scale = 1.0 / scale;
    inv.translation = {-translation.x, -translation.y};
    return inv;
}

SimilarityTransform compose(const SimilarityTransform& second, const SimilarityTransform& first) {
    SimilarityTransform out;
    out.pivot = first.pivot;
    out.rotation = first.rotation + second.rotation;
    out.scale = first.scale * second.scale;
    // With the pivot fixed, the translation is wherever the pivot lands.
    const Point moved = second.apply(first.apply(first.pivot));
    out.translation = {moved.x - first.pivot.x, moved.y - first.pivot.y};
    return out;
}

namespace {

// Affine form of the destination-to-source map.
struct InverseMap {
    double a, b, c, d, tx, ty;

    explicit InverseMap(const SimilarityTransform& t) {
        t.validate();
        const SimilarityTransform inv = t.inverse();
        const double cs = std::cos(inv.rotation) * inv.scale;
        const double sn = std::sin(inv.rotation) * inv.scale;
        a = cs;
        b = -sn;
        c = sn;
        d = cs;
        tx = inv.pivot.x + inv.translation.x - (cs * inv.pivot.x - sn * inv.pivot.y);
        ty = inv.pivot.y + inv.translation.y - (sn * inv.pivot.x + cs * inv.pivot.y);
    }

    Point operator()(int u, int v) const noexcept {
        return {a * u + b * v + tx, c * u + d * v + ty};
    }
};

struct Taps {
    int x0, y0;
    double fx, fy;
};

inline Taps taps_at(Point p) noexcept {
    const double fx0 = std::floor(p.x);
    const double fy0 = std::floor(p.y);
    return {static_cast<int>(fx0), static_cast<int>(fy0), p.x - fx0, p.y - fy0};
}

inline bool in_range(double v, int hi) noexcept { return v > -2.0 && v < hi + 1.0; }

void check_out_dims(int w, int h) {
    require(w >= 1 && h >= 1, "warp output dimensions must be positive");
}

}  // namespace

Image warp(const Image& src, const SimilarityTransform& transform, int out_width, int out_height,
           double fill) {
    check_out_dims(out_width, out_height);
    const InverseMap map(transform);
    Image out(out_width, out_height, fill);
    const int sw = src.width();
    const int sh = src.height();
    for (int v = 0; v < out_height; ++v) {
        for (int u = 0; u < out_width; ++u) {
            const Point p = map(u, v);
            if (!in_range(p.x, sw) || !in_range(p.y, sh)) {
                continue;
            }
            const Taps t = taps_at(p);
            const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
            const double w10 = t.fx * (1.0 - t.fy);
            const double w01 = (1.0 - t.fx) * t.fy;
            const double w11 = t.fx * t.fy;
            const bool x0in = t.x0 >= 0 && t.x0 < sw;
            const bool x1in = t.x0 + 1 >= 0 && t.x0 + 1 < sw;
            const bool y0in = t.y0 >= 0 && t.y0 < sh;
            const bool y1in = t.y0 + 1 >= 0 && t.y0 + 1 < sh;
            for (int ch = 0; ch < Image::channels; ++ch) {
                const double v00 = (x0in && y0in) ? src.at(t.x0, t.y0, ch) : fill;
                const double v10 = (x1in && y0in) ? src.at(t.x0 + 1, t.y0, ch) : fill;
                const double v01 = (x0in && y1in) ? src.at(t.x0, t.y0 + 1, ch) : fill;
                const double v11 = (x1in && y1in) ? src.at(t.x0 + 1, t.y0 + 1, ch) : fill;
                out.at(u, v, ch) = w00 * v00 + w10 * v10 + w01 * v01 + w11 * v11;
            }
        }
    }
    return out;
}

std::vector<double> warp_coverage(const BinaryMask& src, const SimilarityTransform& transform,
                                  int out_width, int out_height) {
    check_out_dims(out_width, out_height);
    const InverseMap map(transform);
    std::vector<double> out(static_cast<std::size_t>(out_width) * out_height, 0.0);
    const int sw = src.width();
    const int sh = src.height();
    auto value = [&](int x, int y) -> double {
        return (x >= 0 && x < sw && y >= 0 && y < sh && src.at(x, y)) ? 1.0 : 0.0;
    };
    for (int v = 0; v < out_height; ++v) {
        for (int u = 0; u < out_width; ++u) {
            const Point p = map(u, v);
            if (!in_range(p.x, sw) || !in_range(p.y, sh)) {
                continue;
            }
            const Taps t = taps_at(p);
            const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
            const double w10 = t.fx * (1.0 - t.fy);
            const double w01 = (1.0 - t.fx) * t.fy;
            const double w11 = t.fx * t.fy;
            out[static_cast<std::size_t>(v) * out_width + u] =
                w00 * value(t.x0, t.y0) + w10 * value(t.x0 + 1, t.y0) +
                w01 * value(t.x0, t.y0 + 1) + w11 * value(t.x0 + 1, t.y0 + 1);
        }
    }
    return out;
}

BinaryMask warp_mask(const BinaryMask& src, const SimilarityTransform& transform, int out_width,
                     int out_height) {
    const std::vector<double> coverage = warp_coverage(src, transform, out_width, out_height);
    BinaryMask out(out_width, out_height);
    auto dst = out.data();
    for (std::size_t i = 0; i < coverage.size(); ++i) {
        dst[i] = coverage[i] >= 0.5 ? 1 : 0;
    }
    return out;
}

std::uint8_t to_u8(double v) noexcept {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

std::vector<std::uint8_t> to_rgb8(const Image& image) {
    std::vector<std::uint8_t> out(image.data().size());
    std::transform(image.data().begin(), image.data().end(), out.begin(), to_u8);
    return out;
}

Image from_rgb8(int width, int height, std::span<const std::uint8_t> rgb) {
    Image out(width, height);
    require(rgb.size() == out.data().size(), "rgb buffer size does not match dimensions");
    std::transform(rgb.begin(), rgb.end(), out.data().begin(),
                   [](std::uint8_t v) { return v / 255.0; });
    return out;
}

Image quantize(const Image& image) {
    Image out = image;
    for (double& v : out.data()) {
        v = to_u8(v) / 255.0;
    }
    return out;
}

Image clamp01(Image image) {
    for (double& v : image.data()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return image;
}

Image mask_to_image(const BinaryMask& mask) {
    Image out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const double v = mask.at(x, y) ? 1.0 : 0.0;
            for (int c = 0; c < Image::channels; ++c) {
                out.at(x, y, c) = v;
            }
        }
    }
    return out;
}

std::vector<double> luminance(const Image& image) {
    std::vector<double> out(image.pixel_count());
    const auto data = image.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.299 * data[3 * i] + 0.587 * data[3 * i + 1] + 0.114 * data[3 * i + 2];
    }
    return out;
}

}  // namespace objmark
