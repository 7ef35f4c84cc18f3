#include "objmark/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "objmark/color.hpp"
#include "objmark/error.hpp"
#include "objmark/jpeg.hpp"
#include "objmark/moments.hpp"
#include "objmark/rng.hpp"

namespace objmark {

void AttackRanges::validate() const {
    constexpr double kMaxRotation = std::numbers::pi / 4 + 1e-12;
    require(rotation_min <= rotation_max && scale_min <= scale_max, "attack ranges are unordered");
    require(rotation_min >= -kMaxRotation && rotation_max <= kMaxRotation,
            "attack rotation range exceeds +-45 degrees");
    require(scale_min >= 0.75 - 1e-12 && scale_max <= 1.5 + 1e-12,
            "attack scale range exceeds [0.75, 1.5]");
}

namespace {

struct KindName {
    DistortionKind kind;
    const char* name;
};

constexpr std::array<KindName, 10> kKindNames = {{
    {DistortionKind::none, "none"},
    {DistortionKind::gaussian_blur, "gaussian_blur"},
    {DistortionKind::gaussian_noise, "gaussian_noise"},
    {DistortionKind::jpeg, "jpeg"},
    {DistortionKind::median_blur, "median_blur"},
    {DistortionKind::salt_pepper, "salt_pepper"},
    {DistortionKind::brightness, "brightness"},
    {DistortionKind::contrast, "contrast"},
    {DistortionKind::saturation, "saturation"},
    {DistortionKind::hue, "hue"},
}};

std::string format_parameter(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

const char* to_string(DistortionKind kind) {
    for (const auto& k : kKindNames) {
        if (k.kind == kind) {
            return k.name;
        }
    }
    return "unknown";
}

DistortionKind parse_distortion_kind(const std::string& name) {
    for (const auto& k : kKindNames) {
        if (name == k.name) {
            return k.kind;
        }
    }
    fail(Errc::invalid_argument, "unknown distortion kind '" + name + "'");
}

void DistortionSpec::validate() const {
    const double p = parameter;
    const std::string what = std::string("parameter ") + format_parameter(p) +
                             " out of range for " + to_string(kind);
    switch (kind) {
        case DistortionKind::none: return;
        case DistortionKind::gaussian_blur: require(p > 0.0 && p <= 3.0, what); return;
        case DistortionKind::gaussian_noise: require(p > 0.0 && p <= 0.05, what); return;
        case DistortionKind::jpeg:
            require(p >= 10.0 && p <= 90.0 && p == std::floor(p), what);
            return;
        case DistortionKind::median_blur: require(p == 3.0 || p == 5.0, what); return;
        case DistortionKind::salt_pepper: require(p > 0.0 && p <= 0.1, what); return;
        case DistortionKind::brightness:
        case DistortionKind::contrast:
        case DistortionKind::saturation: require(p >= 0.8 && p <= 1.2, what); return;
        case DistortionKind::hue: require(p >= -0.1 && p <= 0.1, what); return;
    }
}

std::string DistortionSpec::label() const {
    if (kind == DistortionKind::none) {
        return "none";
    }
    return std::string(to_string(kind)) + "=" + format_parameter(parameter);
}

DistortionSpec DistortionSpec::parse(const std::string& text) {
    DistortionSpec spec;
    const auto eq = text.find('=');
    spec.kind = parse_distortion_kind(text.substr(0, eq));
    if (spec.kind != DistortionKind::none) {
        require(eq != std::string::npos, "distortion '" + text + "' needs a parameter");
        try {
            std::size_t used = 0;
            const std::string value = text.substr(eq + 1);
            spec.parameter = std::stod(value, &used);
            require(used == value.size(), "trailing characters in '" + text + "'");
        } catch (const std::logic_error&) {
            fail(Errc::invalid_argument, "bad distortion parameter in '" + text + "'");
        }
    }
    spec.validate();
    return spec;
}

DistortionSpec DistortionChoice::sample(std::uint64_t seed) const {
    DistortionSpec spec{kind, lo};
    if (hi > lo) {
        Rng rng(seed);
        if (step > 0.0) {
            const auto count = static_cast<std::uint64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
            spec.parameter = lo + step * static_cast<double>(rng.below(count));
        } else {
            spec.parameter = rng.uniform(lo, hi);
        }
    }
    spec.validate();
    return spec;
}

std::vector<DistortionChoice> table2_bank() {
    return {
        {"none", DistortionKind::none, 0.0, 0.0},
        {"gaussian_blur", DistortionKind::gaussian_blur, 3.0, 3.0},
        {"gaussian_noise", DistortionKind::gaussian_noise, 0.05, 0.05},
        {"jpeg", DistortionKind::jpeg, 10.0, 90.0, 10.0},
        {"median_blur", DistortionKind::median_blur, 5.0, 5.0},
        {"salt_pepper", DistortionKind::salt_pepper, 0.1, 0.1},
        {"brightness", DistortionKind::brightness, 0.8, 1.2},
        {"contrast", DistortionKind::contrast, 0.8, 1.2},
        {"saturation", DistortionKind::saturation, 0.8, 1.2},
        {"hue", DistortionKind::hue, -0.1, 0.1},
    };
}

std::vector<DistortionChoice> table2_bank_per_quality() {
    std::vector<DistortionChoice> out;
    for (const auto& choice : table2_bank()) {
        if (choice.kind != DistortionKind::jpeg) {
            out.push_back(choice);
            continue;
        }
        for (int q = 10; q <= 90; q += 10) {
            out.push_back({"jpeg_" + std::to_string(q), DistortionKind::jpeg, double(q), double(q)});
        }
    }
    return out;
}

std::vector<DistortionChoice> noise_layer_bank() {
    return {
        {"gaussian_blur", DistortionKind::gaussian_blur, 1e-3, 2.0},
        {"gaussian_noise", DistortionKind::gaussian_noise, 1e-3, 0.05},
        {"jpeg", DistortionKind::jpeg, 50.0, 75.0, 25.0},
    };
}

SimilarityTransform attack_transform(const AttackSpec& spec, const BinaryMask& object_mask) {
    SimilarityTransform t;
    t.pivot = centroid(compute_moments(object_mask));
    t.rotation = spec.rotation;
    t.scale = spec.scale;
    t.translation = spec.paste_offset;
    t.validate();
    return t;
}

namespace {

struct Extent {
    double min_x = std::numeric_limits<double>::max();
    double min_y = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double max_y = std::numeric_limits<double>::lowest();
};

// Bounds of the transformed object pixel centers.
Extent transformed_extent(const BinaryMask& mask, const SimilarityTransform& t) {
    Extent e;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            const Point p = t.apply({double(x), double(y)});
            e.min_x = std::min(e.min_x, p.x);
            e.max_x = std::max(e.max_x, p.x);
            e.min_y = std::min(e.min_y, p.y);
            e.max_y = std::max(e.max_y, p.y);
        }
    }
    return e;
}

bool fits(const Extent& e, int width, int height) {
    return e.min_x >= 0.0 && e.min_y >= 0.0 && e.max_x <= width - 1.0 && e.max_y <= height - 1.0;
}

}  // namespace

AttackSpec sample_attack(std::uint64_t seed, const BinaryMask& object_mask, int background_width,
                         int background_height, const AttackRanges& ranges, int background_id) {
    ranges.validate();
    require(background_width >= 1 && background_height >= 1, "background dimensions must be positive");
    Rng rng(seed);
    AttackSpec spec;
    spec.background_id = background_id;
    spec.rotation = ranges.rotation_min == ranges.rotation_max
                        ? ranges.rotation_min
                        : rng.uniform(ranges.rotation_min, ranges.rotation_max);
    spec.scale = ranges.scale_min == ranges.scale_max ? ranges.scale_min
                                                      : rng.uniform(ranges.scale_min, ranges.scale_max);

    AttackSpec unshifted = spec;
    const SimilarityTransform base = attack_transform(unshifted, object_mask);
    const Extent e = transformed_extent(object_mask, base);
    const double lo_x = -e.min_x;
    const double hi_x = background_width - 1.0 - e.max_x;
    const double lo_y = -e.min_y;
    const double hi_y = background_height - 1.0 - e.max_y;

    constexpr int kMaxTries = 100;
    for (int attempt = 0; attempt < kMaxTries && lo_x <= hi_x && lo_y <= hi_y; ++attempt) {
        spec.paste_offset = {lo_x + (hi_x - lo_x) * rng.uniform(), lo_y + (hi_y - lo_y) * rng.uniform()};
        if (fits(transformed_extent(object_mask, attack_transform(spec, object_mask)),
                 background_width, background_height)) {
            return spec;
        }
    }
    fail(Errc::placement_infeasible, "transformed object does not fit inside the background");
}

Composite crop_paste(const Image& object_image, const BinaryMask& object_mask,
                     const Image& background, const AttackSpec& spec) {
    require(object_image.width() == object_mask.width() &&
                object_image.height() == object_mask.height(),
            "object image and mask dimensions differ");
    const SimilarityTransform t = attack_transform(spec, object_mask);
    if (!fits(transformed_extent(object_mask, t), background.width(), background.height())) {
        fail(Errc::placement_infeasible, "attack places the object outside the background");
    }
    const int w = background.width();
    const int h = background.height();
    BinaryMask gt = warp_mask(object_mask, t, w, h);
    const Image moved = warp(object_image, t, w, h, 0.0);
    Image composite = background;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (gt.at(x, y)) {
                for (int c = 0; c < Image::channels; ++c) {
                    composite.at(x, y, c) = moved.at(x, y, c);
                }
            }
        }
    }
    return {std::move(composite), std::move(gt)};
}

std::vector<double> gaussian_kernel(double sigma) {
    require(sigma > 0.0, "blur sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

Image gaussian_blur(const Image& image, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int w = image.width();
    const int h = image.height();
    Image tmp(w, h);
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < Image::channels; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    s += k[i + radius] * image.at(std::clamp(x + i, 0, w - 1), y, c);
                }
                tmp.at(x, y, c) = s;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < Image::channels; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    s += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
                }
                out.at(x, y, c) = s;
            }
        }
    }
    return out;
}

Image median_blur(const Image& image, int kernel) {
    require(kernel == 3 || kernel == 5, "median kernel must be 3 or 5");
    const int r = kernel / 2;
    const int w = image.width();
    const int h = image.height();
    Image out(w, h);
    std::vector<double> window(static_cast<std::size_t>(kernel) * kernel);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < Image::channels; ++c) {
                std::size_t n = 0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        window[n++] =
                            image.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1), c);
                    }
                }
                auto mid = window.begin() + static_cast<std::ptrdiff_t>(n / 2);
                std::nth_element(window.begin(), mid, window.end());
                out.at(x, y, c) = *mid;
            }
        }
    }
    return out;
}

namespace {

Image per_pixel_hsv(const Image& image, double hue_shift, double saturation_factor) {
    Image out = image;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            Hsv hsv = rgb_to_hsv(std::clamp(image.at(x, y, 0), 0.0, 1.0),
                                 std::clamp(image.at(x, y, 1), 0.0, 1.0),
                                 std::clamp(image.at(x, y, 2), 0.0, 1.0));
            hsv.h += hue_shift;
            hsv.s = std::clamp(hsv.s * saturation_factor, 0.0, 1.0);
            hsv_to_rgb(hsv, out.at(x, y, 0), out.at(x, y, 1), out.at(x, y, 2));
        }
    }
    return out;
}

}  // namespace

Image distort(const Image& image, const DistortionSpec& spec, std::uint64_t seed) {
    spec.validate();
    const double p = spec.parameter;
    switch (spec.kind) {
        case DistortionKind::none: return image;
        case DistortionKind::gaussian_blur: return gaussian_blur(image, p);
        case DistortionKind::gaussian_noise: {
            Rng rng(seed);
            Image out = image;
            for (double& v : out.data()) {
                v += p * rng.normal();
            }
            return clamp01(std::move(out));
        }
        case DistortionKind::jpeg: return jpeg_roundtrip(image, static_cast<int>(p));
        case DistortionKind::median_blur: return median_blur(image, static_cast<int>(p));
        case DistortionKind::salt_pepper: {
            Rng rng(seed);
            Image out = image;
            for (int y = 0; y < out.height(); ++y) {
                for (int x = 0; x < out.width(); ++x) {
                    if (rng.uniform() >= p) {
                        continue;
                    }
                    const double v = rng.coin() ? 1.0 : 0.0;
                    for (int c = 0; c < Image::channels; ++c) {
                        out.at(x, y, c) = v;
                    }
                }
            }
            return out;
        }
        case DistortionKind::brightness: {
            Image out = image;
            for (double& v : out.data()) {
                v *= p;
            }
            return clamp01(std::move(out));
        }
        case DistortionKind::contrast: {
            const std::vector<double> lum = luminance(image);
            double mean = 0.0;
            for (double v : lum) {
                mean += v;
            }
            mean /= static_cast<double>(lum.size());
            Image out = image;
            for (double& v : out.data()) {
                v = (v - mean) * p + mean;
            }
            return clamp01(std::move(out));
        }
        case DistortionKind::saturation: return per_pixel_hsv(image, 0.0, p);
        case DistortionKind::hue: return per_pixel_hsv(image, p, 1.0);
    }
    return image;
}

Composite attack_pipeline(const Image& object_image, const BinaryMask& object_mask,
                          const Image& background, const AttackSpec& attack,
                          const std::vector<DistortionSpec>& distortions, std::uint64_t seed) {
    Composite out = crop_paste(object_image, object_mask, background, attack);
    for (std::size_t i = 0; i < distortions.size(); ++i) {
        out.image = distort(out.image, distortions[i], mix_seed(seed, i));
    }
    return out;
}

}  // namespace objmark
