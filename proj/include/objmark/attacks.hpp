#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "objmark/raster.hpp"

namespace objmark {

/// One cropping-paste composition: the object is rotated about its centroid,
/// scaled, then shifted by `paste_offset` into the background frame.
struct AttackSpec {
    double rotation = 0.0;  // radians
    double scale = 1.0;
    Point paste_offset;
    int background_id = 0;

    bool operator==(const AttackSpec&) const = default;
};

struct AttackRanges {
    double rotation_min = -0.7853981633974483;  // -45 degrees
    double rotation_max = 0.7853981633974483;
    double scale_min = 0.75;
    double scale_max = 1.5;

    /// Throws invalid_argument unless the ranges are ordered and lie within
    /// |rotation| <= pi/4, scale in [0.75, 1.5].
    void validate() const;
};

enum class DistortionKind {
    none,
    gaussian_blur,
    gaussian_noise,
    jpeg,
    median_blur,
    salt_pepper,
    brightness,
    contrast,
    saturation,
    hue,
};

const char* to_string(DistortionKind kind);
DistortionKind parse_distortion_kind(const std::string& name);

struct DistortionSpec {
    DistortionKind kind = DistortionKind::none;
    double parameter = 0.0;

    /// Throws invalid_argument when the parameter is outside the kind's range.
    void validate() const;
    /// e.g. "jpeg=50", "none".
    std::string label() const;
    /// Parses "kind=value" or "none".
    static DistortionSpec parse(const std::string& text);

    bool operator==(const DistortionSpec&) const = default;
};

/// A distortion whose parameter is drawn per image from [lo, hi] (on a grid
/// of `step` when step > 0). A degenerate range is a fixed parameter.
struct DistortionChoice {
    std::string label;
    DistortionKind kind = DistortionKind::none;
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;

    DistortionSpec sample(std::uint64_t seed) const;
};

/// The evaluation bank: none plus nine single distortions at their test
/// parameters (JPEG quality drawn from 10..90 in steps of 10).
std::vector<DistortionChoice> table2_bank();

/// As table2_bank(), with JPEG expanded into one fixed entry per quality.
std::vector<DistortionChoice> table2_bank_per_quality();

/// Training-time noise layers: blur sigma <= 2, noise sigma <= 0.05,
/// JPEG quality in {50, 75}.
std::vector<DistortionChoice> noise_layer_bank();

/// Similarity transform that realizes `spec` for an object whose mask is
/// `object_mask`.
SimilarityTransform attack_transform(const AttackSpec& spec, const BinaryMask& object_mask);

/// Draws rotation and scale uniformly from `ranges`, then a paste offset for
/// which the transformed object lies inside the background. Throws
/// placement_infeasible when no offset fits.
AttackSpec sample_attack(std::uint64_t seed, const BinaryMask& object_mask, int background_width,
                         int background_height, const AttackRanges& ranges = {},
                         int background_id = 0);

struct Composite {
    Image image;
    BinaryMask gt_mask;
};

/// Pastes the transformed object over `background`. Pixels outside the
/// transformed mask keep the background values bit-exactly.
Composite crop_paste(const Image& object_image, const BinaryMask& object_mask,
                     const Image& background, const AttackSpec& spec);

Image distort(const Image& image, const DistortionSpec& spec, std::uint64_t seed);

/// crop_paste followed by each distortion in order. The ground-truth mask is
/// geometric and is not distorted.
Composite attack_pipeline(const Image& object_image, const BinaryMask& object_mask,
                          const Image& background, const AttackSpec& attack,
                          const std::vector<DistortionSpec>& distortions, std::uint64_t seed);

// Individual distortions, exposed for testing.
std::vector<double> gaussian_kernel(double sigma);
Image gaussian_blur(const Image& image, double sigma);
Image median_blur(const Image& image, int kernel);

}  // namespace objmark
