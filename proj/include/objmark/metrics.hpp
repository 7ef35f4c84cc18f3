#pragma once

#include <cstdint>

#include "objmark/raster.hpp"

namespace objmark {

struct MessageBits;

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all channels; kPsnrCap for identical inputs.
double psnr(const Image& a, const Image& b);
/// As psnr(), restricted to pixels where `mask` is set.
double psnr(const Image& a, const Image& b, const BinaryMask& mask);

/// Mean SSIM of the luminance planes: 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, valid window positions only.
double ssim(const Image& a, const Image& b);

/// Fraction of equal bits.
double bar(const MessageBits& decoded, const MessageBits& truth);

/// |a & b| / |a | b|; two empty masks give 1.
double iou(const BinaryMask& a, const BinaryMask& b);

struct PerturbResult {
    BinaryMask mask;
    double achieved_iou = 1.0;
    bool converged = true;
    int iterations = 0;
};

/// Emulates segmentation error: alternates randomized boundary dilation and
/// erosion until the IoU against the input drops to `target_iou`
/// (within 0.02), or 50 steps pass. target_iou must be in (0.5, 1].
PerturbResult perturb_mask(const BinaryMask& mask, double target_iou, std::uint64_t seed);

}  // namespace objmark
