#include "objmark/ssync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "objmark/error.hpp"

namespace objmark {

SyncAblation SyncAblation::from_id(int id) {
    SyncAblation a;
    switch (id) {
        case 1: a.skip_crop = true; break;
        case 2: a.skip_rotation = true; break;
        case 3: a.skip_scale = true; break;
        case 4: a.skip_translation = true; break;
        case 5:
            a.skip_rotation = true;
            a.skip_scale = true;
            a.skip_translation = true;
            break;
        case 6: break;
        default: fail(Errc::invalid_argument, "unknown ablation id " + std::to_string(id));
    }
    return a;
}

Image apply_mask_crop(const Image& image, const BinaryMask& mask) {
    require(image.width() == mask.width() && image.height() == mask.height(),
            "image and mask dimensions differ");
    if (mask.empty()) {
        fail(Errc::empty_region, "mask has no object pixels");
    }
    Image out = image;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (!mask.at(x, y)) {
                for (int c = 0; c < Image::channels; ++c) {
                    out.at(x, y, c) = 0.0;
                }
            }
        }
    }
    return out;
}

SyncRecord sync_transform(const BinaryMask& mask, const SyncOptions& options) {
    require(options.n >= 16, "canvas size must be at least 16");
    const MomentSet m = compute_moments(mask);

    SyncRecord record;
    record.source_centroid = centroid(m);
    record.source_phi = principal_orientation(m);
    record.degenerate_orientation = is_orientation_degenerate(m, options.degenerate_eps);
    record.source_mbs = min_bounding_square(mask);

    const bool rotate = !options.ablation.skip_rotation && !record.degenerate_orientation;
    const double rotation = rotate ? -record.source_phi : 0.0;
    const Point c = record.source_centroid;

    // Bounding rectangle of the object after the rotation step, in
    // coordinates relative to the centroid. Each pixel spans +-0.5 around
    // its rotated center.
    const double cs = std::cos(rotation);
    const double sn = std::sin(rotation);
    double min_x = std::numeric_limits<double>::max();
    double min_y = min_x;
    double max_x = std::numeric_limits<double>::lowest();
    double max_y = max_x;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            const double rx = x - c.x;
            const double ry = y - c.y;
            const double qx = cs * rx - sn * ry;
            const double qy = sn * rx + cs * ry;
            min_x = std::min(min_x, qx);
            max_x = std::max(max_x, qx);
            min_y = std::min(min_y, qy);
            max_y = std::max(max_y, qy);
        }
    }
    const double side = std::max(max_x - min_x, max_y - min_y) + 1.0;
    const Point box_center{0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};

    double scale = 1.0;
    Point anchor = box_center;
    if (!options.ablation.skip_scale) {
        scale = options.n / side;
        // Along the shorter side the square can slide and still bound the
        // object; slide it as close to centering the centroid as it goes.
        // Box edges are quantized to the pixel grid while the centroid is
        // not, so this also keeps re-synchronization stable.
        anchor.x = std::clamp(0.0, max_x + 0.5 - 0.5 * side, min_x - 0.5 + 0.5 * side);
        anchor.y = std::clamp(0.0, max_y + 0.5 - 0.5 * side, min_y - 0.5 + 0.5 * side);
    } else if (!options.ablation.skip_translation) {
        anchor = {0.0, 0.0};
    }

    const double center = 0.5 * (options.n - 1);
    record.transform.pivot = c;
    record.transform.rotation = rotation;
    record.transform.scale = scale;
    record.transform.translation = {center - c.x - scale * anchor.x,
                                    center - c.y - scale * anchor.y};
    return record;
}

SyncResult synchronize(const Image& image, const BinaryMask& mask, const SyncOptions& options) {
    require(image.width() == mask.width() && image.height() == mask.height(),
            "image and mask dimensions differ");
    if (mask.empty()) {
        fail(Errc::empty_region, "mask has no object pixels");
    }
    SyncRecord record = sync_transform(mask, options);
    return {resample_object(image, mask, record.transform, options.n, options.ablation.skip_crop), record};
}

SyncObject resample_object(const Image& image, const BinaryMask& mask,
                           const SimilarityTransform& transform, int n, bool skip_crop) {
    require(image.width() == mask.width() && image.height() == mask.height(),
            "image and mask dimensions differ");
    const std::vector<double> coverage = warp_coverage(mask, transform, n, n);
    BinaryMask out_mask(n, n);
    for (std::size_t i = 0; i < coverage.size(); ++i) {
        out_mask.data()[i] = coverage[i] >= 0.5 ? 1 : 0;
    }
    if (out_mask.empty()) {
        fail(Errc::empty_region, "object does not reach any canvas pixel");
    }

    Image canvas(n, n);
    if (skip_crop) {
        canvas = warp(image, transform, n, n, 0.0);
    } else {
        const Image weighted = warp(apply_mask_crop(image, mask), transform, n, n, 0.0);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * n + x;
                if (!out_mask.data()[i]) {
                    continue;
                }
                for (int ch = 0; ch < Image::channels; ++ch) {
                    canvas.at(x, y, ch) = weighted.at(x, y, ch) / coverage[i];
                }
            }
        }
    }
    return {std::move(canvas), std::move(out_mask)};
}

Image desynchronize_residual(const Image& residual, const SyncRecord& record, int host_width,
                             int host_height) {
    return warp(residual, record.transform.inverse(), host_width, host_height, 0.0);
}

}  // namespace objmark
