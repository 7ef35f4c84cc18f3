#pragma once

#include "objmark/moments.hpp"
#include "objmark/raster.hpp"

namespace objmark {

/// Which normalization steps to skip. Default-constructed means the full
/// pipeline runs.
struct SyncAblation {
    bool skip_crop = false;
    bool skip_translation = false;
    bool skip_rotation = false;
    bool skip_scale = false;

    /// Ablation rows: 1 crop, 2 rotation, 3 scale, 4 translation,
    /// 5 rotation+scale+translation, 6 none skipped.
    static SyncAblation from_id(int id);

    bool operator==(const SyncAblation&) const = default;
};

struct SyncOptions {
    int n = 256;
    SyncAblation ablation;
    double degenerate_eps = kDefaultDegenerateEps;
};

/// Object normalized onto an n x n canvas.
struct SyncObject {
    Image canvas;
    BinaryMask mask;
};

struct SyncRecord {
    SimilarityTransform transform;  // host frame -> canvas
    Point source_centroid;
    double source_phi = 0.0;
    SquareRect source_mbs;  // bounding square of the host-frame mask
    bool degenerate_orientation = false;
};

struct SyncResult {
    SyncObject object;
    SyncRecord record;
};

/// Zeroes every pixel outside the mask.
Image apply_mask_crop(const Image& image, const BinaryMask& mask);

/// Host-frame -> canvas transform for a mask, without resampling anything.
SyncRecord sync_transform(const BinaryMask& mask, const SyncOptions& options = {});

/// Removes the background, moves the object to the canvas center, rotates
/// its principal axis onto +x and scales its minimum bounding square to
/// fill the n x n canvas. Along the object's shorter extent the square is
/// placed to put the centroid as near the canvas center as the square
/// allows, so the centroid lands exactly on the center unless the object is
/// strongly lopsided across its short axis.
///
/// The geometric steps are composed into one similarity transform and the
/// image is resampled once. Resampling is coverage-normalized: a canvas
/// pixel is the bilinear average of object pixels only, so the zeroed
/// background never bleeds into the object edge.
///
/// Translation normalization only determines the result when scale
/// normalization is skipped: placing the bounding square onto the canvas
/// already fixes the position. With both skipped, the bounding square center
/// lands on the canvas center at the original size.
SyncResult synchronize(const Image& image, const BinaryMask& mask, const SyncOptions& options = {});

/// The resampling step of synchronize() for a given host-to-canvas
/// transform. Throws empty_region when no canvas pixel is covered.
SyncObject resample_object(const Image& image, const BinaryMask& mask,
                           const SimilarityTransform& transform, int n, bool skip_crop = false);

/// Carries a canvas-domain residual back into the host frame (zero fill).
Image desynchronize_residual(const Image& residual, const SyncRecord& record, int host_width,
                             int host_height);

}  // namespace objmark
