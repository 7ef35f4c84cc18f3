#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "objmark/raster.hpp"
#include "objmark/ssync.hpp"

namespace objmark {

struct MessageBits {
    std::vector<std::uint8_t> bits;  // each 0 or 1

    std::size_t size() const noexcept { return bits.size(); }

    /// "0x" prefix parses hex (4 bits per digit, MSB first); otherwise the
    /// text must be a string of '0'/'1'.
    static MessageBits parse(const std::string& text);
    static MessageBits random(std::uint64_t seed, std::size_t length);

    std::string to_bit_string() const;
    /// Hex digits, MSB first, zero-padded at the end to a multiple of 4 bits.
    std::string to_hex() const;

    bool operator==(const MessageBits&) const = default;
};

/// Per-block carrier: a zero-mean half-cosine across the block, varying
/// along x (horizontal) or y, with a keyed sign.
struct Chip {
    bool horizontal = true;
    std::int8_t sign = 1;
};

inline constexpr double kDefaultStrength = 6.0 / 255.0;

struct EmbedPlan {
    std::uint64_t key = 0;
    int n = 256;
    int block_size = 8;
    int length = 30;
    double strength = kDefaultStrength;
    /// Informed gain: a bit whose host content pulls its decoder statistic
    /// below `bit_margin` (in units of the unboosted signal) is embedded with
    /// up to `max_gain` times the strength. max_gain = 1 disables this.
    double bit_margin = 0.5;
    double max_gain = 3.0;
    std::vector<int> bit_of_block;  // row-major block index -> bit index
    std::vector<Chip> chips;        // row-major block index -> carrier

    int blocks_per_side() const noexcept { return n / block_size; }
    int block_count() const noexcept { return blocks_per_side() * blocks_per_side(); }

    /// Carrier value in [-1, 1] at pixel (dx, dy) inside block `block`.
    double chip_value(int block, int dx, int dy) const noexcept;
};

/// Blocks are visited in serpentine order and dealt out in rounds of
/// `length`; each round assigns its blocks to a fresh keyed permutation of
/// the bits, so every run of `length` neighbouring blocks carries each bit
/// once. Throws capacity_exceeded when length exceeds the block count.
EmbedPlan make_plan(std::uint64_t key, int n = 256, int block_size = 8, int length = 30,
                    double strength = kDefaultStrength);

struct EmbedResult {
    SyncObject watermarked;
    Image residual;       // R x M, luminance-only (equal on all channels)
    double masked_psnr;   // watermarked vs input over the object mask
    std::vector<double> bit_gain;  // amplitude multiplier per bit
};

/// O_w = clamp(O + R x M). Each block carries chip * strength * gain(bit) *
/// (2 bit - 1); see EmbedPlan::bit_margin for the gain.
EmbedResult embed(const SyncObject& object, const MessageBits& message, const EmbedPlan& plan);

struct DecodeReport {
    MessageBits bits;
    std::vector<double> per_bit_confidence;
    int used_blocks = 0;
    bool rotated_180 = false;
    double mean_confidence = 0.0;
};

struct ExtractOptions {
    /// Below this mean confidence the 180-degree rotated canvas is also tried.
    double flip_threshold = 0.1;
    /// Blocks with less object coverage than this are ignored.
    double min_block_coverage = 0.5;
    /// decode_from_host only: relative canvas scale corrections tried around
    /// the synchronized scale, as a hill climb on mean confidence with this
    /// step and at most this many steps either way. 0 steps disables it.
    /// Not applied when scale normalization is skipped.
    double scale_step = 0.01;
    int scale_steps = 5;
};

/// Matched-filter decoding. Confidence is normalized so that an unattacked
/// block contributes 1. Throws no_signal when no block qualifies.
DecodeReport extract(const SyncObject& object, const EmbedPlan& plan, bool degenerate_orientation,
                     const ExtractOptions& options = {});

/// Synchronizes the host, embeds on the canvas, maps the residual back and
/// adds it inside the host mask. Pixels outside the mask are untouched.
Image embed_into_host(const Image& host, const BinaryMask& mask, const MessageBits& message,
                      const EmbedPlan& plan, const SyncOptions& sync = {});

/// synchronize() followed by extract(). With a scale search configured, the
/// object is resampled at corrected scales about its canvas centroid and the
/// most confident decode wins.
DecodeReport decode_from_host(const Image& image, const BinaryMask& mask, const EmbedPlan& plan,
                              const SyncOptions& sync = {}, const ExtractOptions& options = {});

}  // namespace objmark
