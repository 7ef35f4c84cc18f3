#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "objmark/attacks.hpp"
#include "objmark/codec.hpp"

namespace objmark {

struct CorpusSource {
    // Synthetic desk corpus unless image_dir is set.
    std::uint64_t seed = 7;
    int count = 50;
    std::filesystem::path image_dir;
    std::filesystem::path mask_dir;
    double min_occupancy = 0.25;
};

struct BackgroundSource {
    // Synthetic backgrounds unless dir is set.
    std::uint64_t seed = 11;
    int count = 8;
    std::filesystem::path dir;
    int width = 512;
    int height = 512;
};

struct EvalConfig {
    CorpusSource corpus;
    BackgroundSource backgrounds;
    int n = 256;
    int length = 30;
    std::uint64_t key = 0x5eed0b1ec7ULL;
    double alpha = kDefaultStrength;
    int block_size = 8;
    /// false: distortions act on the watermarked host with no paste attack.
    bool geometric_attack = true;
    AttackRanges ranges;
    /// Empty means a single "none" entry.
    std::vector<DistortionChoice> distortions;
    /// Adds a "combined" row per image with one distortion drawn uniformly
    /// from the bank.
    bool combined = false;
    std::uint64_t seed = 1;
    /// Ablation ids (see SyncAblation::from_id); 6 is the full pipeline.
    std::vector<int> ablations{6};
    /// Decode with masks perturbed to this IoU instead of the ground truth.
    std::optional<double> perturb_iou;
    /// Records whose embedding PSNR reaches this floor but whose SSIM is
    /// below 0.95 get status "ssim_flag".
    double psnr_floor = 38.0;
    std::filesystem::path output;

    /// Throws invalid_argument on out-of-range values or missing paths.
    void validate() const;

    /// Relative paths are resolved against `base_dir`.
    static EvalConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static EvalConfig load(const std::filesystem::path& path);
};

struct ResultRecord {
    std::string image_id;
    std::string attack;
    std::string distortion;
    double bar = 0.0;
    double psnr = 0.0;  // embedding stage, whole image
    double ssim = 0.0;  // embedding stage, whole image
    double mask_iou = 1.0;
    double decode_confidence = 0.0;
    int ablation_id = 6;
    double occupancy = 0.0;
    double mbpp = 0.0;  // message bits per 1000 object pixels
    std::string status = "ok";
    std::string group;  // aggregation key, not written to CSV
};

struct EvalResult {
    std::vector<ResultRecord> records;     // sorted by image, distortion, ablation
    std::vector<ResultRecord> aggregates;  // image_id "mean" or an occupancy bucket "occ_lo_hi"
};

EvalResult run_eval(const EvalConfig& config);

/// Header plus one line per record, then the aggregate rows. Floats use
/// four decimals; fields of failed records are left empty.
void write_csv(std::ostream& out, const EvalResult& result);
void write_csv(const std::filesystem::path& path, const EvalResult& result);

/// Whether a record carries a BAR (decoded, possibly with no signal).
bool is_scored(const ResultRecord& record) noexcept;

}  // namespace objmark
