#include "objmark/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

#include "objmark/error.hpp"
#include "objmark/metrics.hpp"
#include "objmark/rng.hpp"

namespace objmark {

MessageBits MessageBits::parse(const std::string& text) {
    MessageBits msg;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        for (std::size_t i = 2; i < text.size(); ++i) {
            const char ch = text[i];
            int v;
            if (ch >= '0' && ch <= '9') {
                v = ch - '0';
            } else if (ch >= 'a' && ch <= 'f') {
                v = ch - 'a' + 10;
            } else if (ch >= 'A' && ch <= 'F') {
                v = ch - 'A' + 10;
            } else {
                fail(Errc::invalid_argument, "bad hex digit in message '" + text + "'");
            }
            for (int b = 3; b >= 0; --b) {
                msg.bits.push_back(static_cast<std::uint8_t>((v >> b) & 1));
            }
        }
    } else {
        for (const char ch : text) {
            require(ch == '0' || ch == '1', "message must be a 0/1 string or 0x-prefixed hex");
            msg.bits.push_back(static_cast<std::uint8_t>(ch - '0'));
        }
    }
    require(!msg.bits.empty(), "message is empty");
    return msg;
}

MessageBits MessageBits::random(std::uint64_t seed, std::size_t length) {
    Rng rng(seed);
    MessageBits msg;
    msg.bits.resize(length);
    for (auto& b : msg.bits) {
        b = rng.coin() ? 1 : 0;
    }
    return msg;
}

std::string MessageBits::to_bit_string() const {
    std::string out;
    out.reserve(bits.size());
    for (const auto b : bits) {
        out.push_back(b ? '1' : '0');
    }
    return out;
}

std::string MessageBits::to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "0x";
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int v = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            v = (v << 1) | (i + j < bits.size() ? bits[i + j] : 0);
        }
        out.push_back(kDigits[v]);
    }
    return out;
}

double EmbedPlan::chip_value(int block, int dx, int dy) const noexcept {
    const Chip& chip = chips[static_cast<std::size_t>(block)];
    const int t = chip.horizontal ? dx : dy;
    return chip.sign * std::cos(std::numbers::pi * (t + 0.5) / block_size);
}

EmbedPlan make_plan(std::uint64_t key, int n, int block_size, int length, double strength) {
    require(block_size >= 2, "block size must be at least 2");
    require(n >= block_size && n % block_size == 0, "canvas size must be a multiple of the block size");
    require(length >= 1, "message length must be positive");
    require(strength >= 0.0 && strength <= 1.0, "strength must be in [0, 1]");

    EmbedPlan plan;
    plan.key = key;
    plan.n = n;
    plan.block_size = block_size;
    plan.length = length;
    plan.strength = strength;

    const int side = plan.blocks_per_side();
    const int count = plan.block_count();
    if (length > count) {
        fail(Errc::capacity_exceeded, std::to_string(length) + " bits do not fit in " +
                                          std::to_string(count) + " blocks");
    }

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(count));
    for (int row = 0; row < side; ++row) {
        for (int i = 0; i < side; ++i) {
            const int col = row % 2 == 0 ? i : side - 1 - i;
            order.push_back(row * side + col);
        }
    }

    Rng rng(mix_seed(key, 1));
    plan.bit_of_block.assign(static_cast<std::size_t>(count), 0);
    std::vector<int> perm(static_cast<std::size_t>(length));
    for (int start = 0; start < count; start += length) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = length - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int j = 0; j < length && start + j < count; ++j) {
            plan.bit_of_block[order[start + j]] = perm[j];
        }
    }

    Rng chip_rng(mix_seed(key, 2));
    plan.chips.resize(static_cast<std::size_t>(count));
    for (Chip& chip : plan.chips) {
        chip.horizontal = chip_rng.coin();
        chip.sign = chip_rng.coin() ? 1 : -1;
    }
    return plan;
}

namespace {

void check_canvas(const SyncObject& object, const EmbedPlan& plan) {
    require(object.canvas.width() == plan.n && object.canvas.height() == plan.n &&
                object.mask.width() == plan.n && object.mask.height() == plan.n,
            "object canvas does not match the plan size");
}

struct BitStats {
    std::vector<double> mean;  // signed, in units of the plan strength
    std::vector<int> blocks;
    int used_blocks = 0;
};

BitStats bit_statistics(const SyncObject& object, const EmbedPlan& plan, double min_block_coverage) {
    const int b = plan.block_size;
    const int side = plan.blocks_per_side();
    const std::vector<double> lum = luminance(object.canvas);
    const auto mask = object.mask.data();
    const double min_count = min_block_coverage * b * b;

    BitStats stats;
    stats.mean.assign(static_cast<std::size_t>(plan.length), 0.0);
    stats.blocks.assign(static_cast<std::size_t>(plan.length), 0);

    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            const int block = by * side + bx;
            int n = 0;
            double lum_sum = 0.0;
            double chip_sum = 0.0;
            for (int dy = 0; dy < b; ++dy) {
                for (int dx = 0; dx < b; ++dx) {
                    const std::size_t i = static_cast<std::size_t>(by * b + dy) * plan.n + bx * b + dx;
                    if (mask[i]) {
                        ++n;
                        lum_sum += lum[i];
                        chip_sum += plan.chip_value(block, dx, dy);
                    }
                }
            }
            if (n == 0 || n < min_count) {
                continue;
            }
            const double lum_mean = lum_sum / n;
            const double chip_mean = chip_sum / n;
            double corr = 0.0;
            double energy = 0.0;
            for (int dy = 0; dy < b; ++dy) {
                for (int dx = 0; dx < b; ++dx) {
                    const std::size_t i = static_cast<std::size_t>(by * b + dy) * plan.n + bx * b + dx;
                    if (mask[i]) {
                        const double c = plan.chip_value(block, dx, dy);
                        corr += (lum[i] - lum_mean) * c;
                        energy += (c - chip_mean) * c;
                    }
                }
            }
            if (energy <= 1e-12) {
                continue;
            }
            const double unit = plan.strength > 0.0 ? plan.strength : 1.0;
            const int bit = plan.bit_of_block[static_cast<std::size_t>(block)];
            stats.mean[static_cast<std::size_t>(bit)] += corr / (unit * energy);
            stats.blocks[static_cast<std::size_t>(bit)] += 1;
            ++stats.used_blocks;
        }
    }
    for (std::size_t i = 0; i < stats.mean.size(); ++i) {
        if (stats.blocks[i] > 0) {
            stats.mean[i] /= stats.blocks[i];
        }
    }
    return stats;
}

DecodeReport correlate(const SyncObject& object, const EmbedPlan& plan, const ExtractOptions& options) {
    const BitStats stats = bit_statistics(object, plan, options.min_block_coverage);
    if (stats.used_blocks == 0) {
        fail(Errc::no_signal, "no block has enough object coverage to decode");
    }
    DecodeReport report;
    report.used_blocks = stats.used_blocks;
    report.bits.bits.resize(static_cast<std::size_t>(plan.length));
    report.per_bit_confidence.resize(static_cast<std::size_t>(plan.length));
    double total = 0.0;
    for (std::size_t i = 0; i < stats.mean.size(); ++i) {
        report.bits.bits[i] = stats.mean[i] > 0.0 ? 1 : 0;
        report.per_bit_confidence[i] = std::abs(stats.mean[i]);
        total += report.per_bit_confidence[i];
    }
    report.mean_confidence = total / static_cast<double>(plan.length);
    return report;
}

SyncObject rotate_180(const SyncObject& object) {
    const int n = object.canvas.width();
    SyncObject out{Image(n, n), BinaryMask(n, n)};
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            out.mask.set(n - 1 - x, n - 1 - y, object.mask.at(x, y));
            for (int c = 0; c < Image::channels; ++c) {
                out.canvas.at(n - 1 - x, n - 1 - y, c) = object.canvas.at(x, y, c);
            }
        }
    }
    return out;
}

}  // namespace

namespace {

SyncObject apply_residual(const SyncObject& object, const Image& residual) {
    SyncObject marked = object;
    const int n = object.canvas.width();
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (!object.mask.at(x, y)) {
                continue;
            }
            for (int c = 0; c < Image::channels; ++c) {
                const double r = residual.at(x, y, c);
                if (r != 0.0) {
                    marked.canvas.at(x, y, c) = std::clamp(object.canvas.at(x, y, c) + r, 0.0, 1.0);
                }
            }
        }
    }
    return marked;
}

Image build_residual(const SyncObject& object, const MessageBits& message, const EmbedPlan& plan,
                     const std::vector<double>& gain) {
    const int b = plan.block_size;
    const int side = plan.blocks_per_side();
    Image residual(plan.n, plan.n);
    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            const int block = by * side + bx;
            const auto bit = static_cast<std::size_t>(plan.bit_of_block[block]);
            const double amplitude = plan.strength * gain[bit] * (message.bits[bit] ? 1.0 : -1.0);
            for (int dy = 0; dy < b; ++dy) {
                for (int dx = 0; dx < b; ++dx) {
                    const int x = bx * b + dx;
                    const int y = by * b + dy;
                    if (!object.mask.at(x, y)) {
                        continue;
                    }
                    const double r = amplitude * plan.chip_value(block, dx, dy);
                    for (int c = 0; c < Image::channels; ++c) {
                        residual.at(x, y, c) = r;
                    }
                }
            }
        }
    }
    return residual;
}

}  // namespace

EmbedResult embed(const SyncObject& object, const MessageBits& message, const EmbedPlan& plan) {
    check_canvas(object, plan);
    require(message.size() == static_cast<std::size_t>(plan.length),
            "message length " + std::to_string(message.size()) + " does not match plan length " +
                std::to_string(plan.length));
    require(plan.max_gain >= 1.0, "max gain must be at least 1");
    const auto length = static_cast<std::size_t>(plan.length);
    std::vector<double> gain(length, 1.0);
    Image residual = build_residual(object, message, plan, gain);
    SyncObject marked = apply_residual(object, residual);

    // Raise the gain of bits the host works against, checking the result on
    // the clamped output; a second pass covers what clamping ate.
    const ExtractOptions defaults;
    for (int pass = 0; pass < 2 && plan.max_gain > 1.0 && plan.strength > 0.0; ++pass) {
        const BitStats stats = bit_statistics(marked, plan, defaults.min_block_coverage);
        bool changed = false;
        for (std::size_t i = 0; i < length; ++i) {
            const double sign = message.bits[i] ? 1.0 : -1.0;
            const double shortfall = plan.bit_margin - sign * stats.mean[i];
            if (stats.blocks[i] == 0 || shortfall <= 0.0 || gain[i] >= plan.max_gain) {
                continue;
            }
            gain[i] = std::min(plan.max_gain, gain[i] + shortfall);
            changed = true;
        }
        if (!changed) {
            break;
        }
        residual = build_residual(object, message, plan, gain);
        marked = apply_residual(object, residual);
    }
    const double quality = psnr(marked.canvas, object.canvas, object.mask);
    return {std::move(marked), std::move(residual), quality, std::move(gain)};
}

DecodeReport extract(const SyncObject& object, const EmbedPlan& plan, bool degenerate_orientation,
                     const ExtractOptions& options) {
    check_canvas(object, plan);
    DecodeReport report = correlate(object, plan, options);
    if (degenerate_orientation || report.mean_confidence < options.flip_threshold) {
        DecodeReport flipped = correlate(rotate_180(object), plan, options);
        if (flipped.mean_confidence > report.mean_confidence) {
            flipped.rotated_180 = true;
            return flipped;
        }
    }
    return report;
}

Image embed_into_host(const Image& host, const BinaryMask& mask, const MessageBits& message,
                      const EmbedPlan& plan, const SyncOptions& sync) {
    require(sync.n == plan.n, "plan canvas size differs from the sync canvas size");
    const SyncResult synced = synchronize(host, mask, sync);
    const EmbedResult marked = embed(synced.object, message, plan);
    const Image back =
        desynchronize_residual(marked.residual, synced.record, host.width(), host.height());
    Image out = host;
    for (int y = 0; y < host.height(); ++y) {
        for (int x = 0; x < host.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            for (int c = 0; c < Image::channels; ++c) {
                const double r = back.at(x, y, c);
                if (r != 0.0) {
                    out.at(x, y, c) = std::clamp(host.at(x, y, c) + r, 0.0, 1.0);
                }
            }
        }
    }
    return out;
}

DecodeReport decode_from_host(const Image& image, const BinaryMask& mask, const EmbedPlan& plan,
                              const SyncOptions& sync, const ExtractOptions& options) {
    require(sync.n == plan.n, "plan canvas size differs from the sync canvas size");
    const SyncResult synced = synchronize(image, mask, sync);
    const bool degenerate = synced.record.degenerate_orientation;
    DecodeReport best = extract(synced.object, plan, degenerate, options);
    if (options.scale_steps <= 0 || options.scale_step <= 0.0 || sync.ablation.skip_scale) {
        return best;
    }

    // Hill climb on the canvas scale about the object's canvas centroid.
    const SimilarityTransform& base = synced.record.transform;
    SimilarityTransform correction;
    correction.pivot = base.apply(synced.record.source_centroid);
    auto try_scale = [&](int k) -> std::optional<DecodeReport> {
        correction.scale = 1.0 + k * options.scale_step;
        try {
            const SyncObject object =
                resample_object(image, mask, compose(correction, base), plan.n, sync.ablation.skip_crop);
            return extract(object, plan, degenerate, options);
        } catch (const Error& e) {
            if (e.code() == Errc::no_signal || e.code() == Errc::empty_region) {
                return std::nullopt;
            }
            throw;
        }
    };
    int at = 0;
    for (int direction : {1, -1}) {
        if (at != 0) {
            break;
        }
        for (int k = direction; std::abs(k) <= options.scale_steps; k += direction) {
            const auto report = try_scale(k);
            if (!report || report->mean_confidence <= best.mean_confidence) {
                break;
            }
            best = *report;
            at = k;
        }
    }
    return best;
}

}  // namespace objmark
