#include "objmark/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "objmark/codec.hpp"
#include "objmark/error.hpp"
#include "objmark/rng.hpp"

namespace objmark {

namespace {

void check_same_dims(const Image& a, const Image& b) {
    require(a.width() == b.width() && a.height() == b.height(), "image dimensions differ");
}

double psnr_from_sse(double sse, std::size_t samples) {
    if (samples == 0 || sse == 0.0) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(static_cast<double>(samples) / sse));
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    check_same_dims(a, b);
    double sse = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sse += d * d;
    }
    return psnr_from_sse(sse, da.size());
}

double psnr(const Image& a, const Image& b, const BinaryMask& mask) {
    check_same_dims(a, b);
    require(mask.width() == a.width() && mask.height() == a.height(),
            "mask dimensions differ from the images");
    double sse = 0.0;
    std::size_t samples = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            for (int c = 0; c < Image::channels; ++c) {
                const double d = a.at(x, y, c) - b.at(x, y, c);
                sse += d * d;
            }
            samples += Image::channels;
        }
    }
    return psnr_from_sse(sse, samples);
}

double ssim(const Image& a, const Image& b) {
    check_same_dims(a, b);
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    require(a.width() >= kWindow && a.height() >= kWindow, "SSIM needs images of at least 11x11");

    std::vector<double> window(kWindow);
    double wsum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        window[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        wsum += window[i];
    }
    for (double& v : window) {
        v /= wsum;
    }

    const int w = a.width();
    const int h = a.height();
    const int ow = w - kWindow + 1;
    const int oh = h - kWindow + 1;
    const std::vector<double> la = luminance(a);
    const std::vector<double> lb = luminance(b);

    // Five filtered fields: mu_a, mu_b, E[a^2], E[b^2], E[ab].
    auto filter = [&](auto&& value) {
        std::vector<double> rows(static_cast<std::size_t>(ow) * h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWindow; ++k) {
                    s += window[k] * value(static_cast<std::size_t>(y) * w + x + k);
                }
                rows[static_cast<std::size_t>(y) * ow + x] = s;
            }
        }
        std::vector<double> out(static_cast<std::size_t>(ow) * oh);
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWindow; ++k) {
                    s += window[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
                }
                out[static_cast<std::size_t>(y) * ow + x] = s;
            }
        }
        return out;
    };
    const auto mu_a = filter([&](std::size_t i) { return la[i]; });
    const auto mu_b = filter([&](std::size_t i) { return lb[i]; });
    const auto e_aa = filter([&](std::size_t i) { return la[i] * la[i]; });
    const auto e_bb = filter([&](std::size_t i) { return lb[i] * lb[i]; });
    const auto e_ab = filter([&](std::size_t i) { return la[i] * lb[i]; });

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                 ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
    return total / static_cast<double>(mu_a.size());
}

double bar(const MessageBits& decoded, const MessageBits& truth) {
    require(decoded.size() == truth.size(), "bit strings differ in length");
    require(truth.size() > 0, "bit strings are empty");
    std::size_t same = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        same += decoded.bits[i] == truth.bits[i] ? 1 : 0;
    }
    return static_cast<double>(same) / static_cast<double>(truth.size());
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    require(a.width() == b.width() && a.height() == b.height(), "mask dimensions differ");
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        inter += (da[i] && db[i]) ? 1 : 0;
        uni += (da[i] || db[i]) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

PerturbResult perturb_mask(const BinaryMask& mask, double target_iou, std::uint64_t seed) {
    require(target_iou > 0.5 && target_iou <= 1.0, "target IoU must be in (0.5, 1]");
    PerturbResult result{mask, 1.0, true, 0};
    if (target_iou >= 1.0) {
        return result;
    }

    const int w = mask.width();
    const int h = mask.height();
    BinaryMask& cur = result.mask;
    Rng rng(seed);
    std::vector<int> candidates;

    auto touches = [&](int x, int y, bool want) {
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + kDx[k];
            const int ny = y + kDy[k];
            if (nx >= 0 && nx < w && ny >= 0 && ny < h && cur.at(nx, ny) == want) {
                return true;
            }
        }
        return false;
    };

    constexpr int kMaxSteps = 50;
    bool grow = true;
    int stalled = 0;
    for (int step = 0; step < kMaxSteps && stalled < 2; ++step, grow = !grow) {
        std::size_t inter = 0;
        std::size_t uni = 0;
        for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
            inter += (cur.data()[i] && mask.data()[i]) ? 1 : 0;
            uni += (cur.data()[i] || mask.data()[i]) ? 1 : 0;
        }
        if (uni == 0) {
            break;
        }
        // Dilation only claims pixels outside the original mask and erosion
        // only removes original pixels, so the IoU after flipping k pixels
        // is known in closed form.
        const double needed = grow ? static_cast<double>(inter) / target_iou - static_cast<double>(uni)
                                   : static_cast<double>(inter) - target_iou * static_cast<double>(uni);
        const auto full = static_cast<long>(std::ceil(needed - 1e-9));
        if (full <= 0) {
            break;
        }
        candidates.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const bool in_cur = cur.at(x, y);
                if (grow && !in_cur && !mask.at(x, y) && touches(x, y, true)) {
                    candidates.push_back(y * w + x);
                } else if (!grow && in_cur && mask.at(x, y) && touches(x, y, false)) {
                    candidates.push_back(y * w + x);
                }
            }
        }
        if (candidates.empty()) {
            ++stalled;
            continue;
        }
        stalled = 0;
        // Close half the gap per step so growth and erosion interleave.
        long k = full <= 4 ? full : (full + 1) / 2;
        k = std::min<long>(k, static_cast<long>(candidates.size()));
        for (long i = 0; i < k; ++i) {
            const auto j = i + static_cast<long>(rng.below(candidates.size() - static_cast<std::size_t>(i)));
            std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
            const int p = candidates[static_cast<std::size_t>(i)];
            cur.set(p % w, p / w, grow);
        }
        result.iterations = step + 1;
    }
    result.achieved_iou = iou(cur, mask);
    result.converged = std::abs(result.achieved_iou - target_iou) <= 0.02;
    return result;
}

}  // namespace objmark
