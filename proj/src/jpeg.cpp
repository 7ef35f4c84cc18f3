#include "objmark/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "objmark/error.hpp"

namespace objmark {

namespace {

constexpr std::array<int, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

constexpr std::array<int, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

// basis[k][i] = C(k)/2 * cos((2i + 1) k pi / 16)
struct DctBasis {
    double basis[8][8];

    DctBasis() {
        for (int k = 0; k < 8; ++k) {
            const double ck = k == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
            for (int i = 0; i < 8; ++i) {
                basis[k][i] = 0.5 * ck * std::cos((2 * i + 1) * k * std::numbers::pi / 16.0);
            }
        }
    }
};

const DctBasis& dct_basis() {
    static const DctBasis b;
    return b;
}

// A single 8-bit sample plane.
struct Plane {
    int width;
    int height;
    std::vector<double> v;

    double at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return v[static_cast<std::size_t>(y) * width + x];
    }
};

double round_sample(double v) { return std::clamp(std::floor(v + 0.5), 0.0, 255.0); }

void quantize_plane(Plane& plane, const std::array<int, 64>& table) {
    const auto& b = dct_basis().basis;
    const int bw = (plane.width + 7) / 8;
    const int bh = (plane.height + 7) / 8;
    double block[8][8];
    double tmp[8][8];
    double coef[8][8];
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    block[y][x] = plane.at_clamped(bx * 8 + x, by * 8 + y) - 128.0;
                }
            }
            // Rows, then columns.
            for (int y = 0; y < 8; ++y) {
                for (int u = 0; u < 8; ++u) {
                    double s = 0.0;
                    for (int x = 0; x < 8; ++x) {
                        s += b[u][x] * block[y][x];
                    }
                    tmp[y][u] = s;
                }
            }
            for (int v = 0; v < 8; ++v) {
                for (int u = 0; u < 8; ++u) {
                    double s = 0.0;
                    for (int y = 0; y < 8; ++y) {
                        s += b[v][y] * tmp[y][u];
                    }
                    const double q = table[v * 8 + u];
                    coef[v][u] = std::round(s / q) * q;
                }
            }
            for (int v = 0; v < 8; ++v) {
                for (int x = 0; x < 8; ++x) {
                    double s = 0.0;
                    for (int u = 0; u < 8; ++u) {
                        s += b[u][x] * coef[v][u];
                    }
                    tmp[v][x] = s;
                }
            }
            for (int y = 0; y < 8; ++y) {
                const int py = by * 8 + y;
                if (py >= plane.height) {
                    break;
                }
                for (int x = 0; x < 8; ++x) {
                    const int px = bx * 8 + x;
                    if (px >= plane.width) {
                        break;
                    }
                    double s = 0.0;
                    for (int v = 0; v < 8; ++v) {
                        s += b[v][y] * tmp[v][x];
                    }
                    plane.v[static_cast<std::size_t>(py) * plane.width + px] =
                        round_sample(s + 128.0);
                }
            }
        }
    }
}

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality, bool chroma) {
    require(quality >= 1 && quality <= 100, "JPEG quality must be in [1, 100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    const auto& base = chroma ? kChromaBase : kLumaBase;
    std::array<int, 64> out{};
    for (int i = 0; i < 64; ++i) {
        out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
    }
    return out;
}

Image jpeg_roundtrip(const Image& image, int quality) {
    const int w = image.width();
    const int h = image.height();
    const std::vector<std::uint8_t> rgb = to_rgb8(image);

    Plane y{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
    Plane cb_full = y;
    Plane cr_full = y;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
        const double r = rgb[3 * i];
        const double g = rgb[3 * i + 1];
        const double b = rgb[3 * i + 2];
        y.v[i] = round_sample(0.299 * r + 0.587 * g + 0.114 * b);
        cb_full.v[i] = round_sample(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
        cr_full.v[i] = round_sample(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
    }

    const int cw = (w + 1) / 2;
    const int ch = (h + 1) / 2;
    auto subsample = [&](const Plane& full) {
        Plane out{cw, ch, std::vector<double>(static_cast<std::size_t>(cw) * ch)};
        for (int yy = 0; yy < ch; ++yy) {
            for (int xx = 0; xx < cw; ++xx) {
                const double s = full.at_clamped(2 * xx, 2 * yy) + full.at_clamped(2 * xx + 1, 2 * yy) +
                                 full.at_clamped(2 * xx, 2 * yy + 1) +
                                 full.at_clamped(2 * xx + 1, 2 * yy + 1);
                out.v[static_cast<std::size_t>(yy) * cw + xx] = round_sample(0.25 * s);
            }
        }
        return out;
    };
    Plane cb = subsample(cb_full);
    Plane cr = subsample(cr_full);

    quantize_plane(y, jpeg_quant_table(quality, false));
    const auto chroma_table = jpeg_quant_table(quality, true);
    quantize_plane(cb, chroma_table);
    quantize_plane(cr, chroma_table);

    Image out(w, h);
    for (int yy = 0; yy < h; ++yy) {
        for (int xx = 0; xx < w; ++xx) {
            const double lum = y.v[static_cast<std::size_t>(yy) * w + xx];
            const double cbv = cb.v[static_cast<std::size_t>(yy / 2) * cw + xx / 2] - 128.0;
            const double crv = cr.v[static_cast<std::size_t>(yy / 2) * cw + xx / 2] - 128.0;
            out.at(xx, yy, 0) = round_sample(lum + 1.402 * crv) / 255.0;
            out.at(xx, yy, 1) = round_sample(lum - 0.344136 * cbv - 0.714136 * crv) / 255.0;
            out.at(xx, yy, 2) = round_sample(lum + 1.772 * cbv) / 255.0;
        }
    }
    return out;
}

}  // namespace objmark
