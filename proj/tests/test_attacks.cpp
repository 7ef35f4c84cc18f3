#include <doctest.h>

#include <cmath>
#include <numbers>

#include "objmark/attacks.hpp"
#include "objmark/color.hpp"
#include "objmark/corpus.hpp"
#include "objmark/error.hpp"
#include "objmark/jpeg.hpp"
#include "objmark/metrics.hpp"
#include "objmark/moments.hpp"
#include "objmark/rng.hpp"
#include "objmark/ssync.hpp"

using namespace objmark;

namespace {

constexpr double kPi = std::numbers::pi;

BinaryMask ellipse(int w, int h, double cx, double cy, double a, double b, double angle) {
    BinaryMask m(w, h);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = (c * (x - cx) + s * (y - cy)) / a;
            const double v = (-s * (x - cx) + c * (y - cy)) / b;
            m.set(x, y, u * u + v * v <= 1.0);
        }
    }
    return m;
}

Image noise_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Image img(w, h);
    for (double& v : img.data()) {
        v = rng.uniform();
    }
    return quantize(img);
}

Image gray(int w, int h, double v) { return Image(w, h, v); }

}  // namespace

TEST_CASE("distortion specs parse, label and validate") {
    CHECK(DistortionSpec::parse("jpeg=50") == DistortionSpec{DistortionKind::jpeg, 50.0});
    CHECK(DistortionSpec::parse("none").kind == DistortionKind::none);
    CHECK(DistortionSpec::parse("gaussian_noise=0.05").label() == "gaussian_noise=0.05");
    CHECK_THROWS_AS(DistortionSpec::parse("jpeg"), Error);
    CHECK_THROWS_AS(DistortionSpec::parse("jpeg=fifty"), Error);
    CHECK_THROWS_AS(DistortionSpec::parse("sharpen=1"), Error);
    const Image img = gray(8, 8, 0.5);
    for (const char* bad : {"jpeg=95", "jpeg=55.5", "gaussian_blur=3.5", "median_blur=4", "gaussian_noise=0.06",
                            "salt_pepper=0.2", "brightness=1.3", "contrast=0.7", "saturation=1.25", "hue=0.2"}) {
        CAPTURE(bad);
        const auto eq = std::string(bad).find('=');
        const DistortionSpec spec{parse_distortion_kind(std::string(bad).substr(0, eq)),
                                  std::stod(std::string(bad).substr(eq + 1))};
        CHECK_THROWS_AS(distort(img, spec, 0), Error);
    }
}

TEST_CASE("distortion banks") {
    const auto bank = table2_bank();
    CHECK(bank.size() == 10);
    CHECK(bank.front().kind == DistortionKind::none);
    const auto per_q = table2_bank_per_quality();
    CHECK(per_q.size() == 18);
    int jpeg_entries = 0;
    for (const auto& c : per_q) {
        jpeg_entries += c.kind == DistortionKind::jpeg ? 1 : 0;
    }
    CHECK(jpeg_entries == 9);
    // Sampling JPEG quality from the grid 10..90.
    for (std::uint64_t s = 0; s < 50; ++s) {
        const double q = bank[3].sample(s).parameter;
        CHECK(std::fmod(q, 10.0) == 0.0);
        CHECK(q >= 10.0);
        CHECK(q <= 90.0);
    }
    for (const auto& c : noise_layer_bank()) {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const DistortionSpec d = c.sample(s);
            if (d.kind == DistortionKind::gaussian_blur) {
                CHECK(d.parameter <= 2.0);
            } else if (d.kind == DistortionKind::gaussian_noise) {
                CHECK(d.parameter <= 0.05);
            } else {
                CHECK((d.parameter == 50.0 || d.parameter == 75.0));
            }
        }
    }
    // One labeled variant per bank entry.
    const Image img = noise_image(32, 32, 1);
    int variants = 0;
    for (std::size_t k = 0; k < bank.size(); ++k) {
        const Image out = distort(img, bank[k].sample(k), k);
        CHECK(out.width() == 32);
        ++variants;
    }
    CHECK(variants == 10);
}

TEST_CASE("none is bit-exact") {
    const Image img = noise_image(20, 20, 2);
    CHECK(distort(img, {}, 9) == img);
}

TEST_CASE("gaussian blur of an impulse is the sampled kernel") {
    Image img(31, 31);
    for (int c = 0; c < 3; ++c) {
        img.at(15, 15, c) = 1.0;
    }
    const Image out = distort(img, {DistortionKind::gaussian_blur, 1.0}, 0);
    // Closed form: exp(-i^2/2) normalized over i in [-3, 3], outer product.
    double norm = 0.0;
    for (int i = -3; i <= 3; ++i) {
        norm += std::exp(-i * i / 2.0);
    }
    for (int dy = -5; dy <= 5; ++dy) {
        for (int dx = -5; dx <= 5; ++dx) {
            double expected = 0.0;
            if (std::abs(dx) <= 3 && std::abs(dy) <= 3) {
                expected = std::exp(-dx * dx / 2.0) * std::exp(-dy * dy / 2.0) / (norm * norm);
            }
            CHECK(std::abs(out.at(15 + dx, 15 + dy, 1) - expected) <= 1e-6);
        }
    }
    CHECK(gaussian_kernel(1.0).size() == 7);
    CHECK(gaussian_kernel(3.0).size() == 19);
}

TEST_CASE("gaussian noise statistics and determinism") {
    const Image img = gray(200, 200, 0.5);
    const DistortionSpec spec{DistortionKind::gaussian_noise, 0.05};
    const Image a = distort(img, spec, 42);
    CHECK(a == distort(img, spec, 42));
    CHECK_FALSE(a == distort(img, spec, 43));
    double sum = 0.0, sq = 0.0;
    for (double v : a.data()) {
        sum += v - 0.5;
        sq += (v - 0.5) * (v - 0.5);
    }
    const double n = static_cast<double>(a.data().size());
    CHECK(std::abs(sum / n) < 0.001);
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.05).epsilon(0.02));
}

TEST_CASE("salt and pepper hits the requested fraction") {
    const Image img = gray(200, 200, 0.5);
    const Image out = distort(img, {DistortionKind::salt_pepper, 0.1}, 7);
    int hit = 0, white = 0;
    for (int y = 0; y < 200; ++y) {
        for (int x = 0; x < 200; ++x) {
            if (out.at(x, y, 0) != 0.5) {
                ++hit;
                white += out.at(x, y, 0) == 1.0 ? 1 : 0;
                CHECK(out.at(x, y, 1) == out.at(x, y, 0));
            }
        }
    }
    // Binomial(40000, 0.1): sd 60.
    CHECK(std::abs(hit - 4000) < 300);
    CHECK(std::abs(white - hit / 2) < 200);
}

TEST_CASE("median filter removes isolated outliers") {
    Image img = gray(20, 20, 0.4);
    img.at(10, 10, 0) = 1.0;
    img.at(3, 15, 2) = 0.0;
    const Image out = distort(img, {DistortionKind::median_blur, 3.0}, 0);
    CHECK(out == gray(20, 20, 0.4));
    CHECK(distort(img, {DistortionKind::median_blur, 5.0}, 0) == gray(20, 20, 0.4));
}

TEST_CASE("photometric distortions") {
    Image img(4, 1);
    const double px[4][3] = {{0.2, 0.4, 0.6}, {0.5, 0.5, 0.5}, {0.9, 0.1, 0.3}, {0.3, 0.7, 0.2}};
    for (int x = 0; x < 4; ++x) {
        for (int c = 0; c < 3; ++c) {
            img.at(x, 0, c) = px[x][c];
        }
    }
    const Image bright = distort(img, {DistortionKind::brightness, 1.1}, 0);
    CHECK(bright.at(0, 0, 2) == doctest::Approx(0.66));
    CHECK(bright.at(2, 0, 0) == doctest::Approx(0.99));

    // Contrast around the mean luminance keeps that mean when nothing clips.
    const Image con = distort(img, {DistortionKind::contrast, 0.8}, 0);
    const auto before = luminance(img);
    const auto after = luminance(con);
    double mb = 0.0, ma = 0.0;
    for (int i = 0; i < 4; ++i) {
        mb += before[i];
        ma += after[i];
    }
    CHECK(ma == doctest::Approx(mb));
    CHECK(con.at(1, 0, 0) == doctest::Approx(0.8 * 0.5 + 0.2 * mb / 4));

    const Image same_sat = distort(img, {DistortionKind::saturation, 1.0}, 0);
    const Image same_hue = distort(img, {DistortionKind::hue, 0.0}, 0);
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        CHECK(same_sat.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-12));
        CHECK(same_hue.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-12));
    }
    // Gray stays gray under saturation and hue changes.
    const Image sat = distort(img, {DistortionKind::saturation, 1.2}, 0);
    CHECK(sat.at(1, 0, 0) == 0.5);
    CHECK(sat.at(1, 0, 2) == 0.5);

    Image red(1, 1);
    red.at(0, 0, 0) = 1.0;
    const Image shifted = distort(red, {DistortionKind::hue, 0.1}, 0);
    const Hsv h = rgb_to_hsv(shifted.at(0, 0, 0), shifted.at(0, 0, 1), shifted.at(0, 0, 2));
    CHECK(h.h == doctest::Approx(0.1));
    CHECK(h.s == doctest::Approx(1.0));
}

TEST_CASE("HSV conversion round trips") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double r = rng.uniform(), g = rng.uniform(), b = rng.uniform();
        double r2, g2, b2;
        hsv_to_rgb(rgb_to_hsv(r, g, b), r2, g2, b2);
        CHECK(r2 == doctest::Approx(r).epsilon(1e-12));
        CHECK(g2 == doctest::Approx(g).epsilon(1e-12));
        CHECK(b2 == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("JPEG quantization tables") {
    const auto q50 = jpeg_quant_table(50, false);
    CHECK(q50[0] == 16);
    CHECK(q50[1] == 11);
    CHECK(q50[63] == 99);
    CHECK(jpeg_quant_table(50, true)[0] == 17);
    // Quality 10: scale 500 %.
    CHECK(jpeg_quant_table(10, false)[0] == 80);
    // Quality 90: scale 20 %, (16 * 20 + 50) / 100 = 3.
    CHECK(jpeg_quant_table(90, false)[0] == 3);
    CHECK(jpeg_quant_table(100, false)[0] == 1);
    CHECK(jpeg_quant_table(1, false)[63] == 255);
}

TEST_CASE("JPEG luminance path matches a direct DCT oracle on gray images") {
    // Gray input keeps both chroma planes at exactly 128, so the output is the
    // quantized luminance plane.
    Rng rng(9);
    Image img(16, 16);
    std::vector<double> y8(256);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            const int v = static_cast<int>(40 + rng.below(170));
            y8[y * 16 + x] = v;
            for (int c = 0; c < 3; ++c) {
                img.at(x, y, c) = v / 255.0;
            }
        }
    }
    const int quality = 50;
    const auto table = jpeg_quant_table(quality, false);
    std::vector<double> expected(256);
    for (int by = 0; by < 2; ++by) {
        for (int bx = 0; bx < 2; ++bx) {
            double coef[8][8];
            for (int v = 0; v < 8; ++v) {
                for (int u = 0; u < 8; ++u) {
                    const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                    const double cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                    double s = 0.0;
                    for (int y = 0; y < 8; ++y) {
                        for (int x = 0; x < 8; ++x) {
                            s += (y8[(by * 8 + y) * 16 + bx * 8 + x] - 128.0) *
                                 std::cos((2 * x + 1) * u * kPi / 16) * std::cos((2 * y + 1) * v * kPi / 16);
                        }
                    }
                    const double f = 0.25 * cu * cv * s;
                    const double q = table[v * 8 + u];
                    coef[v][u] = std::round(f / q) * q;
                }
            }
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    double s = 0.0;
                    for (int v = 0; v < 8; ++v) {
                        for (int u = 0; u < 8; ++u) {
                            const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                            const double cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                            s += cu * cv * coef[v][u] * std::cos((2 * x + 1) * u * kPi / 16) *
                                 std::cos((2 * y + 1) * v * kPi / 16);
                        }
                    }
                    expected[(by * 8 + y) * 16 + bx * 8 + x] = std::clamp(std::floor(0.25 * s + 128.0 + 0.5), 0.0, 255.0);
                }
            }
        }
    }
    const Image out = jpeg_roundtrip(img, quality);
    int exact = 0;
    double worst = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double got = out.at(i % 16, i / 16, 1) * 255.0;
        worst = std::max(worst, std::abs(got - expected[i]));
        exact += std::abs(got - expected[i]) < 1e-9 ? 1 : 0;
    }
    CHECK(worst <= 1.0 + 1e-9);
    CHECK(exact >= 250);
}

TEST_CASE("JPEG round trip quality ordering and regression value") {
    const CorpusItem item = make_desk_item(7, 0);
    const Image q50 = distort(item.image, {DistortionKind::jpeg, 50.0}, 0);
    CHECK(q50 == distort(item.image, {DistortionKind::jpeg, 50.0}, 1));
    const double p50 = psnr(q50, item.image);
    CHECK(p50 >= 28.0);
    CHECK(p50 <= 45.0);
    // Regression pin for this encoder on this image.
    CHECK(p50 == doctest::Approx(34.4398).epsilon(1e-4));
    for (int i = 0; i < 8; ++i) {
        const CorpusItem it = make_desk_item(7, i);
        CHECK(psnr(jpeg_roundtrip(it.image, 90), it.image) > psnr(jpeg_roundtrip(it.image, 10), it.image));
    }
}

TEST_CASE("sample_attack") {
    const BinaryMask mask = ellipse(128, 128, 64.0, 60.0, 40.0, 20.0, 0.3);
    const AttackSpec a = sample_attack(5, mask, 512, 512);
    CHECK(a == sample_attack(5, mask, 512, 512));
    CHECK_FALSE(a == sample_attack(6, mask, 512, 512));
    CHECK(std::abs(a.rotation) <= kPi / 4);
    CHECK(a.scale >= 0.75);
    CHECK(a.scale <= 1.5);

    // Fixed geometry and a frame-filling object: only offset (0, 0) fits.
    const AttackRanges fixed{0.0, 0.0, 1.0, 1.0};
    const BinaryMask full(64, 48, true);
    const AttackSpec z = sample_attack(3, full, 64, 48, fixed);
    CHECK(z.paste_offset.x == 0.0);
    CHECK(z.paste_offset.y == 0.0);

    const AttackRanges big{0.0, 0.0, 1.5, 1.5};
    try {
        sample_attack(3, full, 64, 48, big);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::placement_infeasible);
    }
    CHECK_THROWS_AS(sample_attack(3, mask, 512, 512, AttackRanges{-1.0, 0.0, 1.0, 1.0}), Error);
    CHECK_THROWS_AS(sample_attack(3, mask, 512, 512, AttackRanges{0.0, 0.0, 0.5, 1.0}), Error);
}

TEST_CASE("crop_paste composites only inside the transformed mask") {
    const BinaryMask mask = ellipse(160, 140, 80.0, 70.0, 60.0, 30.0, -0.2);
    Image obj = noise_image(160, 140, 11);

    // Identity onto zeros is the masked crop.
    const AttackSpec identity{};
    const Composite id = crop_paste(obj, mask, Image(160, 140), identity);
    CHECK(id.image == apply_mask_crop(obj, mask));
    CHECK(id.gt_mask == mask);

    const AttackSpec spec{kPi / 6, 1.2, {180.0, 210.0}, 0};
    const Image bg1 = noise_image(512, 512, 12);
    const Image bg2 = noise_image(512, 512, 13);
    const Composite c1 = crop_paste(obj, mask, bg1, spec);
    const Composite c2 = crop_paste(obj, mask, bg2, spec);
    const BinaryMask reference = warp_mask(mask, attack_transform(spec, mask), 512, 512);
    CHECK(iou(c1.gt_mask, reference) >= 0.99);
    for (int y = 0; y < 512; ++y) {
        for (int x = 0; x < 512; ++x) {
            for (int c = 0; c < 3; ++c) {
                if (!c1.gt_mask.at(x, y)) {
                    REQUIRE(c1.image.at(x, y, c) == bg1.at(x, y, c));
                } else {
                    REQUIRE(c1.image.at(x, y, c) == c2.image.at(x, y, c));
                }
            }
        }
    }

    const AttackSpec off{0.0, 1.0, {600.0, 0.0}, 0};
    CHECK_THROWS_AS(crop_paste(obj, mask, bg1, off), Error);
}

TEST_CASE("ground-truth mask follows the attack geometry") {
    const BinaryMask mask = ellipse(200, 200, 97.0, 103.0, 70.0, 28.0, 0.25);
    const MomentSet m0 = compute_moments(mask);
    const Point c0 = centroid(m0);
    const double phi0 = principal_orientation(m0);
    const Image obj = noise_image(200, 200, 3);
    const Image bg = noise_image(512, 512, 4);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const AttackSpec a = sample_attack(seed, mask, 512, 512);
        const Composite c = crop_paste(obj, mask, bg, a);
        const MomentSet m = compute_moments(c.gt_mask);
        const Point expected = attack_transform(a, mask).apply(c0);
        CHECK(std::abs(centroid(m).x - expected.x) <= 1.0);
        CHECK(std::abs(centroid(m).y - expected.y) <= 1.0);
        double phi = phi0 + a.rotation;
        phi = phi > kPi / 2 ? phi - kPi : (phi <= -kPi / 2 ? phi + kPi : phi);
        CHECK(std::abs(principal_orientation(m) - phi) <= 0.02);
    }
}

TEST_CASE("attack_pipeline") {
    const BinaryMask mask = ellipse(100, 100, 50.0, 50.0, 40.0, 20.0, 0.0);
    const Image obj = noise_image(100, 100, 21);
    const Image bg = noise_image(256, 256, 22);
    const AttackSpec spec{0.3, 1.1, {70.0, 80.0}, 0};
    const Composite plain = crop_paste(obj, mask, bg, spec);
    const Composite none = attack_pipeline(obj, mask, bg, spec, {}, 5);
    CHECK(none.image == plain.image);
    CHECK(none.gt_mask == plain.gt_mask);

    const DistortionSpec blur{DistortionKind::gaussian_blur, 1.5};
    const DistortionSpec noise{DistortionKind::gaussian_noise, 0.03};
    const Composite bn = attack_pipeline(obj, mask, bg, spec, {blur, noise}, 5);
    const Composite nb = attack_pipeline(obj, mask, bg, spec, {noise, blur}, 5);
    CHECK_FALSE(bn.image == nb.image);
    CHECK(bn.gt_mask == plain.gt_mask);
    CHECK(bn.image == attack_pipeline(obj, mask, bg, spec, {blur, noise}, 5).image);
}
