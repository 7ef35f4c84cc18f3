#include "objmark/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "objmark/error.hpp"
#include "objmark/moments.hpp"
#include "objmark/png_io.hpp"
#include "objmark/rng.hpp"

namespace objmark {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDetailWaves = 12;
constexpr double kDetailAmplitude = 0.04;

struct OccupancyBucket {
    double lo;
    double hi;
};

// Targets sit inside the reporting buckets with a margin for rasterization.
constexpr OccupancyBucket kBuckets[] = {{0.26, 0.29}, {0.32, 0.38}, {0.42, 0.48}, {0.52, 0.58}};

struct ShapeParams {
    ShapeKind kind = ShapeKind::ellipse;
    double cx = 0.0;
    double cy = 0.0;
    double angle = 0.0;
    double a = 1.0;  // half-length along the major axis
    double b = 1.0;  // half-length along the minor axis
    double exponent = 2.0;
    std::vector<double> harmonics;  // blob: amplitude, phase pairs
    std::vector<Point> polygon;     // unit-frame vertices
};

bool inside_polygon(const std::vector<Point>& poly, double u, double v) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point& p = poly[i];
        const Point& q = poly[j];
        if ((p.y > v) != (q.y > v) && u < (q.x - p.x) * (v - p.y) / (q.y - p.y) + p.x) {
            in = !in;
        }
    }
    return in;
}

bool inside(const ShapeParams& s, double x, double y) {
    const double dx = x - s.cx;
    const double dy = y - s.cy;
    const double c = std::cos(s.angle);
    const double sn = std::sin(s.angle);
    const double u = (c * dx + sn * dy) / s.a;
    const double v = (-sn * dx + c * dy) / s.b;
    switch (s.kind) {
    case ShapeKind::ellipse:
        return u * u + v * v <= 1.0;
    case ShapeKind::bar:
        return std::pow(std::abs(u), s.exponent) + std::pow(std::abs(v), s.exponent) <= 1.0;
    case ShapeKind::polygon:
        return inside_polygon(s.polygon, u, v);
    case ShapeKind::blob: {
        const double r = std::hypot(u, v);
        const double t = std::atan2(v, u);
        double limit = 1.0;
        for (std::size_t k = 0; k + 1 < s.harmonics.size(); k += 2) {
            limit += s.harmonics[k] * std::cos(static_cast<double>(k / 2 + 2) * t + s.harmonics[k + 1]);
        }
        return r <= limit;
    }
    }
    return false;
}

BinaryMask rasterize(const ShapeParams& s, int size) {
    BinaryMask mask(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            mask.set(x, y, inside(s, x, y));
        }
    }
    return mask;
}

// Sum of random plane waves: a few low-frequency colour waves plus a linear
// gradient, and optional finer detail waves shared by all channels, the way
// texture in photographs is mostly a luminance pattern.
class Texture {
public:
    Texture(Rng& rng, int waves, double max_frequency, int detail_waves = 0,
            double detail_amplitude = 0.0) {
        for (int c = 0; c < Image::channels; ++c) {
            base_[c] = rng.uniform(0.3, 0.7);
            gradient_[c] = {rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15)};
            for (int k = 0; k < waves; ++k) {
                waves_[c].push_back(random_wave(rng, rng.uniform(0.3, 1.0) * max_frequency,
                                                rng.uniform(0.02, 0.08)));
            }
        }
        for (int k = 0; k < detail_waves; ++k) {
            const double f = rng.uniform(8.0, 40.0);
            detail_.push_back(random_wave(rng, f, detail_amplitude * rng.uniform(0.5, 1.0) * std::sqrt(8.0 / f)));
        }
    }

    // (x, y) are normalized to [0, 1].
    double value(int c, double x, double y) const {
        double v = base_[c] + gradient_[c].x * (x - 0.5) + gradient_[c].y * (y - 0.5);
        for (const Wave& w : waves_[c]) {
            v += w.at(x, y);
        }
        for (const Wave& w : detail_) {
            v += w.at(x, y);
        }
        return std::clamp(v, 0.04, 0.96);
    }

private:
    struct Wave {
        double fx;
        double fy;
        double phase;
        double amplitude;

        double at(double x, double y) const {
            return amplitude * std::sin(2.0 * kPi * (fx * x + fy * y) + phase);
        }
    };

    static Wave random_wave(Rng& rng, double frequency, double amplitude) {
        const double dir = rng.uniform(0.0, 2.0 * kPi);
        return {frequency * std::cos(dir), frequency * std::sin(dir), rng.uniform(0.0, 2.0 * kPi),
                amplitude};
    }

    double base_[Image::channels] = {};
    Point gradient_[Image::channels] = {};
    std::vector<Wave> waves_[Image::channels];
    std::vector<Wave> detail_;
};

ShapeParams random_shape(Rng& rng, ShapeKind kind, int size, double max_aspect) {
    ShapeParams s;
    s.kind = kind;
    s.cx = (size - 1) / 2.0 + rng.uniform(-6.0, 6.0);
    s.cy = (size - 1) / 2.0 + rng.uniform(-6.0, 6.0);
    s.angle = rng.uniform(-40.0, 40.0) * kPi / 180.0;
    double aspect = rng.uniform(1.3, max_aspect);
    switch (kind) {
    case ShapeKind::ellipse:
        break;
    case ShapeKind::bar:
        s.exponent = rng.uniform(3.0, 8.0);
        break;
    case ShapeKind::polygon: {
        const int vertices = 5 + static_cast<int>(rng.below(4));
        const double start = rng.uniform(0.0, 2.0 * kPi);
        for (int k = 0; k < vertices; ++k) {
            const double t = start + 2.0 * kPi * (k + rng.uniform(-0.2, 0.2)) / vertices;
            const double r = rng.uniform(0.85, 1.0);
            s.polygon.push_back({r * std::cos(t), r * std::sin(t)});
        }
        break;
    }
    case ShapeKind::blob:
        for (int k = 0; k < 3; ++k) {
            s.harmonics.push_back(rng.uniform(0.03, 0.10));
            s.harmonics.push_back(rng.uniform(0.0, 2.0 * kPi));
        }
        aspect = rng.uniform(1.4, std::max(1.45, max_aspect));
        break;
    }
    s.a = 1.0;
    s.b = 1.0 / aspect;
    return s;
}

bool touches_border(const BinaryMask& mask, int margin) {
    const auto box = bounding_box(mask);
    return !box || box->x0 < margin || box->y0 < margin || box->x1 >= mask.width() - margin ||
           box->y1 >= mask.height() - margin;
}

bool well_oriented(const BinaryMask& mask) {
    const MomentSet m = compute_moments(mask);
    if (is_orientation_degenerate(m, 0.02)) {
        return false;
    }
    return std::abs(principal_orientation(m)) <= 42.0 * kPi / 180.0;
}

}  // namespace

const char* to_string(ShapeKind kind) {
    switch (kind) {
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::bar: return "bar";
    case ShapeKind::polygon: return "polygon";
    case ShapeKind::blob: return "blob";
    }
    return "unknown";
}

double occupancy(const BinaryMask& mask) {
    return mask.pixel_count() == 0
               ? 0.0
               : static_cast<double>(mask.count()) / static_cast<double>(mask.pixel_count());
}

CorpusItem make_desk_item(std::uint64_t seed, int index, int size) {
    require(index >= 0, "corpus index must be non-negative");
    require(size >= 32, "corpus images must be at least 32 px");
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(index)));
    const auto kind = static_cast<ShapeKind>(index % 4);
    const int bucket_index = (index / 4) % 4;
    const OccupancyBucket bucket = kBuckets[bucket_index];
    const double target = rng.uniform(bucket.lo, bucket.hi) * size * size;

    constexpr int kMaxShapes = 64;
    ShapeParams shape;
    BinaryMask mask(size, size);
    bool found = false;
    for (int attempt = 0; attempt < kMaxShapes && !found; ++attempt) {
        // Large objects only fit the frame when compact and nearly axis-aligned.
        const double relax = std::pow(0.8, attempt / 4);
        shape = random_shape(rng, kind, size, 1.35 + (2.2 - 0.25 * bucket_index - 1.35) * relax);
        shape.angle *= relax;
        double scale = std::sqrt(target / (kPi * shape.a * shape.b));
        for (int iter = 0; iter < 6; ++iter) {
            ShapeParams trial = shape;
            trial.a *= scale;
            trial.b *= scale;
            mask = rasterize(trial, size);
            const double area = static_cast<double>(mask.count());
            if (area <= 0.0) {
                scale *= 2.0;
                continue;
            }
            if (std::abs(area - target) <= 0.005 * target) {
                break;
            }
            scale *= std::sqrt(target / area);
        }
        shape.a *= scale;
        shape.b *= scale;
        mask = rasterize(shape, size);
        const double occ = occupancy(mask);
        found = !touches_border(mask, 2) && well_oriented(mask) && occ >= bucket.lo - 0.01 &&
                occ <= bucket.hi + 0.01;
    }
    if (!found) {
        fail(Errc::invalid_argument, "could not place a synthetic object of the requested size");
    }

    Texture object_texture(rng, 4, 3.0, kDetailWaves, kDetailAmplitude);
    Texture scene_texture(rng, 3, 2.0, kDetailWaves, kDetailAmplitude);
    Image image(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double nx = x / (size - 1.0);
            const double ny = y / (size - 1.0);
            const Texture& t = mask.at(x, y) ? object_texture : scene_texture;
            for (int c = 0; c < Image::channels; ++c) {
                image.at(x, y, c) = t.value(c, nx, ny);
            }
        }
    }
    char id[32];
    std::snprintf(id, sizeof id, "obj_%03d", index);
    return {id, quantize(image), std::move(mask)};
}

std::vector<CorpusItem> make_desk_corpus(std::uint64_t seed, int count, int size) {
    require(count >= 0, "corpus count must be non-negative");
    std::vector<CorpusItem> items;
    items.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        items.push_back(make_desk_item(seed, i, size));
    }
    return items;
}

Image make_background(std::uint64_t seed, int width, int height) {
    require(width >= 1 && height >= 1, "background dimensions must be positive");
    Rng rng(seed);
    Texture texture(rng, 6, 5.0, kDetailWaves, kDetailAmplitude);
    Image image(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < Image::channels; ++c) {
                image.at(x, y, c) = texture.value(c, x / std::max(1.0, width - 1.0),
                                                  y / std::max(1.0, height - 1.0));
            }
        }
    }
    return quantize(image);
}

std::vector<Image> make_backgrounds(std::uint64_t seed, int count, int width, int height) {
    std::vector<Image> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(make_background(mix_seed(seed, static_cast<std::uint64_t>(i)), width, height));
    }
    return out;
}

Image resize_bilinear(const Image& image, int width, int height) {
    require(width >= 1 && height >= 1, "resize target must be positive");
    if (image.width() == width && image.height() == height) {
        return image;
    }
    Image out(width, height);
    const double sx = static_cast<double>(image.width()) / width;
    const double sy = static_cast<double>(image.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < Image::channels; ++c) {
                const double top = image.at(x0, y0, c) * (1.0 - wx) + image.at(x1, y0, c) * wx;
                const double bottom = image.at(x0, y1, c) * (1.0 - wx) + image.at(x1, y1, c) * wx;
                out.at(x, y, c) = top * (1.0 - wy) + bottom * wy;
            }
        }
    }
    return out;
}

BinaryMask resize_mask(const BinaryMask& mask, int width, int height) {
    require(width >= 1 && height >= 1, "resize target must be positive");
    BinaryMask out(width, height);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(mask.height() - 1, static_cast<int>((y + 0.5) * mask.height() / height));
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(mask.width() - 1, static_cast<int>((x + 0.5) * mask.width() / width));
            out.set(x, y, mask.at(sx, sy));
        }
    }
    return out;
}

namespace {

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        fail(Errc::io, "not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::vector<CorpusItem> load_corpus(const std::filesystem::path& image_dir,
                                    const std::filesystem::path& mask_dir, int size,
                                    double min_occupancy) {
    std::vector<CorpusItem> items;
    for (const auto& image_path : list_pngs(image_dir)) {
        const auto mask_path = mask_dir / image_path.filename();
        if (!std::filesystem::exists(mask_path)) {
            continue;
        }
        CorpusItem item{image_path.stem().string(),
                        quantize(resize_bilinear(read_png_image(image_path), size, size)),
                        BinaryMask(1, 1)};
        const BinaryMask raw = read_png_mask(mask_path);
        item.mask = resize_mask(raw, size, size);
        if (occupancy(item.mask) < min_occupancy) {
            continue;
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<Image> load_backgrounds(const std::filesystem::path& dir, int width, int height) {
    std::vector<Image> out;
    for (const auto& path : list_pngs(dir)) {
        out.push_back(quantize(resize_bilinear(read_png_image(path), width, height)));
    }
    return out;
}

void write_corpus(const std::vector<CorpusItem>& items, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "images", ec);
    std::filesystem::create_directories(dir / "masks", ec);
    if (ec) {
        fail(Errc::io, "cannot create corpus directories under " + dir.string());
    }
    for (const CorpusItem& item : items) {
        write_png_image(dir / "images" / (item.id + ".png"), item.image);
        write_png_mask(dir / "masks" / (item.id + ".png"), item.mask);
    }
}

}  // namespace objmark
