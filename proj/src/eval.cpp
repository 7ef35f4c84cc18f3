#include "objmark/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "objmark/corpus.hpp"
#include "objmark/error.hpp"
#include "objmark/metrics.hpp"
#include "objmark/rng.hpp"
#include "objmark/serialize.hpp"

namespace objmark {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kPlacementAttempts = 20;

struct Bucket {
    const char* name;
    double lo;
    double hi;
};

constexpr Bucket kOccupancyBuckets[] = {
    {"occ_25_30", 0.25, 0.30},
    {"occ_30_40", 0.30, 0.40},
    {"occ_40_50", 0.40, 0.50},
    {"occ_50_60", 0.50, 0.60},
};

std::string format4(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s = buf;
    return s == "-0.0000" ? "0.0000" : s;
}

std::string attack_label(const AttackSpec& a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "rot=%.4f;scale=%.4f;dx=%.4f;dy=%.4f;bg=%d", a.rotation, a.scale,
                  a.paste_offset.x, a.paste_offset.y, a.background_id);
    return buf;
}

std::string error_status(Errc code) { return std::string("error:") + to_string(code); }

// Redraws the attack with fresh parameters when the first draws do not fit
// the background, so large objects end up with smaller scales more often.
AttackSpec place_attack(std::uint64_t seed, const BinaryMask& mask, const Image& background,
                        const AttackRanges& ranges, int background_id) {
    for (int attempt = 0;; ++attempt) {
        try {
            return sample_attack(mix_seed(seed, static_cast<std::uint64_t>(attempt)), mask,
                                 background.width(), background.height(), ranges, background_id);
        } catch (const Error& e) {
            if (e.code() != Errc::placement_infeasible || attempt + 1 >= kPlacementAttempts) {
                throw;
            }
        }
    }
}

struct Entry {
    std::string group;
    std::string label;
    DistortionSpec spec;
};

std::vector<DistortionChoice> effective_bank(const EvalConfig& config) {
    if (config.distortions.empty()) {
        return {{"none", DistortionKind::none, 0.0, 0.0}};
    }
    return config.distortions;
}

std::vector<ResultRecord> evaluate_item(const EvalConfig& config, const EmbedPlan& plan,
                                        const CorpusItem& item, std::size_t index,
                                        const std::vector<Image>& backgrounds) {
    const std::uint64_t item_seed = mix_seed(config.seed, index);
    const MessageBits message = MessageBits::random(mix_seed(item_seed, 1), static_cast<std::size_t>(config.length));

    ResultRecord base;
    base.image_id = item.id;
    base.attack = "none";
    base.occupancy = occupancy(item.mask);
    const std::size_t area = item.mask.count();
    base.mbpp = area == 0 ? kNaN : 1000.0 * config.length / static_cast<double>(area);

    const auto bank = effective_bank(config);
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < bank.size(); ++k) {
        const DistortionSpec spec = bank[k].sample(mix_seed(item_seed, 100 + k));
        entries.push_back({bank[k].label, spec.label(), spec});
    }
    if (config.combined) {
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < bank.size(); ++k) {
            if (bank[k].kind != DistortionKind::none) {
                active.push_back(k);
            }
        }
        if (!active.empty()) {
            Rng rng(mix_seed(item_seed, 3));
            const auto& choice = bank[active[rng.below(active.size())]];
            const DistortionSpec spec = choice.sample(mix_seed(item_seed, 4));
            entries.push_back({"combined", "combined/" + spec.label(), spec});
        }
    }

    std::vector<ResultRecord> out;
    auto fail_all = [&](int ablation, const std::string& status) {
        for (const Entry& e : entries) {
            ResultRecord r = base;
            r.distortion = e.label;
            r.group = e.group;
            r.ablation_id = ablation;
            r.bar = r.psnr = r.ssim = r.mask_iou = r.decode_confidence = kNaN;
            r.status = status;
            out.push_back(std::move(r));
        }
    };

    std::optional<AttackSpec> attack;
    if (config.geometric_attack) {
        const int bg = static_cast<int>(index % backgrounds.size());
        try {
            attack = place_attack(mix_seed(item_seed, 2), item.mask, backgrounds[static_cast<std::size_t>(bg)],
                                  config.ranges, bg);
            base.attack = attack_label(*attack);
        } catch (const Error& e) {
            for (int ablation : config.ablations) {
                fail_all(ablation, error_status(e.code()));
            }
            return out;
        }
    }

    std::vector<std::optional<PerturbResult>> perturbed(entries.size());
    for (int ablation : config.ablations) {
        const SyncOptions sync{config.n, SyncAblation::from_id(ablation), kDefaultDegenerateEps};
        Image watermarked(1, 1);
        try {
            watermarked = quantize(embed_into_host(item.image, item.mask, message, plan, sync));
        } catch (const Error& e) {
            fail_all(ablation, error_status(e.code()));
            continue;
        }
        const double embed_psnr = psnr(watermarked, item.image);
        const double embed_ssim = ssim(watermarked, item.image);

        Composite composite{watermarked, item.mask};
        if (attack) {
            composite = crop_paste(watermarked, item.mask,
                                   backgrounds[static_cast<std::size_t>(attack->background_id)], *attack);
            composite.image = quantize(composite.image);
        }

        for (std::size_t k = 0; k < entries.size(); ++k) {
            const Entry& e = entries[k];
            ResultRecord r = base;
            r.distortion = e.label;
            r.group = e.group;
            r.ablation_id = ablation;
            r.psnr = embed_psnr;
            r.ssim = embed_ssim;

            const Image attacked = quantize(distort(composite.image, e.spec, mix_seed(item_seed, 200 + k)));
            const BinaryMask* decode_mask = &composite.gt_mask;
            if (config.perturb_iou) {
                if (!perturbed[k]) {
                    perturbed[k] = perturb_mask(composite.gt_mask, *config.perturb_iou, mix_seed(item_seed, 300 + k));
                }
                decode_mask = &perturbed[k]->mask;
                r.mask_iou = perturbed[k]->achieved_iou;
            }
            try {
                const DecodeReport report = decode_from_host(attacked, *decode_mask, plan, sync);
                r.bar = bar(report.bits, message);
                r.decode_confidence = report.mean_confidence;
                if (embed_psnr >= config.psnr_floor && embed_ssim < 0.95) {
                    r.status = "ssim_flag";
                }
            } catch (const Error& err) {
                if (err.code() == Errc::no_signal) {
                    // Nothing to decode: score at chance level.
                    r.bar = 0.5;
                    r.decode_confidence = 0.0;
                    r.status = "no_signal";
                } else {
                    r.bar = r.decode_confidence = kNaN;
                    r.status = error_status(err.code());
                }
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

ResultRecord average(const std::vector<const ResultRecord*>& rows, const std::string& image_id,
                     const std::string& group, int ablation) {
    ResultRecord m;
    m.image_id = image_id;
    m.attack = "mean";
    m.distortion = group;
    m.group = group;
    m.ablation_id = ablation;
    double* fields[] = {&m.bar, &m.psnr, &m.ssim, &m.mask_iou, &m.decode_confidence, &m.occupancy, &m.mbpp};
    for (double* f : fields) {
        *f = 0.0;
    }
    for (const ResultRecord* r : rows) {
        m.bar += r->bar;
        m.psnr += r->psnr;
        m.ssim += r->ssim;
        m.mask_iou += r->mask_iou;
        m.decode_confidence += r->decode_confidence;
        m.occupancy += r->occupancy;
        m.mbpp += r->mbpp;
    }
    for (double* f : fields) {
        *f = rows.empty() ? kNaN : *f / static_cast<double>(rows.size());
    }
    m.status = "n=" + std::to_string(rows.size());
    return m;
}

std::vector<ResultRecord> aggregate(const EvalConfig& config, const std::vector<ResultRecord>& records) {
    std::vector<std::string> groups;
    for (const auto& choice : effective_bank(config)) {
        groups.push_back(choice.label);
    }
    int jpeg_groups = 0;
    for (const auto& choice : effective_bank(config)) {
        jpeg_groups += choice.kind == DistortionKind::jpeg ? 1 : 0;
    }
    const bool jpeg_mean = jpeg_groups > 1;
    if (jpeg_mean) {
        groups.emplace_back("jpeg_mean");
    }
    if (config.combined) {
        groups.emplace_back("combined");
    }
    auto in_group = [&](const ResultRecord& r, const std::string& g) {
        if (g == "jpeg_mean") {
            return r.distortion.rfind("jpeg=", 0) == 0;
        }
        return r.group == g;
    };

    std::vector<ResultRecord> out;
    for (int ablation : config.ablations) {
        for (const std::string& g : groups) {
            std::vector<const ResultRecord*> rows;
            for (const ResultRecord& r : records) {
                if (r.ablation_id == ablation && is_scored(r) && in_group(r, g)) {
                    rows.push_back(&r);
                }
            }
            out.push_back(average(rows, "mean", g, ablation));
            for (const Bucket& b : kOccupancyBuckets) {
                std::vector<const ResultRecord*> bucket_rows;
                for (const ResultRecord* r : rows) {
                    if (r->occupancy >= b.lo && r->occupancy < b.hi) {
                        bucket_rows.push_back(r);
                    }
                }
                if (!bucket_rows.empty()) {
                    out.push_back(average(bucket_rows, b.name, g, ablation));
                }
            }
        }
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

DistortionChoice parse_choice(const json& j) {
    if (j.is_string()) {
        const DistortionSpec spec = DistortionSpec::parse(j.get<std::string>());
        return {spec.label(), spec.kind, spec.parameter, spec.parameter};
    }
    require(j.is_object(), "distortion entries are strings or objects");
    DistortionChoice c;
    c.kind = parse_distortion_kind(j.at("kind").get<std::string>());
    if (j.contains("range")) {
        const Point r = j.at("range").get<Point>();
        c.lo = r.x;
        c.hi = r.y;
    } else if (j.contains("value")) {
        c.lo = c.hi = j.at("value").get<double>();
    }
    c.step = j.value("step", 0.0);
    c.label = j.value("label", std::string(to_string(c.kind)));
    return c;
}

}  // namespace

bool is_scored(const ResultRecord& record) noexcept {
    return record.status.rfind("error", 0) != 0;
}

void EvalConfig::validate() const {
    require(n >= 16, "n must be at least 16");
    require(block_size >= 1 && n % block_size == 0, "n must be a multiple of the block size");
    require(length >= 1, "message length must be positive");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
    require(corpus.count >= 0, "corpus count must be non-negative");
    require(!ablations.empty(), "at least one ablation id is required");
    for (int id : ablations) {
        require(id >= 1 && id <= 6, "ablation ids are 1..6");
    }
    if (perturb_iou) {
        require(*perturb_iou > 0.5 && *perturb_iou <= 1.0, "perturb_iou must be in (0.5, 1]");
    }
    ranges.validate();
    for (const auto& c : distortions) {
        require(c.hi >= c.lo, "distortion range '" + c.label + "' is reversed");
        DistortionSpec{c.kind, c.lo}.validate();
        DistortionSpec{c.kind, c.hi}.validate();
    }
    if (!corpus.image_dir.empty()) {
        require(std::filesystem::is_directory(corpus.image_dir),
                "corpus image directory does not exist: " + corpus.image_dir.string());
        require(std::filesystem::is_directory(corpus.mask_dir),
                "corpus mask directory does not exist: " + corpus.mask_dir.string());
    }
    if (!backgrounds.dir.empty()) {
        require(std::filesystem::is_directory(backgrounds.dir),
                "background directory does not exist: " + backgrounds.dir.string());
    } else {
        require(backgrounds.count >= 1, "at least one background is required");
    }
}

EvalConfig EvalConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    require(j.is_object(), "config must be a JSON object");
    EvalConfig c;
    try {
        if (j.contains("corpus")) {
            const json& cj = j.at("corpus");
            if (cj.contains("synthetic")) {
                c.corpus.seed = cj.at("synthetic").value("seed", c.corpus.seed);
                c.corpus.count = cj.at("synthetic").value("count", c.corpus.count);
            } else {
                c.corpus.image_dir = resolve(base_dir, cj.at("images").get<std::string>());
                c.corpus.mask_dir = resolve(base_dir, cj.at("masks").get<std::string>());
                c.corpus.min_occupancy = cj.value("min_occupancy", c.corpus.min_occupancy);
            }
        }
        if (j.contains("backgrounds")) {
            const json& bj = j.at("backgrounds");
            if (bj.contains("synthetic")) {
                c.backgrounds.seed = bj.at("synthetic").value("seed", c.backgrounds.seed);
                c.backgrounds.count = bj.at("synthetic").value("count", c.backgrounds.count);
            } else {
                c.backgrounds.dir = resolve(base_dir, bj.at("dir").get<std::string>());
            }
            c.backgrounds.width = bj.value("width", c.backgrounds.width);
            c.backgrounds.height = bj.value("height", c.backgrounds.height);
        }
        c.n = j.value("n", c.n);
        c.length = j.value("length", c.length);
        if (j.contains("key")) {
            c.key = parse_key(j.at("key"));
        }
        c.alpha = j.value("alpha", c.alpha);
        c.block_size = j.value("block", c.block_size);
        if (j.contains("attack")) {
            const json& aj = j.at("attack");
            c.geometric_attack = aj.value("geometric", true);
            c.ranges = aj.get<AttackRanges>();
        }
        if (j.contains("distortions")) {
            const json& dj = j.at("distortions");
            if (dj.is_string()) {
                const auto name = dj.get<std::string>();
                if (name == "table2") {
                    c.distortions = table2_bank_per_quality();
                } else if (name == "table2_sampled") {
                    c.distortions = table2_bank();
                } else {
                    fail(Errc::invalid_argument, "unknown distortion bank '" + name + "'");
                }
            } else {
                require(dj.is_array(), "distortions must be a bank name or a list");
                for (const json& e : dj) {
                    c.distortions.push_back(parse_choice(e));
                }
            }
        }
        c.combined = j.value("combined", c.combined);
        c.seed = j.value("seed", c.seed);
        if (j.contains("ablations")) {
            c.ablations = j.at("ablations").get<std::vector<int>>();
        }
        if (j.contains("perturb_iou") && !j.at("perturb_iou").is_null()) {
            c.perturb_iou = j.at("perturb_iou").get<double>();
        }
        c.psnr_floor = j.value("psnr_floor", c.psnr_floor);
        if (j.contains("output")) {
            c.output = resolve(base_dir, j.at("output").get<std::string>());
        }
    } catch (const json::exception& e) {
        fail(Errc::invalid_argument, std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

EvalConfig EvalConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path.string()), path.parent_path());
}

EvalResult run_eval(const EvalConfig& config) {
    config.validate();
    const EmbedPlan plan = make_plan(config.key, config.n, config.block_size, config.length, config.alpha);

    std::vector<CorpusItem> items;
    if (config.corpus.image_dir.empty()) {
        items = make_desk_corpus(config.corpus.seed, config.corpus.count, config.n);
    } else {
        items = load_corpus(config.corpus.image_dir, config.corpus.mask_dir, config.n,
                            config.corpus.min_occupancy);
    }
    std::vector<Image> backgrounds;
    if (config.geometric_attack) {
        backgrounds = config.backgrounds.dir.empty()
                          ? make_backgrounds(config.backgrounds.seed, config.backgrounds.count,
                                             config.backgrounds.width, config.backgrounds.height)
                          : load_backgrounds(config.backgrounds.dir, config.backgrounds.width,
                                             config.backgrounds.height);
        require(!backgrounds.empty(), "no background images available");
    }

    EvalResult result;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto rows = evaluate_item(config, plan, items[i], i, backgrounds);
        result.records.insert(result.records.end(), std::make_move_iterator(rows.begin()),
                              std::make_move_iterator(rows.end()));
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const ResultRecord& a, const ResultRecord& b) {
                         if (a.image_id != b.image_id) {
                             return a.image_id < b.image_id;
                         }
                         if (a.distortion != b.distortion) {
                             return a.distortion < b.distortion;
                         }
                         return a.ablation_id < b.ablation_id;
                     });
    result.aggregates = aggregate(config, result.records);
    return result;
}

void write_csv(std::ostream& out, const EvalResult& result) {
    out << "image_id,attack,distortion,bar,psnr,ssim,mask_iou,decode_confidence,ablation_id,"
           "occupancy,mbpp,status\n";
    auto row = [&](const ResultRecord& r) {
        out << r.image_id << ',' << r.attack << ',' << r.distortion << ',' << format4(r.bar) << ','
            << format4(r.psnr) << ',' << format4(r.ssim) << ',' << format4(r.mask_iou) << ','
            << format4(r.decode_confidence) << ',' << r.ablation_id << ',' << format4(r.occupancy)
            << ',' << format4(r.mbpp) << ',' << r.status << '\n';
    };
    for (const auto& r : result.records) {
        row(r);
    }
    for (const auto& r : result.aggregates) {
        row(r);
    }
}

void write_csv(const std::filesystem::path& path, const EvalResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(Errc::io, "cannot write '" + path.string() + "'");
    }
    write_csv(out, result);
    if (!out) {
        fail(Errc::io, "write to '" + path.string() + "' failed");
    }
}

}  // namespace objmark
