// objmark command line: embed, attack, sync, decode, eval, gen-corpus.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "objmark/attacks.hpp"
#include "objmark/codec.hpp"
#include "objmark/corpus.hpp"
#include "objmark/error.hpp"
#include "objmark/eval.hpp"
#include "objmark/metrics.hpp"
#include "objmark/png_io.hpp"
#include "objmark/rng.hpp"
#include "objmark/serialize.hpp"
#include "objmark/ssync.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace objmark;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNoSignal = 3;
constexpr int kExitPlacement = 4;

int exit_code(Errc code) {
    switch (code) {
    case Errc::no_signal: return kExitNoSignal;
    case Errc::placement_infeasible: return kExitPlacement;
    default: return kExitInvalid;
    }
}

fs::path sibling(const fs::path& out, const std::string& suffix, const std::string& ext) {
    return out.parent_path() / (out.stem().string() + suffix + ext);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) {
        fail(Errc::io, "cannot write '" + path.string() + "'");
    }
    f << j.dump(2) << '\n';
}

struct EmbedArgs {
    std::string image, mask, message, key, out;
    double alpha = kDefaultStrength;
    int n = 256;
    int block = 8;
    int ablation = 6;
};

int run_embed(const EmbedArgs& a) {
    const Image host = read_png_image(a.image);
    const BinaryMask mask = read_png_mask(a.mask);
    const MessageBits message = MessageBits::parse(a.message);
    const EmbedPlan plan = make_plan(parse_key(a.key), a.n, a.block, static_cast<int>(message.size()), a.alpha);
    const SyncOptions sync{a.n, SyncAblation::from_id(a.ablation), kDefaultDegenerateEps};
    const Image marked = quantize(embed_into_host(host, mask, message, plan, sync));
    write_png_image(a.out, marked);
    std::cout << json{{"bits", message.size()},
                      {"psnr", psnr(marked, host)},
                      {"masked_psnr", psnr(marked, host, mask)}}
                     .dump()
              << '\n';
    return 0;
}

struct AttackArgs {
    std::string image, mask, background, spec, out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> distortions;
};

int run_attack(const AttackArgs& a) {
    const Image image = read_png_image(a.image);
    const BinaryMask mask = read_png_mask(a.mask);
    const Image background = read_png_image(a.background);
    require(!a.spec.empty() || a.seed, "attack needs --spec or --seed");
    const std::uint64_t seed = a.seed.value_or(0);

    AttackSpec spec;
    if (!a.spec.empty()) {
        try {
            // Either a bare spec or a file written by a previous attack run.
            const json j = read_json_file(a.spec);
            spec = (j.contains("attack") ? j.at("attack") : j).get<AttackSpec>();
        } catch (const json::exception& e) {
            fail(Errc::invalid_argument, std::string("bad attack spec: ") + e.what());
        }
    } else {
        spec = sample_attack(seed, mask, background.width(), background.height());
    }
    std::vector<DistortionSpec> distortions;
    json labels = json::array();
    for (const auto& d : a.distortions) {
        distortions.push_back(DistortionSpec::parse(d));
        labels.push_back(distortions.back().label());
    }
    const Composite c = attack_pipeline(image, mask, background, spec, distortions, seed);
    const fs::path out(a.out);
    write_png_image(out, c.image);
    write_png_mask(sibling(out, "_mask", ".png"), c.gt_mask);
    write_json(sibling(out, "_attack", ".json"),
               json{{"attack", spec}, {"distortions", labels}, {"seed", seed}});
    return 0;
}

struct SyncArgs {
    std::string image, mask, out, record;
    int n = 256;
    int ablation = 6;
};

int run_sync(const SyncArgs& a) {
    const Image image = read_png_image(a.image);
    const BinaryMask mask = read_png_mask(a.mask);
    const SyncResult r = synchronize(image, mask, {a.n, SyncAblation::from_id(a.ablation), kDefaultDegenerateEps});
    const fs::path out(a.out);
    write_png_image(out, r.object.canvas);
    write_png_mask(sibling(out, "_mask", ".png"), r.object.mask);
    const json record = r.record;
    if (!a.record.empty()) {
        write_json(a.record, record);
    } else {
        std::cout << record.dump(2) << '\n';
    }
    return 0;
}

struct DecodeArgs {
    std::string image, mask, key;
    int length = 30;
    int n = 256;
    int block = 8;
    double alpha = kDefaultStrength;
    int ablation = 6;
};

int run_decode(const DecodeArgs& a) {
    const Image image = read_png_image(a.image);
    const BinaryMask mask = read_png_mask(a.mask);
    const EmbedPlan plan = make_plan(parse_key(a.key), a.n, a.block, a.length, a.alpha);
    const DecodeReport r = decode_from_host(image, mask, plan, {a.n, SyncAblation::from_id(a.ablation), kDefaultDegenerateEps});
    std::cout << json{{"bits", r.bits.to_bit_string()},
                      {"hex", r.bits.to_hex()},
                      {"mean_confidence", r.mean_confidence},
                      {"per_bit_confidence", r.per_bit_confidence},
                      {"used_blocks", r.used_blocks},
                      {"rotated_180", r.rotated_180}}
                     .dump(2)
              << '\n';
    return 0;
}

int run_eval_cmd(const std::string& config_path, const std::string& out_path) {
    EvalConfig config = EvalConfig::load(config_path);
    if (!out_path.empty()) {
        config.output = out_path;
    }
    require(!config.output.empty(), "no output path: pass --out or set \"output\" in the config");
    const EvalResult result = run_eval(config);
    write_csv(config.output, result);
    for (const auto& r : result.aggregates) {
        if (r.image_id == "mean") {
            std::fprintf(stderr, "ablation %d  %-16s bar %.4f  psnr %.2f  ssim %.4f  %s\n", r.ablation_id,
                         r.distortion.c_str(), r.bar, r.psnr, r.ssim, r.status.c_str());
        }
    }
    return 0;
}

int run_gen_corpus(std::uint64_t seed, int count, const std::string& out_dir, int backgrounds) {
    const fs::path dir(out_dir);
    write_corpus(make_desk_corpus(seed, count), dir);
    if (backgrounds > 0) {
        std::error_code ec;
        fs::create_directories(dir / "backgrounds", ec);
        const auto bgs = make_backgrounds(mix_seed(seed, 0xb6), backgrounds);
        for (std::size_t i = 0; i < bgs.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "bg_%03zu.png", i);
            write_png_image(dir / "backgrounds" / name, bgs[i]);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Object-aligned blind watermarking toolkit"};
    app.require_subcommand(1);

    EmbedArgs embed;
    auto* cmd_embed = app.add_subcommand("embed", "Embed a message into the masked object");
    cmd_embed->add_option("--image", embed.image, "Host PNG")->required();
    cmd_embed->add_option("--mask", embed.mask, "Object mask PNG")->required();
    cmd_embed->add_option("--message", embed.message, "Bits as 0/1 string or 0x-prefixed hex")->required();
    cmd_embed->add_option("--key", embed.key, "64-bit key in hex")->required();
    cmd_embed->add_option("--alpha", embed.alpha, "Embedding strength in [0,1]");
    cmd_embed->add_option("--n", embed.n, "Canvas size");
    cmd_embed->add_option("--block", embed.block, "Block size");
    cmd_embed->add_option("--ablation", embed.ablation, "Sync ablation id (6 = full)");
    cmd_embed->add_option("--out", embed.out, "Output PNG")->required();

    AttackArgs attack;
    std::uint64_t attack_seed = 0;
    auto* cmd_attack = app.add_subcommand("attack", "Cropping-paste attack plus optional distortions");
    cmd_attack->add_option("--image", attack.image, "Object source PNG")->required();
    cmd_attack->add_option("--mask", attack.mask, "Object mask PNG")->required();
    cmd_attack->add_option("--background", attack.background, "Background PNG")->required();
    cmd_attack->add_option("--spec", attack.spec, "AttackSpec JSON, bare or as written by attack");
    auto* seed_opt = cmd_attack->add_option("--seed", attack_seed, "Seed for sampling the attack and distortions");
    cmd_attack->add_option("--distort", attack.distortions, "Distortion kind=value, repeatable");
    cmd_attack->add_option("--out", attack.out, "Output PNG")->required();

    SyncArgs sync;
    auto* cmd_sync = app.add_subcommand("sync", "Normalize an object onto the canvas");
    cmd_sync->add_option("--image", sync.image, "Image PNG")->required();
    cmd_sync->add_option("--mask", sync.mask, "Object mask PNG")->required();
    cmd_sync->add_option("--n", sync.n, "Canvas size");
    cmd_sync->add_option("--ablation", sync.ablation, "Sync ablation id (6 = full)");
    cmd_sync->add_option("--out", sync.out, "Canvas PNG")->required();
    cmd_sync->add_option("--record", sync.record, "Write the sync record JSON here");

    DecodeArgs decode;
    auto* cmd_decode = app.add_subcommand("decode", "Blindly decode a message from the masked object");
    cmd_decode->add_option("--image", decode.image, "Suspect PNG")->required();
    cmd_decode->add_option("--mask", decode.mask, "Object mask PNG")->required();
    cmd_decode->add_option("--key", decode.key, "64-bit key in hex")->required();
    cmd_decode->add_option("--length", decode.length, "Message length in bits");
    cmd_decode->add_option("--n", decode.n, "Canvas size");
    cmd_decode->add_option("--block", decode.block, "Block size");
    cmd_decode->add_option("--alpha", decode.alpha, "Embedding strength used at embed time");
    cmd_decode->add_option("--ablation", decode.ablation, "Sync ablation id (6 = full)");

    std::string eval_config;
    std::string eval_out;
    auto* cmd_eval = app.add_subcommand("eval", "Run a corpus evaluation and write CSV");
    cmd_eval->add_option("--config", eval_config, "EvalConfig JSON")->required();
    cmd_eval->add_option("--out", eval_out, "Output CSV");

    std::uint64_t corpus_seed = 7;
    int corpus_count = 50;
    int corpus_backgrounds = 0;
    std::string corpus_dir;
    auto* cmd_corpus = app.add_subcommand("gen-corpus", "Write the synthetic desk corpus as PNGs");
    cmd_corpus->add_option("--seed", corpus_seed, "Generator seed");
    cmd_corpus->add_option("--count", corpus_count, "Number of images");
    cmd_corpus->add_option("--backgrounds", corpus_backgrounds, "Also write this many 512x512 backgrounds");
    cmd_corpus->add_option("--out-dir", corpus_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*cmd_embed) {
            return run_embed(embed);
        }
        if (*cmd_attack) {
            if (seed_opt->count() > 0) {
                attack.seed = attack_seed;
            }
            return run_attack(attack);
        }
        if (*cmd_sync) {
            return run_sync(sync);
        }
        if (*cmd_decode) {
            return run_decode(decode);
        }
        if (*cmd_eval) {
            return run_eval_cmd(eval_config, eval_out);
        }
        if (*cmd_corpus) {
            return run_gen_corpus(corpus_seed, corpus_count, corpus_dir, corpus_backgrounds);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "objmark: %s: %s\n", to_string(e.code()), e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "objmark: %s\n", e.what());
        return kExitInvalid;
    }
    return kExitInvalid;
}
