#include <doctest.h>

#include <cmath>
#include <set>

#include "objmark/attacks.hpp"
#include "objmark/codec.hpp"
#include "objmark/corpus.hpp"
#include "objmark/error.hpp"
#include "objmark/metrics.hpp"
#include "objmark/rng.hpp"
#include "objmark/ssync.hpp"

using namespace objmark;

namespace {

constexpr std::uint64_t kKey = 0x1234;

SyncObject synced_item(int index) {
    const CorpusItem item = make_desk_item(7, index);
    return synchronize(item.image, item.mask).object;
}

}  // namespace

TEST_CASE("message bits parse and format") {
    const MessageBits a = MessageBits::parse("0xA5");
    CHECK(a.to_bit_string() == "10100101");
    CHECK(a.to_hex() == "0xa5");
    CHECK(MessageBits::parse("101").to_hex() == "0xa");
    CHECK(MessageBits::parse("0X0f") == MessageBits::parse("00001111"));
    CHECK_THROWS_AS(MessageBits::parse(""), Error);
    CHECK_THROWS_AS(MessageBits::parse("10201"), Error);
    CHECK_THROWS_AS(MessageBits::parse("0xZZ"), Error);
    CHECK(MessageBits::random(3, 30) == MessageBits::random(3, 30));
    CHECK(MessageBits::random(3, 30).size() == 30);
}

TEST_CASE("embedding plan layout") {
    const EmbedPlan plan = make_plan(kKey);
    CHECK(plan.block_count() == 1024);
    CHECK(plan.bit_of_block.size() == 1024);
    std::vector<int> per_bit(30, 0);
    for (int b : plan.bit_of_block) {
        REQUIRE(b >= 0);
        REQUIRE(b < 30);
        ++per_bit[b];
    }
    // 1024 = 34 * 30 + 4.
    for (int c : per_bit) {
        CHECK(c >= 34);
        CHECK(c <= 35);
    }
    // Serpentine rows: any 30 consecutive blocks along the walk hold every bit.
    std::vector<int> walk;
    for (int row = 0; row < 32; ++row) {
        for (int i = 0; i < 32; ++i) {
            walk.push_back(row * 32 + (row % 2 == 0 ? i : 31 - i));
        }
    }
    for (int start = 0; start + 30 <= 1020; start += 30) {
        std::set<int> bits;
        for (int j = 0; j < 30; ++j) {
            bits.insert(plan.bit_of_block[walk[start + j]]);
        }
        CHECK(bits.size() == 30);
    }
    const EmbedPlan again = make_plan(kKey);
    CHECK(again.bit_of_block == plan.bit_of_block);
    const EmbedPlan other = make_plan(kKey + 1);
    CHECK(other.bit_of_block != plan.bit_of_block);

    CHECK(make_plan(kKey, 256, 8, 1024).length == 1024);
    try {
        make_plan(kKey, 256, 8, 1025);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::capacity_exceeded);
    }
    CHECK_THROWS_AS(make_plan(kKey, 250, 8, 30), Error);
}

TEST_CASE("chips are zero-mean half cosines") {
    const EmbedPlan plan = make_plan(kKey);
    for (int block = 0; block < 16; ++block) {
        double sum = 0.0, sq = 0.0;
        for (int dy = 0; dy < 8; ++dy) {
            for (int dx = 0; dx < 8; ++dx) {
                const double v = plan.chip_value(block, dx, dy);
                sum += v;
                sq += v * v;
            }
        }
        CHECK(std::abs(sum) < 1e-12);
        CHECK(sq / 64.0 == doctest::Approx(0.5));
    }
}

TEST_CASE("zero strength leaves the object bit-exact") {
    const SyncObject obj = synced_item(0);
    const EmbedPlan plan = make_plan(kKey, 256, 8, 30, 0.0);
    const EmbedResult r = embed(obj, MessageBits::random(1, 30), plan);
    CHECK(r.watermarked.canvas == obj.canvas);
    CHECK(r.masked_psnr == kPsnrCap);

    const CorpusItem item = make_desk_item(7, 1);
    CHECK(embed_into_host(item.image, item.mask, MessageBits::random(1, 30), plan) == item.image);
}

TEST_CASE("full-mask distortion matches the closed form") {
    // With no clipping, MSE = alpha^2 * mean(chip^2) = alpha^2 / 2.
    const SyncObject obj{Image(256, 256, 0.5), BinaryMask(256, 256, true)};
    const EmbedPlan plan = make_plan(kKey);
    const EmbedResult r = embed(obj, MessageBits::random(2, 30), plan);
    const double alpha = kDefaultStrength;
    const double expected = 10.0 * std::log10(2.0 / (alpha * alpha));
    CHECK(r.masked_psnr == doctest::Approx(expected).epsilon(1e-9));
    CHECK(expected == doctest::Approx(35.575).epsilon(1e-4));
}

TEST_CASE("residual stays inside the mask") {
    const SyncObject obj = synced_item(2);
    const EmbedResult r = embed(obj, MessageBits::random(3, 30), make_plan(kKey));
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            if (!obj.mask.at(x, y)) {
                REQUIRE(r.residual.at(x, y, 0) == 0.0);
                REQUIRE(r.watermarked.canvas.at(x, y, 1) == obj.canvas.at(x, y, 1));
            } else {
                REQUIRE(r.residual.at(x, y, 0) == r.residual.at(x, y, 2));
            }
        }
    }

    const CorpusItem item = make_desk_item(7, 3);
    const Image marked = embed_into_host(item.image, item.mask, MessageBits::random(3, 30), make_plan(kKey));
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            if (!item.mask.at(x, y)) {
                for (int c = 0; c < 3; ++c) {
                    REQUIRE(marked.at(x, y, c) == item.image.at(x, y, c));
                }
            }
        }
    }
}

TEST_CASE("canvas round trip on a flat host is exact") {
    const EmbedPlan plan = make_plan(kKey);
    const SyncObject flat{Image(256, 256, 0.5), synced_item(0).mask};
    for (int i = 0; i < 4; ++i) {
        const MessageBits msg = MessageBits::random(10 + i, 30);
        const EmbedResult r = embed(flat, msg, plan);
        const DecodeReport d = extract(r.watermarked, plan, false);
        CHECK(d.bits == msg);
        CHECK_FALSE(d.rotated_180);
        CHECK(d.mean_confidence == doctest::Approx(1.0));
        CHECK(extract(r.watermarked, plan, true).bits == msg);
    }
}

TEST_CASE("canvas round trip on textured hosts is exact") {
    const EmbedPlan plan = make_plan(kKey);
    for (int i = 0; i < 8; ++i) {
        const SyncObject obj = synced_item(i);
        const MessageBits msg = MessageBits::random(10 + i, 30);
        const EmbedResult r = embed(obj, msg, plan);
        const DecodeReport d = extract(r.watermarked, plan, false);
        CAPTURE(i);
        CHECK(d.bits == msg);
        CHECK(d.used_blocks > 200);
        for (double c : d.per_bit_confidence) {
            CHECK(c >= plan.bit_margin - 0.05);
        }
    }
}

TEST_CASE("informed gain only boosts bits the host works against") {
    // Bit 0 sits on blocks whose host content correlates negatively with
    // their chips; every other block is flat.
    const EmbedPlan plan = make_plan(kKey);
    SyncObject obj{Image(256, 256, 0.5), BinaryMask(256, 256, true)};
    const double host_amp = 0.8 * plan.strength;
    for (int block = 0; block < plan.block_count(); ++block) {
        if (plan.bit_of_block[static_cast<std::size_t>(block)] != 0) {
            continue;
        }
        const int bx = block % plan.blocks_per_side();
        const int by = block / plan.blocks_per_side();
        for (int dy = 0; dy < 8; ++dy) {
            for (int dx = 0; dx < 8; ++dx) {
                for (int c = 0; c < 3; ++c) {
                    obj.canvas.at(bx * 8 + dx, by * 8 + dy, c) = 0.5 - host_amp * plan.chip_value(block, dx, dy);
                }
            }
        }
    }
    MessageBits msg = MessageBits::random(4, 30);
    msg.bits[0] = 1;
    const EmbedResult r = embed(obj, msg, plan);
    // Host statistic of bit 0 is -0.8: gain 1 + (0.5 - 0.2) = 1.3.
    CHECK(r.bit_gain[0] == doctest::Approx(1.3));
    for (std::size_t i = 1; i < 30; ++i) {
        CHECK(r.bit_gain[i] == 1.0);
    }
    const DecodeReport d = extract(r.watermarked, plan, false);
    CHECK(d.bits == msg);
    CHECK(d.per_bit_confidence[0] == doctest::Approx(0.5));

    EmbedPlan plain = plan;
    plain.max_gain = 1.0;
    const EmbedResult p = embed(obj, msg, plain);
    CHECK(p.bit_gain[0] == 1.0);
    CHECK(extract(p.watermarked, plan, false).per_bit_confidence[0] == doctest::Approx(0.2));
    CHECK(p.masked_psnr > r.masked_psnr);
}

TEST_CASE("scale search recovers a mis-sized mask") {
    // A mask one pixel larger all round shifts the synchronized scale.
    const EmbedPlan plan = make_plan(kKey);
    const CorpusItem item = make_desk_item(7, 9);
    const MessageBits msg = MessageBits::random(77, 30);
    const Image marked = quantize(embed_into_host(item.image, item.mask, msg, plan));
    BinaryMask grown = item.mask;
    for (int y = 1; y + 1 < 256; ++y) {
        for (int x = 1; x + 1 < 256; ++x) {
            if (item.mask.at(x - 1, y) || item.mask.at(x + 1, y) || item.mask.at(x, y - 1) ||
                item.mask.at(x, y + 1)) {
                grown.set(x, y, true);
            }
        }
    }
    ExtractOptions fixed;
    fixed.scale_steps = 0;
    const DecodeReport without = decode_from_host(marked, grown, plan, {}, fixed);
    const DecodeReport with = decode_from_host(marked, grown, plan);
    CHECK(with.mean_confidence >= without.mean_confidence);
    CHECK(with.bits == msg);
    // On the true mask the search cannot lose confidence.
    CHECK(decode_from_host(marked, item.mask, plan).mean_confidence >=
          decode_from_host(marked, item.mask, plan, {}, fixed).mean_confidence);
}

TEST_CASE("host round trip recovers the message") {
    const EmbedPlan plan = make_plan(kKey);
    for (int i = 0; i < 4; ++i) {
        const CorpusItem item = make_desk_item(7, i);
        const MessageBits msg = MessageBits::random(30 + i, 30);
        const Image marked = embed_into_host(item.image, item.mask, msg, plan);
        CHECK(decode_from_host(marked, item.mask, plan).bits == msg);
        // Unit-mean-square chips at strength alpha cost 10 log10(2 / alpha^2)
        // dB over the object, diluted by the occupancy over the whole image.
        const double alpha = kDefaultStrength;
        const double bound = 10.0 * std::log10(2.0 / (alpha * alpha)) - 10.0 * std::log10(occupancy(item.mask));
        CHECK(psnr(marked, item.image) >= bound - 0.5);
        CHECK(psnr(marked, item.image) >= 38.0);
    }
}

TEST_CASE("wrong key decodes at chance level") {
    const SyncObject obj = synced_item(5);
    const EmbedPlan plan = make_plan(kKey);
    const MessageBits msg = MessageBits::random(99, 30);
    const EmbedResult r = embed(obj, msg, plan);
    double total = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double b = bar(extract(r.watermarked, make_plan(mix_seed(555, t)), false).bits, msg);
        CHECK(b >= 0.1);
        CHECK(b <= 0.9);
        total += b;
    }
    // Mean of 3000 fair coin flips: sd about 0.009.
    CHECK(std::abs(total / 100.0 - 0.5) <= 0.05);
}

TEST_CASE("empty canvas has no signal") {
    const SyncObject empty{Image(256, 256), BinaryMask(256, 256)};
    try {
        extract(empty, make_plan(kKey), false);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_signal);
    }
    // A filled but unmarked flat canvas carries nothing.
    const SyncObject flat{Image(256, 256, 0.5), BinaryMask(256, 256, true)};
    const DecodeReport d = extract(flat, make_plan(kKey), false);
    CHECK(d.mean_confidence < 1e-9);
}

TEST_CASE("mismatched inputs are rejected") {
    const SyncObject obj = synced_item(0);
    CHECK_THROWS_AS(embed(obj, MessageBits::random(1, 29), make_plan(kKey)), Error);
    CHECK_THROWS_AS(embed(obj, MessageBits::random(1, 30), make_plan(kKey, 128)), Error);
}

TEST_CASE("strength trades fidelity for confidence") {
    const SyncObject obj = synced_item(6);
    const EmbedPlan reference = make_plan(kKey);
    const MessageBits msg = MessageBits::random(7, 30);
    double last_psnr = 1e9;
    double last_conf = -1.0;
    for (int level : {2, 4, 6, 8}) {
        const EmbedPlan plan = make_plan(kKey, 256, 8, 30, level / 255.0);
        const EmbedResult r = embed(obj, msg, plan);
        const double conf = extract(r.watermarked, reference, false).mean_confidence;
        CAPTURE(level);
        CHECK(r.masked_psnr < last_psnr);
        CHECK(conf > last_conf);
        last_psnr = r.masked_psnr;
        last_conf = conf;
    }
}

TEST_CASE("BAR after a fixed attack does not fall with strength") {
    const auto corpus = make_desk_corpus(7, 50);
    const auto backgrounds = make_backgrounds(11, 4);
    const DistortionSpec blur{DistortionKind::gaussian_blur, 3.0};
    double last = 0.0;
    for (int level : {2, 4, 6, 8}) {
        const EmbedPlan plan = make_plan(kKey, 256, 8, 30, level / 255.0);
        double total = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const CorpusItem& item = corpus[i];
            const MessageBits msg = MessageBits::random(mix_seed(5, i), 30);
            const Image marked = quantize(embed_into_host(item.image, item.mask, msg, plan));
            const Image& bg = backgrounds[i % backgrounds.size()];
            const AttackSpec a = sample_attack(mix_seed(6, i), item.mask, bg.width(), bg.height());
            const Composite c = attack_pipeline(marked, item.mask, bg, a, {blur}, mix_seed(7, i));
            total += bar(decode_from_host(quantize(c.image), c.gt_mask, plan).bits, msg);
        }
        const double mean = total / static_cast<double>(corpus.size());
        CAPTURE(level);
        CAPTURE(mean);
        CHECK(mean >= last);
        last = mean;
    }
}
