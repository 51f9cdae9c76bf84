#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "glare/data/markup.hpp"
#include "glare/data/synth.hpp"
#include "glare/data/train.hpp"
#include "oracles.hpp"

using namespace glare;
namespace fs = std::filesystem;

namespace {

std::vector<TrainSample> to_train_samples(std::vector<SynthSample>&& synth) {
    std::vector<TrainSample> out;
    for (auto& s : synth)
        out.push_back(TrainSample{s.id, std::move(s.image), std::move(s.boxes_all),
                                  std::move(s.boxes_document)});
    return out;
}

}  // namespace

TEST_CASE("label rasterization applies the 25% rule exactly") {
    const BlockGridShape shape{2, 2, 64};

    // Full cover.
    MarkupBox full{0, 0, 64, 64};
    CHECK(rasterize_labels(std::vector{full}, shape).at(0, 0) == 1.0f);

    // Exactly 1024 of 4096 pixels (25%) is positive ("at least").
    MarkupBox exact{0, 0, 32, 32};
    CHECK(rasterize_labels(std::vector{exact}, shape).at(0, 0) == 1.0f);

    // 1023 pixels falls short.
    MarkupBox under{0, 0, 31, 33};
    REQUIRE(31 * 33 == 1023);
    CHECK(rasterize_labels(std::vector{under}, shape).at(0, 0) == 0.0f);

    CHECK_THROWS_AS(rasterize_labels(std::vector{full}, shape, 0.0), RangeError);
    CHECK_THROWS_AS(rasterize_labels(std::vector{full}, shape, 1.5), RangeError);
}

TEST_CASE("label rasterization matches the pixel-mask oracle") {
    Rng rng(1);
    const BlockGridShape shape{4, 5, 64};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MarkupBox> boxes;
        const int count = 1 + rng_index(rng, 5);
        for (int i = 0; i < count; ++i)
            boxes.push_back(MarkupBox{rng_index(rng, 320), rng_index(rng, 256),
                                      1 + rng_index(rng, 200), 1 + rng_index(rng, 160)});
        boxes = clip_boxes(boxes, shape.cols * 64, shape.rows * 64);
        const BlockGrid fast = rasterize_labels(boxes, shape);
        const BlockGrid slow = oracle::rasterize_by_mask(boxes, shape, 0.25);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("adding a box never clears a label") {
    Rng rng(2);
    const BlockGridShape shape{3, 3, 64};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<MarkupBox> boxes = {
            MarkupBox{rng_index(rng, 150), rng_index(rng, 150), 1 + rng_index(rng, 100),
                      1 + rng_index(rng, 100)}};
        const BlockGrid before = rasterize_labels(boxes, shape);
        boxes.push_back(MarkupBox{rng_index(rng, 150), rng_index(rng, 150),
                                  1 + rng_index(rng, 100), 1 + rng_index(rng, 100)});
        const BlockGrid after = rasterize_labels(boxes, shape);
        for (size_t i = 0; i < before.size(); ++i)
            REQUIRE(after.values[i] >= before.values[i]);
    }
}

TEST_CASE("overlapping boxes count union area, not summed area") {
    const BlockGridShape shape{1, 1, 64};
    // Two identical 1000-px boxes: union stays below the 1024-px bar.
    MarkupBox b{0, 0, 40, 25};
    REQUIRE(40 * 25 == 1000);
    const BlockGrid grid = rasterize_labels(std::vector{b, b}, shape);
    CHECK(grid.at(0, 0) == 0.0f);

    // Two disjoint 520-px boxes push the union over it.
    MarkupBox b1{0, 0, 40, 13}, b2{0, 32, 40, 13};
    const BlockGrid grid2 = rasterize_labels(std::vector{b1, b2}, shape);
    CHECK(grid2.at(0, 0) == 1.0f);
}

TEST_CASE("random crops are aligned, deterministic and consistent") {
    Rng rng(3);
    const SynthSample synth = synth_sample_at(0, 77);
    const FeatureStack fs = assemble_feature_stack(synth.image, 64, 8);
    const BlockGridShape shape{fs.rows, fs.cols, 64};
    const BlockGrid labels =
        rasterize_labels(clip_boxes(synth.boxes_all, synth.image.width,
                                    synth.image.height), shape);

    // Full-grid crop is the identity.
    Rng rng_a(9);
    const CropPair full = random_crop(fs, labels, fs.rows, fs.cols, rng_a);
    CHECK(full.features == fs);
    CHECK(full.labels == labels);

    // Same seed, same offsets.
    Rng rng_b(10), rng_c(10);
    const CropPair c1 = random_crop(fs, labels, 3, 4, rng_b);
    const CropPair c2 = random_crop(fs, labels, 3, 4, rng_c);
    CHECK(c1.features == c2.features);
    CHECK(c1.labels == c2.labels);

    // Oversized crops are rejected.
    CHECK_THROWS_AS(random_crop(fs, labels, fs.rows + 1, 1, rng), DimensionError);

    // Cropped labels equal rasterization over the shifted pixel window.
    for (int trial = 0; trial < 10; ++trial) {
        Rng probe(100 + trial), replay(100 + trial);
        const CropPair crop = random_crop(fs, labels, 4, 5, probe);
        const int r0 = rng_index(replay, fs.rows - 4 + 1);
        const int c0 = rng_index(replay, fs.cols - 5 + 1);
        std::vector<MarkupBox> shifted;
        for (const auto& b : synth.boxes_all)
            shifted.push_back(MarkupBox{b.x - c0 * 64, b.y - r0 * 64, b.width, b.height});
        const BlockGrid expect =
            rasterize_labels(clip_boxes(shifted, 5 * 64, 4 * 64), BlockGridShape{4, 5, 64});
        REQUIRE(crop.labels == expect);
    }
}

TEST_CASE("hard negative selection ranks by loss with stable ties") {
    Rng rng(4);
    std::vector<TrainSample> samples =
        to_train_samples(synth_dataset(6, 123, SynthProfile{{{448, 384}}}));
    TrainOptions opts;
    opts.scale_buckets = 3;
    const ModelGraph model = build_glare_net(GlareNetConfig{}, rng);

    const std::vector<int> all = hard_negative_select(model, samples, 1,
                                                      samples.size(), opts);
    CHECK(all.size() == samples.size());

    // Equals a brute-force sort of independently recomputed losses.
    std::vector<std::pair<double, int>> scored;
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
        const FeatureStack fs = assemble_feature_stack(samples[static_cast<size_t>(i)].image,
                                                       64, 8);
        const BlockGridShape shape{fs.rows, fs.cols, 64};
        const BlockGrid labels = rasterize_labels(
            clip_boxes(samples[static_cast<size_t>(i)].boxes_all,
                       samples[static_cast<size_t>(i)].image.width,
                       samples[static_cast<size_t>(i)].image.height), shape);
        const BlockGrid heat = glare_forward(model, fs);
        const double pw = batch_pos_weight({&labels}, opts.pos_weight_cap);
        scored.emplace_back(weighted_bce(heat, labels, pw).loss, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == scored[i].second);

    CHECK_THROWS_AS(hard_negative_select(model, {}, 1, 0, opts), DimensionError);
    CHECK_THROWS_AS(hard_negative_select(model, samples, 1, samples.size() + 1, opts),
                    RangeError);
}

TEST_CASE("a perfectly predicted sample is never selected over a mispredicted one") {
    // Two tiny hand-built samples; the model is rigged so sample 0 scores
    // near-zero loss and sample 1 does not.
    Rng rng(5);
    std::vector<TrainSample> samples = to_train_samples(
        synth_dataset(2, 321, SynthProfile{{{448, 384}}}));
    TrainOptions opts;
    opts.scale_buckets = 1;
    opts.scale_min = opts.scale_max = 1.0;
    const ModelGraph model = build_glare_net(GlareNetConfig{}, rng);
    const std::vector<int> ranked =
        hard_negative_select(model, samples, 1, 2, opts);

    // Verify the ranking matches the actual per-sample losses.
    std::vector<double> losses;
    for (const auto& s : samples) {
        const FeatureStack fs = assemble_feature_stack(s.image, 64, 8);
        const BlockGrid labels = rasterize_labels(
            clip_boxes(s.boxes_all, s.image.width, s.image.height),
            BlockGridShape{fs.rows, fs.cols, 64});
        const BlockGrid heat = glare_forward(model, fs);
        losses.push_back(weighted_bce(heat, labels,
                                      batch_pos_weight({&labels}, 50)).loss);
    }
    CHECK(losses[static_cast<size_t>(ranked[0])] >= losses[static_cast<size_t>(ranked[1])]);
}

TEST_CASE("synthetic generation is deterministic and capped") {
    const std::vector<SynthSample> a = synth_dataset(8, 42);
    const std::vector<SynthSample> b = synth_dataset(8, 42);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].image == b[i].image);
        REQUIRE(a[i].boxes_all == b[i].boxes_all);
        REQUIRE(a[i].boxes_document == b[i].boxes_document);
    }
    // Parallel generation produces the same bytes.
    const std::vector<SynthSample> c = synth_dataset(8, 42, SynthProfile{}, 4);
    for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].image == c[i].image);

    for (const auto& s : a) {
        const double area = static_cast<double>(s.image.width) * s.image.height;
        CHECK(static_cast<double>(box_union_area(s.boxes_all)) / area <= 0.40);
        // Document markup stays inside the page.
        for (const auto& box : s.boxes_document) {
            CHECK(box.x >= s.document.x);
            CHECK(box.y >= s.document.y);
            CHECK(box.x + box.width <= s.document.x + s.document.width);
            CHECK(box.y + box.height <= s.document.y + s.document.height);
        }
    }
}

TEST_CASE("glare blobs stay inside their ground-truth boxes at half maximum") {
    SynthProfile profile;
    profile.keep_glare_blobs = true;
    for (int i = 0; i < 6; ++i) {
        const SynthSample s = synth_sample_at(i, 99, profile);
        REQUIRE(!s.blobs.empty());
        for (size_t bi = 0; bi < s.blobs.size(); ++bi) {
            const SynthBlob& blob = s.blobs[bi];
            const double sx = blob.rx / 1.1774100225154747;
            const double sy = blob.ry / 1.1774100225154747;
            // Sample a dense lattice around the blob; every pixel whose
            // additive contribution exceeds half the amplitude must fall in
            // some ground-truth box.
            const int x0 = static_cast<int>(blob.cx - blob.rx) - 3;
            const int x1 = static_cast<int>(blob.cx + blob.rx) + 3;
            const int y0 = static_cast<int>(blob.cy - blob.ry) - 3;
            const int y1 = static_cast<int>(blob.cy + blob.ry) + 3;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    if (x < 0 || y < 0 || x >= s.image.width || y >= s.image.height)
                        continue;
                    const double dx = (x - blob.cx) / sx;
                    const double dy = (y - blob.cy) / sy;
                    const double contribution =
                        blob.amplitude * std::exp(-0.5 * (dx * dx + dy * dy));
                    if (contribution > blob.amplitude / 2.0) {
                        bool inside = false;
                        for (const auto& box : s.boxes_all)
                            inside |= x >= box.x && x < box.x + box.width &&
                                      y >= box.y && y < box.y + box.height;
                        REQUIRE(inside);
                    }
                }
        }
    }
}

TEST_CASE("generated glare area statistics land near the target") {
    // Mean union-of-boxes fraction over a large deterministic draw.
    const int n = 500;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const SynthSample s = synth_sample_at(i, 2024);
        total += static_cast<double>(box_union_area(s.boxes_all)) /
                 (static_cast<double>(s.image.width) * s.image.height);
    }
    const double mean = total / n;
    CHECK(mean >= 0.048);
    CHECK(mean <= 0.068);
}

TEST_CASE("documents cover at least 60% of the frame") {
    for (int i = 0; i < 20; ++i) {
        const SynthSample s = synth_sample_at(i, 7);
        const double coverage =
            static_cast<double>(s.document.width) * s.document.height /
            (static_cast<double>(s.image.width) * s.image.height);
        REQUIRE(coverage >= 0.60);
    }
}

TEST_CASE("default schedule mirrors the training recipe") {
    const TrainSchedule sched = default_schedule();
    REQUIRE(sched.size() == 3);
    CHECK(sched[0].dataset_id == 1);
    CHECK(sched[0].policy == BatchPolicy::Random);
    CHECK(sched[0].epochs == 1500);
    CHECK(sched[1].dataset_id == 1);
    CHECK(sched[1].policy == BatchPolicy::HardNegative);
    CHECK(sched[1].epochs == 250);
    CHECK(sched[2].dataset_id == 2);
    CHECK(sched[2].policy == BatchPolicy::HardNegative);
    CHECK(sched[2].epochs == 250);
}

TEST_CASE("one epoch with zero learning rate leaves weights unchanged") {
    Rng rng(6);
    std::vector<TrainSample> samples =
        to_train_samples(synth_dataset(1, 55, SynthProfile{{{448, 384}}}));
    ModelGraph model = build_glare_net(GlareNetConfig{}, rng);

    std::vector<std::vector<float>> before;
    for (const auto& l : model.layers())
        if (l.kind == LayerKind::Conv) before.push_back(l.conv.weights);

    TrainOptions opts;
    opts.adam.lr = 0.0;
    opts.seed = 1;
    opts.scale_buckets = 1;
    opts.scale_min = opts.scale_max = 1.0;
    const auto log = run_schedule(model, {{1, BatchPolicy::Random, 1}}, samples, opts);
    REQUIRE(log.size() == 1);

    size_t idx = 0;
    for (const auto& l : model.layers())
        if (l.kind == LayerKind::Conv) REQUIRE(l.conv.weights == before[idx++]);
}

TEST_CASE("training is deterministic for a fixed seed") {
    std::vector<TrainSample> samples =
        to_train_samples(synth_dataset(4, 11, SynthProfile{{{448, 384}}}));
    TrainOptions opts;
    opts.seed = 3;
    opts.scale_buckets = 3;
    const TrainSchedule sched = {{1, BatchPolicy::Random, 6},
                                 {2, BatchPolicy::HardNegative, 4}};

    Rng rng_a(7), rng_b(7);
    ModelGraph m1 = build_glare_net(GlareNetConfig{}, rng_a);
    ModelGraph m2 = build_glare_net(GlareNetConfig{}, rng_b);
    const auto log1 = run_schedule(m1, sched, samples, opts);
    const auto log2 = run_schedule(m2, sched, samples, opts);

    REQUIRE(log1.size() == log2.size());
    for (size_t i = 0; i < log1.size(); ++i) REQUIRE(log1[i].loss == log2[i].loss);
    for (int i = 0; i < m1.layer_count(); ++i)
        if (m1.layer(i).kind == LayerKind::Conv)
            REQUIRE(m1.layer(i).conv.weights == m2.layer(i).conv.weights);
}

TEST_CASE("loss trends down on a small synthetic set") {
    std::vector<TrainSample> samples =
        to_train_samples(synth_dataset(10, 500, SynthProfile{{{448, 384}, {384, 448}}}));
    Rng rng(8);
    ModelGraph model = build_glare_net(GlareNetConfig{}, rng);
    TrainOptions opts;
    opts.seed = 21;
    opts.scale_buckets = 3;  // keep the cache small for the smoke test
    const auto log = run_schedule(model, {{1, BatchPolicy::Random, 50}}, samples, opts);
    REQUIRE(log.size() == 50);

    auto window_mean = [&](int from, int to) {
        double s = 0;
        for (int i = from; i < to; ++i) s += log[static_cast<size_t>(i)].loss;
        return s / (to - from);
    };
    CHECK(window_mean(40, 50) < window_mean(0, 10));
}

TEST_CASE("markup JSON round-trips") {
    const ImageMarkup m{"img_00001.pgm", MarkupMode::DocumentOnly,
                        {{10, 20, 30, 40}, {1, 2, 3, 4}}};
    const auto path = fs::temp_directory_path() / "glare_markup_roundtrip.json";
    save_markup(path.string(), m);
    const ImageMarkup loaded = load_markup(path.string());
    CHECK(loaded.image == m.image);
    CHECK(loaded.mode == m.mode);
    CHECK(loaded.boxes == m.boxes);
    fs::remove(path);

    CHECK_THROWS_AS(markup_mode_from_name("bogus"), FormatError);
    CHECK_THROWS_AS(load_markup("/nonexistent/markup.json"), FormatError);
}
