// Acceptance suite: one pass/fail line per criterion, nonzero exit when a
// hard criterion fails. Optional argv filters select criteria by number,
// e.g. `acceptance 1 4 8`.
//
//  1  kernel-oracle equivalence on random instances
//  2  gradient correctness against finite differences
//  3  architecture fidelity (branch/kernel layout, receptive field, budget)
//  4  block-label rule against a pixel-mask oracle
//  5  training surrogate beats the naive-Bayes baseline and reaches F >= 0.70
//  6  performance budget on a 4K frame (hard gate: forward <= 120 ms)
//  7  comparison network: shapes, training, and runtime ordering
//  8  bit-level determinism of seeded CLI workflows

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glare/glare.hpp"
#include "../gradcheck.hpp"
#include "../oracles.hpp"

namespace fs = std::filesystem;
using namespace glare;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int g_failures = 0;

void report(int number, const std::string& name, const Outcome& o) {
    std::printf("%s  criterion-%d (%s): %s\n", o.pass ? "PASS" : "FAIL", number,
                name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++g_failures;
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: kernel-oracle equivalence

Outcome criterion_kernel_oracles() {
    Rng rng(1001);
    double worst_float = 0.0;
    int mismatches = 0;

    for (int i = 0; i < 100; ++i) {
        const int k = i % 2 == 0 ? 3 : 1;
        ConvParams p(ConvSpec{k, 1 + rng_index(rng, 6), 1 + rng_index(rng, 8),
                              static_cast<Activation>(rng_index(rng, 3))});
        he_init(p, rng);
        const Tensor3 x = oracle::random_tensor(rng, 2 + rng_index(rng, 8),
                                                2 + rng_index(rng, 8),
                                                p.spec.in_channels);
        worst_float = std::max(worst_float,
                               oracle::max_abs_diff(oracle::conv2d(oracle::from_float(x), p),
                                                    conv2d(x, p)));
    }
    for (int i = 0; i < 100; ++i) {
        const Tensor3 x = oracle::random_tensor(rng, 2 * (1 + rng_index(rng, 6)),
                                                2 * (1 + rng_index(rng, 6)),
                                                1 + rng_index(rng, 5));
        mismatches += oracle::max_abs_diff(oracle::maxpool2(oracle::from_float(x)),
                                           maxpool2(x)) != 0.0;
        mismatches += oracle::max_abs_diff(oracle::upsample2(oracle::from_float(x)),
                                           upsample2(x)) != 0.0;
    }
    for (int i = 0; i < 100; ++i) {
        const Tensor3 x = oracle::random_tensor(rng, 2 + rng_index(rng, 10),
                                                2 + rng_index(rng, 10),
                                                1 + rng_index(rng, 6), -9.0, 9.0);
        worst_float = std::max(worst_float,
                               oracle::max_abs_diff(oracle::instance_norm(oracle::from_float(x)),
                                                    instance_norm(x)));
    }
    for (int i = 0; i < 100; ++i) {
        const BinaryImage block = oracle::random_binary(rng, 64, 64);
        const BinaryBlockView view{block.pixels.data(), 64, 64};
        const RunLengthHistograms h = run_length_histograms(view);
        const oracle::RunList runs = oracle::enumerate_runs(view);
        mismatches += h.black_h.bins != oracle::histogram_from_runs(runs.black_h, 8);
        mismatches += h.black_v.bins != oracle::histogram_from_runs(runs.black_v, 8);
        mismatches += h.white_h.bins != oracle::histogram_from_runs(runs.white_h, 8);
        mismatches += h.white_v.bins != oracle::histogram_from_runs(runs.white_v, 8);
    }
    {
        const BlockGridShape shape{4, 5, 64};
        for (int i = 0; i < 100; ++i) {
            std::vector<MarkupBox> boxes;
            for (int b = 0; b < 1 + rng_index(rng, 5); ++b)
                boxes.push_back(MarkupBox{rng_index(rng, 320), rng_index(rng, 256),
                                          1 + rng_index(rng, 220), 1 + rng_index(rng, 180)});
            boxes = clip_boxes(boxes, shape.cols * 64, shape.rows * 64);
            mismatches += !(rasterize_labels(boxes, shape) ==
                            oracle::rasterize_by_mask(boxes, shape, 0.25));
        }
    }
    // Sauvola: integer output, independent naive window scan.
    for (int i = 0; i < 20; ++i) {
        const GrayImage img = oracle::random_gray(rng, 40 + rng_index(rng, 40),
                                                  40 + rng_index(rng, 40));
        mismatches += !(binarize(img) == oracle::sauvola(img, 31, 0.2, 128.0));
    }

    Outcome o;
    o.pass = worst_float < 1e-5 && mismatches == 0;
    o.detail = "float kernels max|err| " + fmt(worst_float, 8) +
               " (<1e-5), integer-op mismatches " + std::to_string(mismatches) + "/520";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient correctness

Outcome criterion_gradients() {
    Rng rng(2002);
    double worst = 0.0;
    int configs = 0;
    for (int i = 0; i < 24; ++i) {
        const auto res = gradcheck::check_conv(rng, 3 + rng_index(rng, 6),
                                               3 + rng_index(rng, 6),
                                               i % 2 == 0 ? 3 : 1,
                                               1 + rng_index(rng, 5),
                                               1 + rng_index(rng, 6),
                                               static_cast<Activation>(i % 3));
        worst = std::max({worst, res.weight_err, res.bias_err, res.input_err});
        ++configs;
    }
    for (int i = 0; i < 5; ++i) {
        worst = std::max(worst, gradcheck::check_instance_norm(
                                    rng, 3 + rng_index(rng, 5), 3 + rng_index(rng, 5),
                                    1 + rng_index(rng, 4)));
        worst = std::max(worst, gradcheck::check_maxpool(rng, 4 + 2 * rng_index(rng, 3),
                                                         4 + 2 * rng_index(rng, 3),
                                                         1 + rng_index(rng, 3)));
        worst = std::max(worst, gradcheck::check_upsample(rng, 2 + rng_index(rng, 4),
                                                          2 + rng_index(rng, 4),
                                                          1 + rng_index(rng, 3)));
        worst = std::max(worst, gradcheck::check_bce(rng, 3 + rng_index(rng, 4),
                                                     3 + rng_index(rng, 4),
                                                     i % 2 == 0 ? 1.0 : 12.5));
        configs += 4;
    }
    worst = std::max(worst, gradcheck::check_composed_graph(rng));
    ++configs;

    Outcome o;
    o.pass = worst < 1e-4;
    o.detail = std::to_string(configs) + " configurations, worst normalized error " +
               fmt(worst, 7) + " (<1e-4)";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 3: architecture fidelity

Outcome criterion_architecture() {
    Rng rng(3003);
    const GlareNetConfig cfg;
    const ModelGraph g = build_glare_net(cfg, rng);
    Outcome o;

    bool structure = g.input_count() == 5;
    for (const std::string& branch : glare_branch_names()) {
        int seq[3] = {0, 0, 0};
        for (const auto& l : g.layers()) {
            if (l.name == branch + ".conv1") seq[0] = l.conv.spec.kernel;
            if (l.name == branch + ".conv2") seq[1] = l.conv.spec.kernel;
            if (l.name == branch + ".conv3") seq[2] = l.conv.spec.kernel;
        }
        structure = structure && seq[0] == 1 && seq[1] == 3 && seq[2] == 3;
    }
    int pred_seq[4] = {0, 0, 0, 0};
    for (const auto& l : g.layers()) {
        if (l.name == "pred.conv1") pred_seq[0] = l.conv.spec.kernel;
        if (l.name == "pred.conv2") pred_seq[1] = l.conv.spec.kernel;
        if (l.name == "pred.conv3") pred_seq[2] = l.conv.spec.kernel;
        if (l.name == "pred.out") pred_seq[3] = l.conv.spec.kernel;
    }
    structure = structure && pred_seq[0] == 3 && pred_seq[1] == 3 && pred_seq[2] == 3 &&
                pred_seq[3] == 1;

    // Statistics-preserving two-block swap: influence confined to the two
    // 11x11 neighborhoods even through the normalization stage.
    FeatureStack stack_in;
    stack_in.rows = 27;
    stack_in.cols = 27;
    stack_in.bins = cfg.bins;
    stack_in.block_size = 64;
    stack_in.lum = oracle::random_tensor(rng, 27, 27, 5, 0.0, 255.0);
    stack_in.hist_black_h = oracle::random_tensor(rng, 27, 27, 8, 0.0, 1.0);
    stack_in.hist_black_v = oracle::random_tensor(rng, 27, 27, 8, 0.0, 1.0);
    stack_in.hist_white_h = oracle::random_tensor(rng, 27, 27, 8, 0.0, 1.0);
    stack_in.hist_white_v = oracle::random_tensor(rng, 27, 27, 8, 0.0, 1.0);
    const BlockGrid base = glare_forward(g, stack_in);
    const int r1 = 6, c1 = 6, r2 = 20, c2 = 20;
    for (Tensor3* t : {&stack_in.lum, &stack_in.hist_black_h, &stack_in.hist_black_v,
                       &stack_in.hist_white_h, &stack_in.hist_white_v})
        for (int ch = 0; ch < t->channels; ++ch)
            std::swap(t->at(r1, c1, ch), t->at(r2, c2, ch));
    const BlockGrid swapped = glare_forward(g, stack_in);

    bool confined = true;
    int changed = 0;
    for (int r = 0; r < 27; ++r)
        for (int c = 0; c < 27; ++c) {
            const bool inside = (std::abs(r - r1) <= 5 && std::abs(c - c1) <= 5) ||
                                (std::abs(r - r2) <= 5 && std::abs(c - c2) <= 5);
            if (inside)
                changed += base.at(r, c) != swapped.at(r, c);
            else
                confined = confined && base.at(r, c) == swapped.at(r, c);
        }

    // Conv-stack single impulse without the normalization stage.
    {
        ModelGraph stack;
        int id = stack.add_input("x", 5 + 4 * cfg.bins);
        id = stack.add_conv("b1", id, 1, cfg.branch_c1, Activation::Relu);
        id = stack.add_conv("b2", id, 3, cfg.branch_c2, Activation::Relu);
        id = stack.add_conv("b3", id, 3, cfg.branch_c3, Activation::Relu);
        id = stack.add_conv("p1", id, 3, 32, Activation::Relu);
        id = stack.add_conv("p2", id, 3, 32, Activation::Relu);
        id = stack.add_conv("p3", id, 3, 24, Activation::Relu);
        id = stack.add_conv("out", id, 1, 1, Activation::Sigmoid);
        stack.set_output(id);
        for (int i = 0; i < stack.layer_count(); ++i)
            if (stack.layer(i).kind == LayerKind::Conv)
                he_init(stack.layer(i).conv, rng);
        Tensor3 zeros(25, 25, 5 + 4 * cfg.bins);
        Tensor3 poke = zeros;
        for (int ch = 0; ch < poke.channels; ++ch)
            poke.at(12, 12, ch) = static_cast<float>(rng_range(rng, 0.5, 1.5));
        const Tensor3 a = stack.forward({&zeros});
        const Tensor3 b = stack.forward({&poke});
        for (int r = 0; r < 25; ++r)
            for (int c = 0; c < 25; ++c)
                if (!(std::abs(r - 12) <= 5 && std::abs(c - 12) <= 5))
                    confined = confined && a.at(r, c, 0) == b.at(r, c, 0);
    }

    const size_t analytic = glare_net_parameter_count(cfg);
    const fs::path wpath = fs::temp_directory_path() / "glare_accept_net.glnw";
    save_weights(g, wpath.string());
    size_t serialized = 0;
    for (const auto& rec : read_weight_records(wpath.string())) serialized += rec.data.size();
    fs::remove(wpath);

    o.pass = structure && confined && changed > 0 && analytic <= 500000 &&
             analytic == g.parameter_count() && serialized == analytic;
    o.detail = "branches 1-3-3, predictor 3-3-3-1, influence confined to 11x11, " +
               std::to_string(analytic) + " parameters (<=500000, serialized " +
               std::to_string(serialized) + ")";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 4: label rule fidelity

Outcome criterion_label_rule() {
    Rng rng(4004);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const BlockGridShape shape{2 + rng_index(rng, 4), 2 + rng_index(rng, 5), 64};
        std::vector<MarkupBox> boxes;
        for (int b = 0; b < 1 + rng_index(rng, 6); ++b)
            boxes.push_back(MarkupBox{rng_index(rng, shape.cols * 64),
                                      rng_index(rng, shape.rows * 64),
                                      1 + rng_index(rng, 200), 1 + rng_index(rng, 170)});
        boxes = clip_boxes(boxes, shape.cols * 64, shape.rows * 64);
        if (!(rasterize_labels(boxes, shape) ==
              oracle::rasterize_by_mask(boxes, shape, 0.25)))
            ++mismatches;
    }

    const BlockGridShape one{1, 1, 64};
    const bool at_boundary =
        rasterize_labels(std::vector{MarkupBox{0, 0, 32, 32}}, one).at(0, 0) == 1.0f;
    const bool under_boundary =
        rasterize_labels(std::vector{MarkupBox{0, 0, 31, 33}}, one).at(0, 0) == 0.0f;

    Outcome o;
    o.pass = mismatches == 0 && at_boundary && under_boundary;
    o.detail = "1000 random box sets, " + std::to_string(mismatches) +
               " mismatches; 1024px fires, 1023px does not";
    return o;
}

// ---------------------------------------------------------------------------
// Criteria 5 and 7 share one synthetic split.

struct Split {
    std::vector<TrainSample> train;
    std::vector<TrainSample> test;
};

Split make_split() {
    std::vector<SynthSample> synth = synth_dataset(250, 4242, SynthProfile{},
                                                   worker_count());
    Split split;
    for (size_t i = 0; i < synth.size(); ++i) {
        TrainSample s{synth[i].id, std::move(synth[i].image),
                      std::move(synth[i].boxes_all), std::move(synth[i].boxes_document)};
        if (i < 200)
            split.train.push_back(std::move(s));
        else
            split.test.push_back(std::move(s));
    }
    return split;
}

BlockGrid document_labels(const TrainSample& s, int block_size) {
    const BlockGridShape shape = tile_shape(s.image, block_size);
    return rasterize_labels(
        clip_boxes(s.boxes_document, s.image.width, s.image.height), shape);
}

Outcome criterion_training_surrogate(const Split& split) {
    const int workers = worker_count();

    Rng rng(1234);
    ModelGraph model = build_glare_net(GlareNetConfig{}, rng);
    TrainOptions opts;
    opts.seed = 99;
    opts.workers = workers;
    const TrainSchedule schedule = {{1, BatchPolicy::Random, 150},
                                    {1, BatchPolicy::HardNegative, 25},
                                    {2, BatchPolicy::HardNegative, 25}};
    WallTimer timer;
    run_schedule(model, schedule, split.train, opts);
    const double train_ms = timer.ms();

    SweepAccumulator acc;
    for (const auto& s : split.test) {
        const FeatureStack fs = assemble_feature_stack(s.image, 64, 8, workers);
        acc.add(glare_forward(model, fs, workers), document_labels(s, 64));
    }
    const SweepRow best = best_row(acc.rows());

    // Naive-Bayes baseline on the same split.
    std::vector<LuminanceFeatures> nb_features;
    std::vector<std::uint8_t> nb_labels;
    for (const auto& s : split.train) {
        const FeatureStack fs = assemble_feature_stack(s.image, 64, 8, workers);
        const BlockGrid labels = document_labels(s, 64);
        for (int r = 0; r < fs.rows; ++r)
            for (int c = 0; c < fs.cols; ++c) {
                nb_features.push_back(nb_features_from_stack(fs, r, c));
                nb_labels.push_back(labels.at(r, c) > 0.5f ? 1 : 0);
            }
    }
    const NaiveBayesModel nb = nb_fit(nb_features, nb_labels);
    SweepAccumulator nb_acc;
    for (const auto& s : split.test) {
        const FeatureStack fs = assemble_feature_stack(s.image, 64, 8, workers);
        nb_acc.add(nb_heatmap(nb, fs), document_labels(s, 64));
    }
    const SweepRow nb_best = best_row(nb_acc.rows());

    Outcome o;
    o.pass = best.f >= 0.70 && best.f > nb_best.f;
    o.detail = "test F " + fmt(best.f) + " at threshold " + fmt(best.threshold, 2) +
               " (>=0.70), naive Bayes F " + fmt(nb_best.f) + " (" +
               fmt(train_ms / 1000.0, 1) + "s training)";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 6: performance budget on 4K

Outcome criterion_performance(double* glare_total_ms) {
    const SynthSample big = synth_sample_at(0, 9090, SynthProfile{}, 3840, 2160);
    Rng rng(66);
    const ModelGraph model = build_glare_net(GlareNetConfig{}, rng);

    const BenchTimings serial = bench_pipeline(model, big.image, 5, 64, 8, 1, 1);
    const BenchTimings parallel =
        bench_pipeline(model, big.image, 5, 64, 8, worker_count(), 1);
    if (glare_total_ms != nullptr) *glare_total_ms = serial.total_ms;

    // Soft budgets are reported; the hard gate is the forward pass.
    Outcome o;
    o.pass = serial.forward_ms <= 120.0;
    o.detail = "4K features " + fmt(serial.feature_ms, 1) + "ms serial / " +
               fmt(parallel.feature_ms, 1) +
               "ms parallel (targets 1000/400, reported), forward " +
               fmt(serial.forward_ms, 1) + "ms (hard gate <=120), total " +
               fmt(serial.total_ms, 1) + "ms";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 7: U-Net comparison

Outcome criterion_unet(const Split& split, double glare_total_ms) {
    const int workers = worker_count();
    Rng rng(77);
    ModelGraph unet = build_unet(rng);

    const GrayImage probe(128, 96, 100);
    const BlockGrid probe_out = unet_forward(unet, probe, workers);
    const bool shapes_ok = probe_out.rows == 12 && probe_out.cols == 16;

    UnetTrainOptions opts;
    opts.seed = 7;
    opts.epochs = 180;
    opts.workers = workers;
    WallTimer timer;
    train_unet(unet, split.train, 2, opts);
    const double train_s = timer.ms() / 1000.0;

    SweepAccumulator acc;
    for (const auto& s : split.test) {
        const GrayImage cropped = crop_to_multiple32(s.image);
        const BlockGridShape shape{cropped.height / 8, cropped.width / 8, 8};
        const BlockGrid labels = rasterize_labels(
            clip_boxes(s.boxes_document, cropped.width, cropped.height), shape);
        acc.add(unet_forward(unet, s.image, workers), labels);
    }
    const SweepRow best = best_row(acc.rows());

    const SynthSample big = synth_sample_at(0, 9090, SynthProfile{}, 3840, 2160);
    std::vector<double> times;
    for (int rep = 0; rep < 3; ++rep) {
        WallTimer t;
        const BlockGrid out = unet_forward(unet, big.image, workers);
        (void)out;
        times.push_back(t.ms());
    }
    const double unet_ms = median(times);

    Outcome o;
    o.pass = shapes_ok && best.f >= 0.65 && unet_ms >= 5.0 * glare_total_ms;
    o.detail = "output=input/8 " + std::string(shapes_ok ? "ok" : "BROKEN") +
               ", test F " + fmt(best.f) + " (>=0.65), 4K inference " +
               fmt(unet_ms, 0) + "ms vs pipeline " + fmt(glare_total_ms, 0) +
               "ms (>=5x), params " + std::to_string(unet.parameter_count()) + ", " +
               fmt(train_s, 1) + "s training";
    return o;
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI determinism

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : WEXITSTATUS(rc);
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::vector<char> ba((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    std::vector<char> bb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    return ba == bb;
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) names_a.insert(fs::relative(e.path(), a).string());
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) names_b.insert(fs::relative(e.path(), b).string());
    if (names_a != names_b) return false;
    for (const auto& rel : names_a)
        if (!same_bytes(a / rel, b / rel)) return false;
    return true;
}

Outcome criterion_determinism() {
    const char* cli_env = std::getenv("GLARE_CLI");
    Outcome o;
    if (cli_env == nullptr) {
        o.pass = false;
        o.detail = "GLARE_CLI not set; cannot drive the binary";
        return o;
    }
    const std::string cli = cli_env;
    const fs::path root = fs::temp_directory_path() / "glare_accept_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string r = root.string();

    std::vector<std::string> problems;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    };

    expect(run_cli(cli, "gen-data --n 6 --seed 11 --out " + r + "/A") == 0, "gen-data A");
    expect(run_cli(cli, "gen-data --n 6 --seed 11 --out " + r + "/B") == 0, "gen-data B");
    expect(same_tree(root / "A", root / "B"), "gen-data determinism");

    {
        std::ifstream mf(root / "A" / "manifest.ndjson");
        int lines = 0;
        std::string line;
        while (std::getline(mf, line)) lines += !line.empty();
        expect(lines == 6, "manifest entry count");
    }

    const std::string img = r + "/A/images/img_00000.pgm";
    expect(run_cli(cli, "extract --image " + img + " --out " + r + "/f1.glfs") == 0, "extract 1");
    expect(run_cli(cli, "extract --image " + img + " --out " + r + "/f2.glfs") == 0, "extract 2");
    expect(same_bytes(root / "f1.glfs", root / "f2.glfs"), "extract determinism");

    const std::string train_args = "train --manifest " + r + "/A/manifest.ndjson --seed 5 "
                                   "--schedule 6:2:2 --out ";
    expect(run_cli(cli, train_args + r + "/w1.glnw") == 0, "train 1");
    expect(run_cli(cli, train_args + r + "/w2.glnw") == 0, "train 2");
    expect(same_bytes(root / "w1.glnw", root / "w2.glnw"), "train weight determinism");
    expect(same_bytes(root / "w1.glnw.loss.txt", root / "w2.glnw.loss.txt"),
           "train loss-log determinism");

    const std::string predict_args = "predict --image " + img + " --weights " + r +
                                     "/w1.glnw --threshold 0.9 ";
    expect(run_cli(cli, predict_args + "--out " + r + "/h1.json --overlay " + r + "/o1.png") == 0,
           "predict 1");
    expect(run_cli(cli, predict_args + "--out " + r + "/h2.json --overlay " + r + "/o2.png") == 0,
           "predict 2");
    expect(same_bytes(root / "h1.json", root / "h2.json"), "predict JSON determinism");
    expect(same_bytes(root / "o1.png", root / "o2.png"), "overlay determinism");

    const std::string eval_args = "eval --manifest " + r + "/A/manifest.ndjson --weights " +
                                  r + "/w1.glnw --out ";
    expect(run_cli(cli, eval_args + r + "/e1.json --csv " + r + "/e1.csv") == 0, "eval 1");
    expect(run_cli(cli, eval_args + r + "/e2.json --csv " + r + "/e2.csv") == 0, "eval 2");
    // Timing fields vary run to run; the sweep rows must not.
    expect(same_bytes(root / "e1.csv", root / "e2.csv"), "eval sweep determinism");

    expect(run_cli(cli, "predict --no-such-flag") == 2, "usage exit code");
    expect(run_cli(cli, "extract --image " + r + "/missing.pgm --out " + r + "/x.glfs") == 3,
           "data-error exit code");

    fs::remove_all(root);
    o.pass = problems.empty();
    if (o.pass) {
        o.detail = "gen-data/extract/train/predict/eval byte-identical across reruns; "
                   "exit codes 2/3 honored";
    } else {
        o.detail = "failed: ";
        for (const auto& p : problems) o.detail += p + "; ";
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

    WallTimer total;
    if (wanted(1)) report(1, "kernel-oracle equivalence", criterion_kernel_oracles());
    if (wanted(2)) report(2, "gradient correctness", criterion_gradients());
    if (wanted(3)) report(3, "architecture fidelity", criterion_architecture());
    if (wanted(4)) report(4, "label rule fidelity", criterion_label_rule());

    double glare_total_ms = 0.0;
    if (wanted(6)) report(6, "performance budget", criterion_performance(&glare_total_ms));

    if (wanted(5) || wanted(7)) {
        const Split split = make_split();
        if (wanted(5)) report(5, "training surrogate", criterion_training_surrogate(split));
        if (wanted(7)) {
            if (glare_total_ms == 0.0) {
                Outcome perf = criterion_performance(&glare_total_ms);
                (void)perf;
            }
            report(7, "comparison network", criterion_unet(split, glare_total_ms));
        }
    }
    if (wanted(8)) report(8, "determinism", criterion_determinism());

    std::printf("%s: %d criterion(s) failed (%.1fs)\n",
                g_failures == 0 ? "OK" : "FAILURES", g_failures, total.ms() / 1000.0);
    return g_failures == 0 ? 0 : 1;
}
