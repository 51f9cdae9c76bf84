// Command-line front door: gen-data, extract, train, predict, eval, bench.
// Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numeric
// divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glare/glare.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw glare::FormatError("cannot write: " + tmp);
        out << text;
        if (!out) throw glare::FormatError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw glare::FormatError("cannot move output into place: " + path);
}

void require_file(const std::string& path) {
    if (!fs::exists(path))
        throw glare::FormatError("no such file: " + path);
}

// ---------------------------------------------------------------------------
// Model/training configuration file: "key = value" lines, '#' comments.

struct RunSettings {
    std::string arch = "glare";  // or "unet"
    glare::GlareNetConfig net;
    glare::TrainOptions train;
    glare::UnetTrainOptions unet;
};

void apply_config_entry(RunSettings& s, const std::string& key, const std::string& value) {
    auto to_int = [&](const std::string& v) { return std::stoi(v); };
    auto to_double = [&](const std::string& v) { return std::stod(v); };

    if (key == "arch") {
        if (value != "glare" && value != "unet")
            throw glare::ConfigError("config: arch must be 'glare' or 'unet'");
        s.arch = value;
    } else if (key == "bins") {
        s.net.bins = to_int(value);
        s.train.bins = s.net.bins;
    } else if (key == "branch_c1") s.net.branch_c1 = to_int(value);
    else if (key == "branch_c2") s.net.branch_c2 = to_int(value);
    else if (key == "branch_c3") s.net.branch_c3 = to_int(value);
    else if (key == "pred_p1") s.net.pred_p1 = to_int(value);
    else if (key == "pred_p2") s.net.pred_p2 = to_int(value);
    else if (key == "pred_p3") s.net.pred_p3 = to_int(value);
    else if (key == "lr") { s.train.adam.lr = to_double(value); s.unet.adam.lr = to_double(value); }
    else if (key == "beta1") { s.train.adam.beta1 = to_double(value); s.unet.adam.beta1 = to_double(value); }
    else if (key == "beta2") { s.train.adam.beta2 = to_double(value); s.unet.adam.beta2 = to_double(value); }
    else if (key == "batch") s.train.batch_size = to_int(value);
    else if (key == "crop") s.train.crop_blocks = to_int(value);
    else if (key == "block_size") s.train.block_size = to_int(value);
    else if (key == "pos_weight_cap") s.train.pos_weight_cap = to_double(value);
    else if (key == "hard_fraction") s.train.hard_fraction = to_double(value);
    else if (key == "hard_pool_fraction") s.train.hard_pool_fraction = to_double(value);
    else if (key == "hard_refresh") s.train.hard_refresh_epochs = to_int(value);
    else if (key == "scale_min") s.train.scale_min = to_double(value);
    else if (key == "scale_max") s.train.scale_max = to_double(value);
    else if (key == "scale_buckets") s.train.scale_buckets = to_int(value);
    else if (key == "unet_crop") s.unet.crop_px = to_int(value);
    else if (key == "unet_batch") s.unet.batch_size = to_int(value);
    else if (key == "unet_epochs") s.unet.epochs = to_int(value);
    else throw glare::ConfigError("config: unknown key '" + key + "'");
}

RunSettings load_settings(const std::string& config_path) {
    RunSettings s;
    if (config_path.empty()) return s;
    require_file(config_path);
    std::ifstream in(config_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string key, eq, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw glare::ConfigError("config: bad line " + std::to_string(lineno) +
                                     " in " + config_path);
        try {
            apply_config_entry(s, key, value);
        } catch (const std::invalid_argument&) {
            throw glare::ConfigError("config: bad value for '" + key + "'");
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Manifest: newline-delimited JSON, one entry per image, paths relative to
// the manifest directory.

struct ManifestEntry {
    std::string id;
    std::string image;
    std::string markup_all;
    std::string markup_document;
    int width = 0;
    int height = 0;
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    require_file(path);
    std::ifstream in(path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            entries.push_back(ManifestEntry{
                j.at("id").get<std::string>(), j.at("image").get<std::string>(),
                j.at("markup_all").get<std::string>(),
                j.at("markup_document").get<std::string>(),
                j.at("width").get<int>(), j.at("height").get<int>()});
        } catch (const json::exception& e) {
            throw glare::FormatError("manifest: " + std::string(e.what()));
        }
    }
    if (entries.empty()) throw glare::FormatError("manifest is empty: " + path);
    return entries;
}

std::vector<glare::TrainSample> load_dataset(const std::string& manifest_path) {
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<glare::TrainSample> samples;
    for (const auto& e : load_manifest(manifest_path)) {
        glare::TrainSample s;
        s.id = e.id;
        s.image = glare::read_gray((base / e.image).string());
        s.boxes_all = glare::load_markup((base / e.markup_all).string()).boxes;
        s.boxes_document = glare::load_markup((base / e.markup_document).string()).boxes;
        samples.push_back(std::move(s));
    }
    return samples;
}

glare::ModelGraph load_model(const std::string& weights, const RunSettings& s) {
    require_file(weights);
    glare::Rng rng(0);
    glare::ModelGraph g = s.arch == "unet" ? glare::build_unet(rng)
                                           : glare::build_glare_net(s.net, rng);
    glare::load_weights(g, weights);
    return g;
}

std::string loss_log_text(const std::vector<glare::LossLogEntry>& log) {
    std::ostringstream out;
    out << "# phase epoch loss\n";
    char buf[64];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%d %d %.9g\n", e.phase + 1, e.epoch + 1, e.loss);
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_gen_data(int n, std::uint32_t seed, const std::string& out_dir,
                 int width, int height, int workers) {
    fs::create_directories(fs::path(out_dir) / "images");
    fs::create_directories(fs::path(out_dir) / "markup");

    glare::SynthProfile profile;
    std::ostringstream manifest;
    for (int i = 0; i < n; ++i) {
        const glare::SynthSample s =
            glare::synth_sample_at(i, seed, profile, width, height);
        const std::string image_rel = "images/" + s.id + ".pgm";
        const std::string all_rel = "markup/" + s.id + ".all.json";
        const std::string doc_rel = "markup/" + s.id + ".doc.json";

        glare::write_pgm((fs::path(out_dir) / image_rel).string(), s.image);
        glare::save_markup((fs::path(out_dir) / all_rel).string(),
                           glare::ImageMarkup{s.id + ".pgm", glare::MarkupMode::AllGlare,
                                              s.boxes_all});
        glare::save_markup((fs::path(out_dir) / doc_rel).string(),
                           glare::ImageMarkup{s.id + ".pgm",
                                              glare::MarkupMode::DocumentOnly,
                                              s.boxes_document});
        manifest << json{{"id", s.id},
                         {"image", image_rel},
                         {"markup_all", all_rel},
                         {"markup_document", doc_rel},
                         {"width", s.image.width},
                         {"height", s.image.height}}
                        .dump()
                 << "\n";
    }
    (void)workers;
    write_text_atomic((fs::path(out_dir) / "manifest.ndjson").string(), manifest.str());
    std::cout << "wrote " << n << " images to " << out_dir << "\n";
    return 0;
}

int cmd_extract(const std::string& image_path, const std::string& out_path,
                int block_size, int bins, int workers) {
    require_file(image_path);
    const glare::GrayImage img = glare::read_gray(image_path);
    const glare::FeatureStack fs_out =
        glare::assemble_feature_stack(img, block_size, bins, workers);
    glare::save_feature_stack(out_path, fs_out);
    std::cout << "features: " << fs_out.rows << "x" << fs_out.cols << " blocks, "
              << bins << " bins -> " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& manifest, const std::string& config,
              const std::string& out_weights, const std::string& log_path,
              std::uint32_t seed, const std::string& schedule_spec,
              double lr_override, int workers) {
    RunSettings settings = load_settings(config);
    settings.train.seed = seed;
    settings.unet.seed = seed;
    settings.train.workers = workers;
    settings.unet.workers = workers;
    if (lr_override > 0) {
        settings.train.adam.lr = lr_override;
        settings.unet.adam.lr = lr_override;
    }

    glare::TrainSchedule schedule = glare::default_schedule();
    if (!schedule_spec.empty()) {
        std::vector<int> epochs;
        std::istringstream ss(schedule_spec);
        std::string tok;
        while (std::getline(ss, tok, ':')) epochs.push_back(std::stoi(tok));
        if (epochs.size() != 3 || epochs[0] <= 0 || epochs[1] <= 0 || epochs[2] <= 0)
            throw glare::ConfigError("--schedule expects three positive epoch counts a:b:c");
        schedule[0].epochs = epochs[0];
        schedule[1].epochs = epochs[1];
        schedule[2].epochs = epochs[2];
    }

    const std::vector<glare::TrainSample> samples = load_dataset(manifest);
    glare::Rng rng(seed);
    std::vector<glare::LossLogEntry> log;
    glare::ModelGraph model;

    if (settings.arch == "unet") {
        model = glare::build_unet(rng);
        settings.unet.epochs = schedule[0].epochs;  // single-phase trainer
        log = glare::train_unet(model, samples, 2, settings.unet);
    } else {
        model = glare::build_glare_net(settings.net, rng);
        log = glare::run_schedule(model, schedule, samples, settings.train);
    }

    glare::save_weights(model, out_weights);
    const std::string lp = log_path.empty() ? out_weights + ".loss.txt" : log_path;
    write_text_atomic(lp, loss_log_text(log));
    std::cout << "trained " << settings.arch << " on " << samples.size()
              << " images; weights -> " << out_weights << ", loss log -> " << lp << "\n";
    return 0;
}

int cmd_predict(const std::string& image_path, const std::string& weights,
                const std::string& config, double threshold,
                const std::string& out_json, const std::string& overlay_path,
                int block_size, int bins, int workers) {
    require_file(image_path);
    RunSettings settings = load_settings(config);
    settings.net.bins = bins;
    glare::ModelGraph model = load_model(weights, settings);

    const glare::GrayImage img = glare::read_gray(image_path);
    const glare::FeatureStack fstack =
        glare::assemble_feature_stack(img, block_size, bins, workers);
    const glare::BlockGrid heat = glare::glare_forward(model, fstack, workers);
    const glare::BlockGrid mask = glare::threshold_heatmap(heat, threshold);

    json jheat = json::array(), jmask = json::array();
    for (int r = 0; r < heat.rows; ++r) {
        json hrow = json::array(), mrow = json::array();
        for (int c = 0; c < heat.cols; ++c) {
            hrow.push_back(heat.at(r, c));
            mrow.push_back(static_cast<int>(mask.at(r, c)));
        }
        jheat.push_back(hrow);
        jmask.push_back(mrow);
    }
    write_text_atomic(out_json, json{{"image", image_path},
                                     {"rows", heat.rows},
                                     {"cols", heat.cols},
                                     {"block_size", block_size},
                                     {"threshold", threshold},
                                     {"probabilities", jheat},
                                     {"mask", jmask}}
                                    .dump(2) + "\n");

    // Overlay: positive blocks tinted red at 40% alpha.
    glare::RgbImage overlay(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t g = img.at(x, y);
            std::uint8_t* px = overlay.px(x, y);
            const int br = y / block_size, bc = x / block_size;
            if (br < mask.rows && bc < mask.cols && mask.at(br, bc) > 0.5f) {
                px[0] = static_cast<std::uint8_t>(0.6 * g + 0.4 * 255.0 + 0.5);
                px[1] = static_cast<std::uint8_t>(0.6 * g + 0.5);
                px[2] = static_cast<std::uint8_t>(0.6 * g + 0.5);
            } else {
                px[0] = px[1] = px[2] = g;
            }
        }
    const std::string op = overlay_path.empty() ? out_json + ".overlay.png" : overlay_path;
    glare::write_image(op, overlay);

    int positives = 0;
    for (float v : mask.values) positives += v > 0.5f;
    std::cout << "heatmap " << heat.rows << "x" << heat.cols << ", " << positives
              << " blocks over threshold " << threshold << "; json -> " << out_json
              << ", overlay -> " << op << "\n";
    return 0;
}

int cmd_eval(const std::string& manifest, const std::string& weights,
             const std::string& config, const std::string& mode_name,
             const std::string& out_json, const std::string& out_csv,
             int block_size, int bins, int workers) {
    RunSettings settings = load_settings(config);
    settings.net.bins = bins;
    glare::ModelGraph model = load_model(weights, settings);
    const glare::MarkupMode mode = glare::markup_mode_from_name(mode_name);

    const fs::path base = fs::path(manifest).parent_path();
    glare::SweepAccumulator acc;
    std::vector<double> feature_times, forward_times;
    for (const auto& e : load_manifest(manifest)) {
        const glare::GrayImage img = glare::read_gray((base / e.image).string());
        const std::string markup_rel = mode == glare::MarkupMode::AllGlare
                                           ? e.markup_all
                                           : e.markup_document;
        const glare::ImageMarkup markup = glare::load_markup((base / markup_rel).string());

        glare::WallTimer t;
        const glare::FeatureStack fstack =
            glare::assemble_feature_stack(img, block_size, bins, workers);
        feature_times.push_back(t.ms());
        t.reset();
        const glare::BlockGrid heat = glare::glare_forward(model, fstack, workers);
        forward_times.push_back(t.ms());

        const glare::BlockGridShape shape{fstack.rows, fstack.cols, block_size};
        const glare::BlockGrid labels = glare::rasterize_labels(
            glare::clip_boxes(markup.boxes, img.width, img.height), shape);
        acc.add(heat, labels);
    }

    glare::EvalReport rep;
    rep.rows = acc.rows();
    rep.best = glare::best_row(rep.rows);
    rep.parameter_count = model.parameter_count();
    rep.feature_ms = glare::median(feature_times);
    rep.forward_ms = glare::median(forward_times);
    rep.total_ms = rep.feature_ms + rep.forward_ms;
    rep.environment = glare::environment_string();

    std::cout << glare::report_to_table(rep);
    if (!out_json.empty())
        write_text_atomic(out_json, glare::report_to_json(rep).dump(2) + "\n");
    if (!out_csv.empty()) write_text_atomic(out_csv, glare::sweep_to_csv(rep.rows));
    return 0;
}

int cmd_bench(const std::string& image_path, const std::string& weights,
              const std::string& config, int repeats, int feature_workers,
              int forward_workers, const std::string& out_json, int block_size,
              int bins) {
    require_file(image_path);
    RunSettings settings = load_settings(config);
    settings.net.bins = bins;
    glare::ModelGraph model = load_model(weights, settings);
    const glare::GrayImage img = glare::read_gray(image_path);

    const glare::BenchTimings t = glare::bench_pipeline(
        model, img, repeats, block_size, bins, feature_workers, forward_workers);

    std::cout << "image " << img.width << "x" << img.height << ", grid "
              << t.heatmap.rows << "x" << t.heatmap.cols << ", repeats " << repeats
              << "\n"
              << "features: " << t.feature_ms << " ms (" << feature_workers
              << " workers)\nforward:  " << t.forward_ms << " ms ("
              << forward_workers << " workers)\ntotal:    " << t.total_ms
              << " ms\nparameters: " << model.parameter_count() << "\nenv: "
              << t.environment << "\n";
    if (!out_json.empty())
        write_text_atomic(out_json,
                          json{{"feature_ms", t.feature_ms},
                               {"forward_ms", t.forward_ms},
                               {"total_ms", t.total_ms},
                               {"repeats", repeats},
                               {"feature_workers", feature_workers},
                               {"forward_workers", forward_workers},
                               {"parameter_count", model.parameter_count()},
                               {"environment", t.environment}}
                                  .dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"document glare detection toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic labeled dataset");
    int gen_n = 10, gen_w = 0, gen_h = 0, gen_workers = 0;
    std::uint32_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "number of images")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--width", gen_w, "force image width");
    gen->add_option("--height", gen_h, "force image height");

    // extract
    auto* ext = app.add_subcommand("extract", "extract a GLFS feature stack from an image");
    std::string ext_image, ext_out;
    int ext_block = 64, ext_bins = 8, ext_workers = 0;
    ext->add_option("--image", ext_image, "input image (png/pgm/ppm)")->required();
    ext->add_option("--out", ext_out, "output GLFS path")->required();
    ext->add_option("--block-size", ext_block, "block size in pixels");
    ext->add_option("--bins", ext_bins, "histogram bins");
    ext->add_option("--workers", ext_workers, "worker threads (0 = auto)");

    // train
    auto* tr = app.add_subcommand("train", "train a model on a dataset manifest");
    std::string tr_manifest, tr_config, tr_out, tr_log, tr_schedule;
    std::uint32_t tr_seed = 0;
    double tr_lr = 0.0;
    int tr_workers = 0;
    tr->add_option("--manifest", tr_manifest, "dataset manifest (ndjson)")->required();
    tr->add_option("--config", tr_config, "model/training config file");
    tr->add_option("--out", tr_out, "output weights path (GLNW)")->required();
    tr->add_option("--log", tr_log, "loss log path (default <out>.loss.txt)");
    tr->add_option("--seed", tr_seed, "rng seed");
    tr->add_option("--schedule", tr_schedule,
                   "phase epochs a:b:c (default 1500:250:250)");
    tr->add_option("--lr", tr_lr, "learning rate override");
    tr->add_option("--workers", tr_workers, "worker threads (0 = auto)");

    // predict
    auto* pr = app.add_subcommand("predict", "run detection on one image");
    std::string pr_image, pr_weights, pr_config, pr_out, pr_overlay;
    double pr_threshold = 0.9;
    int pr_block = 64, pr_bins = 8, pr_workers = 0;
    pr->add_option("--image", pr_image, "input image")->required();
    pr->add_option("--weights", pr_weights, "GLNW weights")->required();
    pr->add_option("--config", pr_config, "model config file");
    pr->add_option("--threshold", pr_threshold, "detection threshold");
    pr->add_option("--out", pr_out, "output heatmap JSON")->required();
    pr->add_option("--overlay", pr_overlay, "overlay image path (png/ppm)");
    pr->add_option("--block-size", pr_block, "block size in pixels");
    pr->add_option("--bins", pr_bins, "histogram bins");
    pr->add_option("--workers", pr_workers, "worker threads (0 = auto)");

    // eval
    auto* ev = app.add_subcommand("eval", "threshold sweep over a labeled manifest");
    std::string ev_manifest, ev_weights, ev_config, ev_mode = "document";
    std::string ev_out, ev_csv;
    int ev_block = 64, ev_bins = 8, ev_workers = 0;
    ev->add_option("--manifest", ev_manifest, "dataset manifest")->required();
    ev->add_option("--weights", ev_weights, "GLNW weights")->required();
    ev->add_option("--config", ev_config, "model config file");
    ev->add_option("--mode", ev_mode, "markup mode: all|document");
    ev->add_option("--out", ev_out, "report JSON path");
    ev->add_option("--csv", ev_csv, "sweep CSV path");
    ev->add_option("--block-size", ev_block, "block size in pixels");
    ev->add_option("--bins", ev_bins, "histogram bins");
    ev->add_option("--workers", ev_workers, "worker threads (0 = auto)");

    // bench
    auto* be = app.add_subcommand("bench", "time the feature + forward pipeline");
    std::string be_image, be_weights, be_config, be_out;
    int be_repeats = 5, be_workers = 1, be_fwd_workers = 1, be_block = 64, be_bins = 8;
    be->add_option("--image", be_image, "input image")->required();
    be->add_option("--weights", be_weights, "GLNW weights")->required();
    be->add_option("--config", be_config, "model config file");
    be->add_option("--repeats", be_repeats, "timing repeats (>= 3)");
    be->add_option("--workers", be_workers, "feature extraction workers");
    be->add_option("--forward-workers", be_fwd_workers, "forward pass workers");
    be->add_option("--out", be_out, "timing JSON path");
    be->add_option("--block-size", be_block, "block size in pixels");
    be->add_option("--bins", be_bins, "histogram bins");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_n, gen_seed, gen_out, gen_w, gen_h,
                                glare::worker_count(gen_workers));
        if (ext->parsed())
            return cmd_extract(ext_image, ext_out, ext_block, ext_bins,
                               glare::worker_count(ext_workers));
        if (tr->parsed())
            return cmd_train(tr_manifest, tr_config, tr_out, tr_log, tr_seed,
                             tr_schedule, tr_lr, glare::worker_count(tr_workers));
        if (pr->parsed())
            return cmd_predict(pr_image, pr_weights, pr_config, pr_threshold, pr_out,
                               pr_overlay, pr_block, pr_bins,
                               glare::worker_count(pr_workers));
        if (ev->parsed())
            return cmd_eval(ev_manifest, ev_weights, ev_config, ev_mode, ev_out,
                            ev_csv, ev_block, ev_bins, glare::worker_count(ev_workers));
        if (be->parsed())
            return cmd_bench(be_image, be_weights, be_config, be_repeats, be_workers,
                             be_fwd_workers, be_out, be_block, be_bins);
    } catch (const glare::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
