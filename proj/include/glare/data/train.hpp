#pragma once

// Training machinery: scale-bucketed feature caching, random block crops,
// hard-negative mining, the phase schedule for the glare net, and the
// pixel-crop trainer for the U-Net comparison model.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/data/markup.hpp"
#include "glare/features/features.hpp"
#include "glare/model/glare_net.hpp"
#include "glare/model/unet.hpp"
#include "glare/nn/adam.hpp"
#include "glare/nn/graph.hpp"
#include "glare/nn/loss.hpp"
#include "glare/raster/image.hpp"

namespace glare {

enum class BatchPolicy { Random, HardNegative };

struct SchedulePhase {
    int dataset_id = 1;  // 1 = all-glare markup, 2 = document-only markup
    BatchPolicy policy = BatchPolicy::Random;
    int epochs = 1;
};

using TrainSchedule = std::vector<SchedulePhase>;

inline TrainSchedule default_schedule() {
    return {{1, BatchPolicy::Random, 1500},
            {1, BatchPolicy::HardNegative, 250},
            {2, BatchPolicy::HardNegative, 250}};
}

struct TrainSample {
    std::string id;
    GrayImage image;
    std::vector<MarkupBox> boxes_all;
    std::vector<MarkupBox> boxes_document;
};

inline const std::vector<MarkupBox>& sample_boxes(const TrainSample& s, int dataset_id) {
    return dataset_id == 2 ? s.boxes_document : s.boxes_all;
}

struct TrainOptions {
    int block_size = 64;
    int bins = 8;
    int batch_size = 8;
    int crop_blocks = 16;
    double scale_min = 0.3;
    double scale_max = 1.5;
    int scale_buckets = 13;
    int hard_refresh_epochs = 10;
    double hard_fraction = 0.75;      // of a hard-negative batch
    double hard_pool_fraction = 0.25; // of the dataset kept as the hard pool
    double pos_weight_cap = 50.0;
    double coverage_threshold = 0.25;
    AdamConfig adam;
    std::uint32_t seed = 0;
    int workers = 1;
};

struct LossLogEntry {
    int phase = 0;
    int epoch = 0;
    double loss = 0.0;
};

// ---------------------------------------------------------------------------
// Cropping

inline Tensor3 crop_tensor(const Tensor3& t, int r0, int c0, int rows, int cols) {
    Tensor3 out(rows, cols, t.channels);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            std::memcpy(out.px(r, c), t.px(r0 + r, c0 + c),
                        sizeof(float) * static_cast<size_t>(t.channels));
    return out;
}

inline BlockGrid crop_grid(const BlockGrid& g, int r0, int c0, int rows, int cols) {
    BlockGrid out(rows, cols, g.block_size);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out.at(r, c) = g.at(r0 + r, c0 + c);
    return out;
}

struct CropPair {
    FeatureStack features;
    BlockGrid labels;
};

// Aligned crop of all five tensors and the labels at a uniformly random
// block offset. crop dims equal to the grid reproduce the input.
inline CropPair random_crop(const FeatureStack& fs, const BlockGrid& labels,
                            int crop_rows, int crop_cols, Rng& rng) {
    if (crop_rows > fs.rows || crop_cols > fs.cols)
        throw DimensionError("random_crop: crop larger than grid");
    const int r0 = rng_index(rng, fs.rows - crop_rows + 1);
    const int c0 = rng_index(rng, fs.cols - crop_cols + 1);

    CropPair out;
    out.features.rows = crop_rows;
    out.features.cols = crop_cols;
    out.features.bins = fs.bins;
    out.features.block_size = fs.block_size;
    out.features.lum = crop_tensor(fs.lum, r0, c0, crop_rows, crop_cols);
    out.features.hist_black_h = crop_tensor(fs.hist_black_h, r0, c0, crop_rows, crop_cols);
    out.features.hist_black_v = crop_tensor(fs.hist_black_v, r0, c0, crop_rows, crop_cols);
    out.features.hist_white_h = crop_tensor(fs.hist_white_h, r0, c0, crop_rows, crop_cols);
    out.features.hist_white_v = crop_tensor(fs.hist_white_v, r0, c0, crop_rows, crop_cols);
    out.labels = crop_grid(labels, r0, c0, crop_rows, crop_cols);
    return out;
}

// ---------------------------------------------------------------------------
// Scale-bucketed feature cache

inline std::vector<MarkupBox> scale_boxes(std::span<const MarkupBox> boxes, double s) {
    std::vector<MarkupBox> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes)
        out.push_back(MarkupBox{
            static_cast<int>(std::lround(b.x * s)), static_cast<int>(std::lround(b.y * s)),
            std::max(1, static_cast<int>(std::lround(b.width * s))),
            std::max(1, static_cast<int>(std::lround(b.height * s)))});
    return out;
}

// Features and labels per (sample, scale bucket), extracted on first use.
// Buckets quantize the augmentation scale range so repeated epochs reuse
// the expensive binarization + histogram pass.
class FeatureCache {
public:
    struct Entry {
        bool ready = false;
        FeatureStack features;
        BlockGrid labels_all;
        BlockGrid labels_document;
    };

    FeatureCache(const std::vector<TrainSample>& samples, const TrainOptions& opts)
        : samples_(&samples), opts_(opts),
          entries_(samples.size() * (static_cast<size_t>(opts.scale_buckets) + 1)) {}

    // One slot past the augmentation grid always holds the native scale.
    int native_bucket() const { return opts_.scale_buckets; }

    double bucket_scale(int bucket) const {
        if (bucket == native_bucket() || opts_.scale_buckets <= 1) return 1.0;
        return opts_.scale_min + (opts_.scale_max - opts_.scale_min) * bucket /
                                     (opts_.scale_buckets - 1);
    }

    const Entry& get(int sample_index, int bucket) {
        Entry& e = entries_[static_cast<size_t>(sample_index) *
                                (static_cast<size_t>(opts_.scale_buckets) + 1) +
                            static_cast<size_t>(bucket)];
        if (e.ready) return e;

        const TrainSample& s = (*samples_)[static_cast<size_t>(sample_index)];
        double scale = bucket_scale(bucket);
        // A bucket that would shrink the image below one block falls back
        // to the native scale.
        const int min_dim = std::min(s.image.width, s.image.height);
        if (static_cast<int>(std::lround(min_dim * scale)) < opts_.block_size)
            scale = 1.0;

        const GrayImage scaled = scale == 1.0 ? s.image : rescale(s.image, scale);
        e.features = assemble_feature_stack(scaled, opts_.block_size, opts_.bins,
                                            opts_.workers);
        const BlockGridShape shape{e.features.rows, e.features.cols, opts_.block_size};
        e.labels_all = rasterize_labels(
            clip_boxes(scale_boxes(s.boxes_all, scale), scaled.width, scaled.height),
            shape, opts_.coverage_threshold);
        e.labels_document = rasterize_labels(
            clip_boxes(scale_boxes(s.boxes_document, scale), scaled.width, scaled.height),
            shape, opts_.coverage_threshold);
        e.ready = true;
        return e;
    }

    const BlockGrid& labels(const Entry& e, int dataset_id) const {
        return dataset_id == 2 ? e.labels_document : e.labels_all;
    }

private:
    const std::vector<TrainSample>* samples_;
    TrainOptions opts_;
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Hard-negative mining

// Per-image loss under the current model at native scale, highest first;
// ties break on the stable sample order. Returns sample indices.
inline std::vector<int> hard_negative_select(const ModelGraph& model,
                                             const std::vector<TrainSample>& samples,
                                             int dataset_id, size_t k,
                                             const TrainOptions& opts,
                                             FeatureCache* cache = nullptr) {
    if (samples.empty()) throw DimensionError("hard_negative_select: empty dataset");
    if (k > samples.size()) throw RangeError("hard_negative_select: k exceeds dataset");

    FeatureCache local(samples, opts);
    FeatureCache& fc = cache != nullptr ? *cache : local;
    const int native = fc.native_bucket();

    std::vector<std::pair<double, int>> scored;
    scored.reserve(samples.size());
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
        const FeatureCache::Entry& e = fc.get(i, native);
        const BlockGrid& target = fc.labels(e, dataset_id);
        const BlockGrid heat = glare_forward(model, e.features, opts.workers);
        const double pw = batch_pos_weight({&target}, opts.pos_weight_cap);
        scored.emplace_back(weighted_bce(heat, target, pw).loss, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
    return out;
}

// ---------------------------------------------------------------------------
// Schedule runner

namespace detail {

struct BatchSample {
    const FeatureCache::Entry* entry;
    BlockGrid label_crop;
    FeatureStack feature_crop;
};

}  // namespace detail

// Executes the phases in order. Each epoch draws one batch (augmentation
// scale -> cached features -> random crop), runs forward/backward over it
// and applies one Adam step. The loss log records the per-epoch mean loss.
inline std::vector<LossLogEntry> run_schedule(ModelGraph& model,
                                              const TrainSchedule& schedule,
                                              const std::vector<TrainSample>& samples,
                                              const TrainOptions& opts) {
    if (samples.empty()) throw DimensionError("run_schedule: empty dataset");
    for (const auto& phase : schedule)
        if (phase.epochs <= 0) throw ConfigError("run_schedule: epochs must be > 0");

    Rng rng(opts.seed);
    FeatureCache cache(samples, opts);
    AdamState adam = make_adam_state(model, opts.adam);
    std::vector<LossLogEntry> log;
    const int n = static_cast<int>(samples.size());

    for (int phase_index = 0; phase_index < static_cast<int>(schedule.size());
         ++phase_index) {
        const SchedulePhase& phase = schedule[static_cast<size_t>(phase_index)];
        std::vector<int> hard_pool;

        for (int epoch = 0; epoch < phase.epochs; ++epoch) {
            if (phase.policy == BatchPolicy::HardNegative &&
                (epoch % std::max(1, opts.hard_refresh_epochs) == 0 || hard_pool.empty())) {
                const size_t k = std::max<size_t>(
                    1, static_cast<size_t>(std::lround(n * opts.hard_pool_fraction)));
                hard_pool = hard_negative_select(model, samples, phase.dataset_id,
                                                 std::min(k, samples.size()), opts, &cache);
            }

            // Select the batch.
            std::vector<int> picks;
            picks.reserve(static_cast<size_t>(opts.batch_size));
            const int hard_count =
                phase.policy == BatchPolicy::HardNegative
                    ? static_cast<int>(std::lround(opts.batch_size * opts.hard_fraction))
                    : 0;
            for (int b = 0; b < opts.batch_size; ++b) {
                if (b < hard_count)
                    picks.push_back(hard_pool[static_cast<size_t>(
                        rng_index(rng, static_cast<int>(hard_pool.size())))]);
                else
                    picks.push_back(rng_index(rng, n));
            }

            // Materialize crops.
            std::vector<CropPair> crops;
            crops.reserve(picks.size());
            for (int idx : picks) {
                const int bucket = rng_index(rng, opts.scale_buckets);
                const FeatureCache::Entry& e = cache.get(idx, bucket);
                const BlockGrid& labels = cache.labels(e, phase.dataset_id);
                const int ch = std::min(opts.crop_blocks, e.features.rows);
                const int cw = std::min(opts.crop_blocks, e.features.cols);
                crops.push_back(random_crop(e.features, labels, ch, cw, rng));
            }

            std::vector<const BlockGrid*> targets;
            targets.reserve(crops.size());
            for (const auto& c : crops) targets.push_back(&c.labels);
            const double pos_weight = batch_pos_weight(targets, opts.pos_weight_cap);

            // Forward/backward, gradients averaged over the batch in order.
            GraphGradients total;
            double loss_sum = 0.0;
            bool first = true;
            for (const auto& c : crops) {
                const auto inputs = feature_stack_inputs(c.features);
                const std::vector<Tensor3> fwd = model.forward_cached(inputs, opts.workers);
                const BlockGrid heat = grid_from_tensor(
                    fwd[static_cast<size_t>(model.output())], c.features.block_size);
                BceResult bce = weighted_bce(heat, c.labels, pos_weight);
                loss_sum += bce.loss;
                GraphGradients g = graph_backward(model, fwd, tensor_from_grid(bce.grad),
                                                  false, opts.workers);
                if (first) {
                    total = std::move(g);
                    first = false;
                } else {
                    total.accumulate(g);
                }
            }
            const double mean_loss = loss_sum / static_cast<double>(crops.size());
            if (!std::isfinite(mean_loss))
                throw DivergenceError("run_schedule: non-finite loss at phase " +
                                      std::to_string(phase_index + 1) + " epoch " +
                                      std::to_string(epoch + 1));
            total.scale(1.0f / static_cast<float>(crops.size()));
            adam_step(model, total, adam);
            log.push_back(LossLogEntry{phase_index, epoch, mean_loss});
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// U-Net trainer (gray-image pixel crops, labels on 8x8 pixel groups)

struct UnetTrainOptions {
    int crop_px = 128;  // multiple of 32
    int batch_size = 4;
    int epochs = 150;
    double coverage_threshold = 0.25;
    double pos_weight_cap = 50.0;
    // Glare covers a few percent of a page, so uniform crops mostly carry
    // no positive groups and the net collapses to all-zero. This fraction
    // of crops centers on a ground-truth box instead.
    double glare_crop_fraction = 0.7;
    AdamConfig adam;
    std::uint32_t seed = 0;
    int workers = 1;
};

inline std::vector<LossLogEntry> train_unet(ModelGraph& model,
                                            const std::vector<TrainSample>& samples,
                                            int dataset_id,
                                            const UnetTrainOptions& opts) {
    if (samples.empty()) throw DimensionError("train_unet: empty dataset");
    if (opts.crop_px % 32 != 0) throw ConfigError("train_unet: crop must be a multiple of 32");

    Rng rng(opts.seed);
    AdamState adam = make_adam_state(model, opts.adam);

    // Labels per image on the 8-px group lattice, computed once.
    const int group = 8;
    std::vector<BlockGrid> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) {
        const BlockGridShape shape{s.image.height / group, s.image.width / group, group};
        labels.push_back(rasterize_labels(
            clip_boxes(sample_boxes(s, dataset_id), s.image.width, s.image.height),
            shape, opts.coverage_threshold));
    }

    std::vector<LossLogEntry> log;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::vector<Tensor3> crops;
        std::vector<BlockGrid> crop_labels;
        for (int b = 0; b < opts.batch_size; ++b) {
            const int idx = rng_index(rng, static_cast<int>(samples.size()));
            const TrainSample& sample = samples[static_cast<size_t>(idx)];
            const GrayImage& img = sample.image;
            const int crop_w = std::min(opts.crop_px, (img.width / 32) * 32);
            const int crop_h = std::min(opts.crop_px, (img.height / 32) * 32);

            int ox, oy;
            const auto& boxes = sample_boxes(sample, dataset_id);
            if (!boxes.empty() && rng_uniform(rng) < opts.glare_crop_fraction) {
                const MarkupBox& box = boxes[static_cast<size_t>(
                    rng_index(rng, static_cast<int>(boxes.size())))];
                const int cx = box.x + box.width / 2 - crop_w / 2;
                const int cy = box.y + box.height / 2 - crop_h / 2;
                ox = std::clamp(cx, 0, img.width - crop_w) / group * group;
                oy = std::clamp(cy, 0, img.height - crop_h) / group * group;
            } else {
                ox = group * rng_index(rng, (img.width - crop_w) / group + 1);
                oy = group * rng_index(rng, (img.height - crop_h) / group + 1);
            }

            Tensor3 t(crop_h, crop_w, 1);
            for (int y = 0; y < crop_h; ++y)
                for (int x = 0; x < crop_w; ++x)
                    t.at(y, x, 0) = static_cast<float>(img.at(ox + x, oy + y));
            crops.push_back(std::move(t));
            crop_labels.push_back(crop_grid(labels[static_cast<size_t>(idx)],
                                            oy / group, ox / group,
                                            crop_h / group, crop_w / group));
        }

        std::vector<const BlockGrid*> targets;
        for (const auto& l : crop_labels) targets.push_back(&l);
        const double pos_weight = batch_pos_weight(targets, opts.pos_weight_cap);

        GraphGradients total;
        double loss_sum = 0.0;
        bool first = true;
        for (size_t i = 0; i < crops.size(); ++i) {
            const std::vector<Tensor3> fwd = model.forward_cached({&crops[i]}, opts.workers);
            const BlockGrid heat = grid_from_tensor(
                fwd[static_cast<size_t>(model.output())], group);
            BceResult bce = weighted_bce(heat, crop_labels[i], pos_weight);
            loss_sum += bce.loss;
            GraphGradients g = graph_backward(model, fwd, tensor_from_grid(bce.grad),
                                              false, opts.workers);
            if (first) {
                total = std::move(g);
                first = false;
            } else {
                total.accumulate(g);
            }
        }
        const double mean_loss = loss_sum / static_cast<double>(crops.size());
        if (!std::isfinite(mean_loss))
            throw DivergenceError("train_unet: non-finite loss at epoch " +
                                  std::to_string(epoch + 1));
        total.scale(1.0f / static_cast<float>(crops.size()));
        adam_step(model, total, adam);
        log.push_back(LossLogEntry{0, epoch, mean_loss});
    }
    return log;
}

}  // namespace glare
