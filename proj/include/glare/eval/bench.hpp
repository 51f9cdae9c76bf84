#pragma once

// Per-stage wall-clock benchmark of the detection pipeline. Stages report
// medians over the repeats; the total composes stage medians plus the
// median leftover (thresholding etc.), so total >= features + forward
// holds by construction.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/eval/metrics.hpp"
#include "glare/features/features.hpp"
#include "glare/model/glare_net.hpp"
#include "glare/raster/image.hpp"

namespace glare {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string environment_string() {
    std::string cpu = "unknown cpu";
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto pos = line.find(':');
            if (pos != std::string::npos) cpu = line.substr(pos + 2);
            break;
        }
    }
    std::ostringstream out;
    out << cpu << ", " << std::thread::hardware_concurrency() << " hw threads, "
        << __VERSION__;
    return out.str();
}

struct BenchTimings {
    double feature_ms = 0.0;
    double forward_ms = 0.0;
    double overhead_ms = 0.0;
    double total_ms = 0.0;
    int repeats = 0;
    std::string environment;
    BlockGrid heatmap;  // result of the last repeat
};

inline BenchTimings bench_pipeline(const ModelGraph& model, const GrayImage& img,
                                   int repeats, int block_size = 64, int bins = 8,
                                   int feature_workers = 1, int forward_workers = 1,
                                   double threshold = 0.9) {
    if (repeats < 3) throw RangeError("bench: repeats must be >= 3");

    std::vector<double> feature_ms, forward_ms, overhead_ms;
    BenchTimings result;
    for (int rep = 0; rep < repeats; ++rep) {
        WallTimer total;
        WallTimer stage;
        const FeatureStack fs = assemble_feature_stack(img, block_size, bins,
                                                       feature_workers);
        feature_ms.push_back(stage.ms());

        stage.reset();
        BlockGrid heat = glare_forward(model, fs, forward_workers);
        forward_ms.push_back(stage.ms());

        stage.reset();
        BlockGrid mask = threshold_heatmap(heat, threshold);
        (void)mask;
        overhead_ms.push_back(stage.ms());
        (void)total;
        result.heatmap = std::move(heat);
    }

    result.feature_ms = median(feature_ms);
    result.forward_ms = median(forward_ms);
    result.overhead_ms = median(overhead_ms);
    result.total_ms = result.feature_ms + result.forward_ms + result.overhead_ms;
    result.repeats = repeats;
    result.environment = environment_string();
    return result;
}

}  // namespace glare
