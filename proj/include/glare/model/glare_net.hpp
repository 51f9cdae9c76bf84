#pragma once

// The glare detector: five feature-extraction branches (one per input
// tensor), channel concatenation, and a four-conv predictor that emits the
// per-block glare probability heatmap.

#include <string>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/features/features.hpp"
#include "glare/nn/graph.hpp"
#include "glare/nn/loss.hpp"

namespace glare {

struct GlareNetConfig {
    // Branch widths: 1x1 -> c1, 3x3 -> c2, 3x3 -> c3 per branch.
    int branch_c1 = 16;
    int branch_c2 = 24;
    int branch_c3 = 32;
    // Predictor widths: 3x3 -> p1, 3x3 -> p2, 3x3 -> p3, 1x1 -> 1.
    int pred_p1 = 96;
    int pred_p2 = 96;
    int pred_p3 = 64;
    int bins = 8;
    int lum_channels = 5;
    size_t parameter_budget = 500000;
};

inline const std::vector<std::string>& glare_branch_names() {
    static const std::vector<std::string> names = {"lum", "black_h", "black_v",
                                                   "white_h", "white_v"};
    return names;
}

inline size_t glare_net_parameter_count(const GlareNetConfig& cfg) {
    auto conv = [](int k, int in, int out) {
        return static_cast<size_t>(k) * k * in * out + static_cast<size_t>(out);
    };
    size_t total = 0;
    for (int branch = 0; branch < 5; ++branch) {
        const int in = branch == 0 ? cfg.lum_channels : cfg.bins;
        total += conv(1, in, cfg.branch_c1);
        total += conv(3, cfg.branch_c1, cfg.branch_c2);
        total += conv(3, cfg.branch_c2, cfg.branch_c3);
    }
    const int concat = 5 * cfg.branch_c3;
    total += conv(3, concat, cfg.pred_p1);
    total += conv(3, cfg.pred_p1, cfg.pred_p2);
    total += conv(3, cfg.pred_p2, cfg.pred_p3);
    total += conv(1, cfg.pred_p3, 1);
    return total;
}

// Branch: InstanceNorm -> Conv1x1 -> Conv3x3 -> Conv3x3 (receptive fields
// 1, 3, 5). Predictor: Conv3x3 x3 then Conv1x1 + sigmoid (receptive field
// grows 7, 9, 11, 11 blocks).
inline ModelGraph build_glare_net(const GlareNetConfig& cfg, Rng& rng) {
    if (glare_net_parameter_count(cfg) > cfg.parameter_budget)
        throw ConfigError("glare net configuration exceeds the parameter budget");

    ModelGraph g;
    std::vector<int> branch_outputs;
    for (const std::string& name : glare_branch_names()) {
        const int in_ch = name == "lum" ? cfg.lum_channels : cfg.bins;
        const int input = g.add_input(name, in_ch);
        const int norm = g.add_instance_norm(name + ".norm", input);
        const int c1 = g.add_conv(name + ".conv1", norm, 1, cfg.branch_c1, Activation::Relu);
        const int c2 = g.add_conv(name + ".conv2", c1, 3, cfg.branch_c2, Activation::Relu);
        const int c3 = g.add_conv(name + ".conv3", c2, 3, cfg.branch_c3, Activation::Relu);
        branch_outputs.push_back(c3);
    }
    const int cat = g.add_concat("concat", branch_outputs);
    const int p1 = g.add_conv("pred.conv1", cat, 3, cfg.pred_p1, Activation::Relu);
    const int p2 = g.add_conv("pred.conv2", p1, 3, cfg.pred_p2, Activation::Relu);
    const int p3 = g.add_conv("pred.conv3", p2, 3, cfg.pred_p3, Activation::Relu);
    const int out = g.add_conv("pred.out", p3, 1, 1, Activation::Sigmoid);
    g.set_output(out);

    for (int i = 0; i < g.layer_count(); ++i)
        if (g.layer(i).kind == LayerKind::Conv) he_init(g.layer(i).conv, rng);
    return g;
}

inline std::vector<const Tensor3*> feature_stack_inputs(const FeatureStack& fs) {
    return {&fs.lum, &fs.hist_black_h, &fs.hist_black_v, &fs.hist_white_h,
            &fs.hist_white_v};
}

inline BlockGrid glare_forward(const ModelGraph& model, const FeatureStack& fs,
                               int workers = 1) {
    const Tensor3 out = model.forward(feature_stack_inputs(fs), workers);
    return grid_from_tensor(out, fs.block_size);
}

}  // namespace glare
