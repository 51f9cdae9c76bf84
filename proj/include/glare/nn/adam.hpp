#pragma once

// Bias-corrected Adam. Defaults follow the training recipe this project
// ships with: lr 0.001, beta1 0.99, beta2 0.999, eps 1e-8.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "glare/core.hpp"
#include "glare/nn/graph.hpp"

namespace glare {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.99;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamSlot {
    std::vector<float> m;
    std::vector<float> v;
};

// One update on a flat parameter tensor; `step` is 1-based.
inline void adam_update(std::span<float> params, std::span<const float> grads,
                        AdamSlot& slot, std::int64_t step, const AdamConfig& cfg) {
    if (params.size() != grads.size())
        throw ShapeError("adam_update: parameter/gradient size mismatch");
    if (slot.m.size() != params.size()) {
        slot.m.assign(params.size(), 0.0f);
        slot.v.assign(params.size(), 0.0f);
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        const double m = cfg.beta1 * slot.m[i] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * slot.v[i] + (1.0 - cfg.beta2) * g * g;
        slot.m[i] = static_cast<float>(m);
        slot.v[i] = static_cast<float>(v);
        const double mhat = m / c1;
        const double vhat = v / c2;
        params[i] = static_cast<float>(params[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
}

// Moment buffers for every conv tensor in a graph, keyed by layer id.
struct AdamState {
    AdamConfig cfg;
    std::int64_t step = 0;
    std::vector<AdamSlot> weight_slots;
    std::vector<AdamSlot> bias_slots;
};

inline AdamState make_adam_state(const ModelGraph& graph, const AdamConfig& cfg = {}) {
    AdamState st;
    st.cfg = cfg;
    st.weight_slots.resize(static_cast<size_t>(graph.layer_count()));
    st.bias_slots.resize(static_cast<size_t>(graph.layer_count()));
    return st;
}

inline void adam_step(ModelGraph& graph, const GraphGradients& grads, AdamState& st) {
    ++st.step;
    for (int i = 0; i < graph.layer_count(); ++i) {
        GraphLayer& l = graph.layer(i);
        if (l.kind != LayerKind::Conv) continue;
        const auto& dw = grads.dweights[static_cast<size_t>(i)];
        const auto& db = grads.dbias[static_cast<size_t>(i)];
        if (dw.size() != l.conv.weights.size() || db.size() != l.conv.bias.size())
            throw ShapeError("adam_step: gradient shape mismatch at '" + l.name + "'");
        adam_update(l.conv.weights, dw, st.weight_slots[static_cast<size_t>(i)],
                    st.step, st.cfg);
        adam_update(l.conv.bias, db, st.bias_slots[static_cast<size_t>(i)],
                    st.step, st.cfg);
    }
}

}  // namespace glare
