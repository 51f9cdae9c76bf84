#pragma once

// Weighted binary cross-entropy over block grids, with the analytic
// gradient used by the training loop.

#include <cmath>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/nn/tensor.hpp"

namespace glare {

inline constexpr double kBceClip = 1e-7;

struct BceResult {
    double loss = 0.0;
    BlockGrid grad;  // dLoss/dPrediction, same shape as pred
};

// mean over blocks of -[pos_weight * t * ln p + (1 - t) * ln(1 - p)],
// with predictions clipped to [1e-7, 1 - 1e-7]. Clipped entries carry
// zero gradient (the clipped function is constant there).
inline BceResult weighted_bce(const BlockGrid& pred, const BlockGrid& target,
                              double pos_weight = 1.0) {
    require_same_shape(pred, target, "weighted_bce");
    BceResult res;
    res.grad = BlockGrid(pred.rows, pred.cols, pred.block_size);
    const size_t n = pred.size();
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double raw = pred.values[i];
        const double p = raw < kBceClip         ? kBceClip
                         : raw > 1.0 - kBceClip ? 1.0 - kBceClip
                                                : raw;
        const double t = target.values[i];
        loss -= pos_weight * t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        if (raw > kBceClip && raw < 1.0 - kBceClip)
            res.grad.values[i] = static_cast<float>(
                -(pos_weight * t / p - (1.0 - t) / (1.0 - p)) / static_cast<double>(n));
    }
    res.loss = loss / static_cast<double>(n);
    return res;
}

inline BlockGrid grid_from_tensor(const Tensor3& t, int block_size) {
    if (t.channels != 1) throw ShapeError("grid_from_tensor: expected 1 channel");
    BlockGrid g(t.rows, t.cols, block_size);
    g.values = t.values;
    return g;
}

inline Tensor3 tensor_from_grid(const BlockGrid& g) {
    Tensor3 t(g.rows, g.cols, 1);
    t.values = g.values;
    return t;
}

// Class balance for the weighted loss: negatives over positives, capped.
inline double batch_pos_weight(const std::vector<const BlockGrid*>& targets,
                               double cap = 50.0) {
    std::size_t pos = 0, neg = 0;
    for (const BlockGrid* t : targets)
        for (float v : t->values)
            (v > 0.5f ? pos : neg)++;
    if (pos == 0) return 1.0;
    const double w = static_cast<double>(neg) / static_cast<double>(pos);
    return w > cap ? cap : w;
}

}  // namespace glare
