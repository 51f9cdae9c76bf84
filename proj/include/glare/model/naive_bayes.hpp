#pragma once

// Gaussian naive Bayes over the five per-block luminance features; the
// block-level baseline classifier.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/features/features.hpp"

namespace glare {

inline constexpr int kNbFeatureCount = 5;
inline constexpr double kNbVarianceFloor = 1e-6;

struct NaiveBayesModel {
    // index 0: no-glare, 1: glare
    std::array<std::array<double, kNbFeatureCount>, 2> mean{};
    std::array<std::array<double, kNbFeatureCount>, 2> var{};
    std::array<double, 2> prior{};
};

inline std::array<double, kNbFeatureCount> nb_feature_vector(const LuminanceFeatures& f) {
    return {static_cast<double>(f.min), static_cast<double>(f.max),
            static_cast<double>(f.dynamic_range), f.mean, f.std_dev};
}

inline NaiveBayesModel nb_fit(std::span<const LuminanceFeatures> features,
                              std::span<const std::uint8_t> labels) {
    if (features.size() != labels.size() || features.empty())
        throw FitError("nb_fit: empty or mismatched training data");

    NaiveBayesModel m;
    std::array<size_t, 2> count{};
    for (size_t i = 0; i < features.size(); ++i) {
        const int cls = labels[i] ? 1 : 0;
        ++count[cls];
        const auto v = nb_feature_vector(features[i]);
        for (int f = 0; f < kNbFeatureCount; ++f) m.mean[cls][f] += v[f];
    }
    if (count[0] == 0 || count[1] == 0)
        throw FitError("nb_fit: training set must contain both classes");
    for (int cls = 0; cls < 2; ++cls)
        for (int f = 0; f < kNbFeatureCount; ++f)
            m.mean[cls][f] /= static_cast<double>(count[cls]);

    for (size_t i = 0; i < features.size(); ++i) {
        const int cls = labels[i] ? 1 : 0;
        const auto v = nb_feature_vector(features[i]);
        for (int f = 0; f < kNbFeatureCount; ++f) {
            const double d = v[f] - m.mean[cls][f];
            m.var[cls][f] += d * d;
        }
    }
    for (int cls = 0; cls < 2; ++cls) {
        for (int f = 0; f < kNbFeatureCount; ++f) {
            m.var[cls][f] /= static_cast<double>(count[cls]);
            if (m.var[cls][f] < kNbVarianceFloor) m.var[cls][f] = kNbVarianceFloor;
        }
        m.prior[cls] = static_cast<double>(count[cls]) /
                       static_cast<double>(features.size());
    }
    return m;
}

// Posterior probability of glare, computed in log space.
inline double nb_predict(const NaiveBayesModel& m, const LuminanceFeatures& f) {
    const auto v = nb_feature_vector(f);
    std::array<double, 2> logp{};
    for (int cls = 0; cls < 2; ++cls) {
        logp[cls] = std::log(m.prior[cls]);
        for (int q = 0; q < kNbFeatureCount; ++q) {
            const double d = v[q] - m.mean[cls][q];
            logp[cls] -= 0.5 * (std::log(2.0 * 3.141592653589793 * m.var[cls][q]) +
                                d * d / m.var[cls][q]);
        }
    }
    const double hi = logp[0] > logp[1] ? logp[0] : logp[1];
    const double z0 = std::exp(logp[0] - hi);
    const double z1 = std::exp(logp[1] - hi);
    return z1 / (z0 + z1);
}

inline LuminanceFeatures nb_features_from_stack(const FeatureStack& fs, int r, int c) {
    const float* lp = fs.lum.px(r, c);
    LuminanceFeatures f;
    f.min = static_cast<int>(lp[0]);
    f.max = static_cast<int>(lp[1]);
    f.dynamic_range = static_cast<int>(lp[2]);
    f.mean = lp[3];
    f.std_dev = lp[4];
    return f;
}

inline BlockGrid nb_heatmap(const NaiveBayesModel& m, const FeatureStack& fs) {
    BlockGrid g(fs.rows, fs.cols, fs.block_size);
    for (int r = 0; r < fs.rows; ++r)
        for (int c = 0; c < fs.cols; ++c)
            g.at(r, c) = static_cast<float>(nb_predict(m, nb_features_from_stack(fs, r, c)));
    return g;
}

}  // namespace glare
