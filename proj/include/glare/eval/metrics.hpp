#pragma once

// Heatmap thresholding, block-level precision/recall/F-measure, threshold
// sweeps and the EvalReport container with JSON/CSV/table serialization.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"

namespace glare {

// Strict comparison: a block fires only when its probability exceeds t.
inline BlockGrid threshold_heatmap(const BlockGrid& h, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw RangeError("threshold_heatmap: threshold outside [0, 1]");
    BlockGrid out(h.rows, h.cols, h.block_size);
    for (size_t i = 0; i < h.size(); ++i)
        out.values[i] = h.values[i] > t ? 1.0f : 0.0f;
    return out;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

inline Prf prf_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    Prf m;
    if (tp + fp == 0)
        m.precision = (tp + fn == 0) ? 1.0 : 0.0;
    else
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn == 0)
        m.recall = 1.0;
    else
        m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double pr = m.precision + m.recall;
    m.f = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

inline Prf prf(const BlockGrid& pred, const BlockGrid& target) {
    require_same_shape(pred, target, "prf");
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.values[i] > 0.5f;
        const bool t = target.values[i] > 0.5f;
        if (p && t) ++tp;
        else if (p) ++fp;
        else if (t) ++fn;
    }
    return prf_from_counts(tp, fp, fn);
}

inline std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
    return t;
}

struct SweepRow {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;

    bool operator==(const SweepRow&) const = default;
};

// Pools TP/FP/FN over any number of heatmap/target pairs (micro-average),
// one counter set per threshold.
class SweepAccumulator {
public:
    explicit SweepAccumulator(std::vector<double> thresholds = default_thresholds())
        : thresholds_(std::move(thresholds)),
          tp_(thresholds_.size(), 0), fp_(thresholds_.size(), 0),
          fn_(thresholds_.size(), 0) {}

    void add(const BlockGrid& heat, const BlockGrid& target) {
        require_same_shape(heat, target, "sweep");
        for (size_t i = 0; i < heat.size(); ++i) {
            const double p = heat.values[i];
            const bool t = target.values[i] > 0.5f;
            for (size_t k = 0; k < thresholds_.size(); ++k) {
                const bool fired = p > thresholds_[k];
                if (fired && t) ++tp_[k];
                else if (fired) ++fp_[k];
                else if (t) ++fn_[k];
            }
        }
    }

    std::vector<SweepRow> rows() const {
        std::vector<SweepRow> out;
        out.reserve(thresholds_.size());
        for (size_t k = 0; k < thresholds_.size(); ++k) {
            const Prf m = prf_from_counts(tp_[k], fp_[k], fn_[k]);
            out.push_back(SweepRow{thresholds_[k], m.precision, m.recall, m.f});
        }
        return out;
    }

private:
    std::vector<double> thresholds_;
    std::vector<std::uint64_t> tp_, fp_, fn_;
};

struct EvalReport {
    std::vector<SweepRow> rows;
    SweepRow best;  // max F; ties resolve to the lowest threshold
    std::uint64_t parameter_count = 0;
    double feature_ms = 0.0;
    double forward_ms = 0.0;
    double total_ms = 0.0;
    std::string environment;

    bool operator==(const EvalReport&) const = default;
};

inline SweepRow best_row(const std::vector<SweepRow>& rows) {
    SweepRow best;
    bool have = false;
    for (const auto& r : rows)
        if (!have || r.f > best.f) {
            best = r;
            have = true;
        }
    return best;
}

inline EvalReport sweep(const BlockGrid& heat, const BlockGrid& target,
                        const std::vector<double>& thresholds = default_thresholds()) {
    SweepAccumulator acc(thresholds);
    acc.add(heat, target);
    EvalReport rep;
    rep.rows = acc.rows();
    rep.best = best_row(rep.rows);
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json report_to_json(const EvalReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"threshold", r.threshold},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f_measure", r.f}});
    return nlohmann::json{
        {"rows", rows},
        {"best", {{"threshold", rep.best.threshold},
                  {"precision", rep.best.precision},
                  {"recall", rep.best.recall},
                  {"f_measure", rep.best.f}}},
        {"parameter_count", rep.parameter_count},
        {"timings", {{"feature_ms", rep.feature_ms},
                     {"forward_ms", rep.forward_ms},
                     {"total_ms", rep.total_ms}}},
        {"environment", rep.environment}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport rep;
    try {
        for (const auto& r : j.at("rows"))
            rep.rows.push_back(SweepRow{r.at("threshold").get<double>(),
                                        r.at("precision").get<double>(),
                                        r.at("recall").get<double>(),
                                        r.at("f_measure").get<double>()});
        const auto& b = j.at("best");
        rep.best = SweepRow{b.at("threshold").get<double>(), b.at("precision").get<double>(),
                            b.at("recall").get<double>(), b.at("f_measure").get<double>()};
        rep.parameter_count = j.at("parameter_count").get<std::uint64_t>();
        const auto& t = j.at("timings");
        rep.feature_ms = t.at("feature_ms").get<double>();
        rep.forward_ms = t.at("forward_ms").get<double>();
        rep.total_ms = t.at("total_ms").get<double>();
        rep.environment = j.at("environment").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("eval report JSON: ") + e.what());
    }
    return rep;
}

inline std::string report_to_table(const EvalReport& rep) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "threshold  precision  recall     f-measure\n";
    for (const auto& r : rep.rows)
        out << std::setw(9) << r.threshold << "  " << std::setw(9) << r.precision
            << "  " << std::setw(9) << r.recall << "  " << std::setw(9) << r.f << "\n";
    out << "best: f=" << rep.best.f << " at threshold " << rep.best.threshold
        << " (precision " << rep.best.precision << ", recall " << rep.best.recall
        << ")\n";
    if (rep.parameter_count > 0)
        out << "parameters: " << rep.parameter_count << "\n";
    if (rep.total_ms > 0.0)
        out << "timing: features " << rep.feature_ms << " ms, forward "
            << rep.forward_ms << " ms, total " << rep.total_ms << " ms\n";
    return out.str();
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "threshold,precision,recall,f_measure\n";
    out << std::setprecision(17);
    for (const auto& r : rows)
        out << r.threshold << "," << r.precision << "," << r.recall << "," << r.f << "\n";
    return out.str();
}

}  // namespace glare
