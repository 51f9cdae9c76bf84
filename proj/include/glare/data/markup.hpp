#pragma once

// Glare markup: axis-aligned bounding boxes in pixel coordinates, their JSON
// container, and rasterization to block-level {0,1} labels under the
// 25%-intersection rule.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/raster/image.hpp"

namespace glare {

struct MarkupBox {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const MarkupBox&) const = default;
};

enum class MarkupMode { AllGlare, DocumentOnly };

inline const char* markup_mode_name(MarkupMode m) {
    return m == MarkupMode::AllGlare ? "all" : "document";
}

inline MarkupMode markup_mode_from_name(const std::string& s) {
    if (s == "all") return MarkupMode::AllGlare;
    if (s == "document") return MarkupMode::DocumentOnly;
    throw FormatError("unknown markup mode: " + s);
}

struct ImageMarkup {
    std::string image;
    MarkupMode mode = MarkupMode::AllGlare;
    std::vector<MarkupBox> boxes;
};

// Intersection with a clip rectangle; empty result drops the box.
inline std::optional<MarkupBox> clip_box(const MarkupBox& b, int x0, int y0,
                                         int x1, int y1) {
    const int cx0 = std::max(b.x, x0);
    const int cy0 = std::max(b.y, y0);
    const int cx1 = std::min(b.x + b.width, x1);
    const int cy1 = std::min(b.y + b.height, y1);
    if (cx0 >= cx1 || cy0 >= cy1) return std::nullopt;
    return MarkupBox{cx0, cy0, cx1 - cx0, cy1 - cy0};
}

inline std::optional<MarkupBox> clip_box(const MarkupBox& b, int width, int height) {
    return clip_box(b, 0, 0, width, height);
}

inline std::vector<MarkupBox> clip_boxes(std::span<const MarkupBox> boxes,
                                         int width, int height) {
    std::vector<MarkupBox> out;
    for (const auto& b : boxes)
        if (auto c = clip_box(b, width, height)) out.push_back(*c);
    return out;
}

// Exact pixel area of the union of axis-aligned boxes (no double counting).
inline std::int64_t box_union_area(std::span<const MarkupBox> boxes) {
    std::vector<int> xs;
    for (const auto& b : boxes) {
        if (b.width <= 0 || b.height <= 0) continue;
        xs.push_back(b.x);
        xs.push_back(b.x + b.width);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::int64_t area = 0;
    std::vector<std::pair<int, int>> spans;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const int sx0 = xs[i], sx1 = xs[i + 1];
        spans.clear();
        for (const auto& b : boxes)
            if (b.width > 0 && b.height > 0 && b.x <= sx0 && b.x + b.width >= sx1)
                spans.emplace_back(b.y, b.y + b.height);
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        std::int64_t covered = 0;
        int cur0 = spans[0].first, cur1 = spans[0].second;
        for (size_t j = 1; j < spans.size(); ++j) {
            if (spans[j].first > cur1) {
                covered += cur1 - cur0;
                cur0 = spans[j].first;
                cur1 = spans[j].second;
            } else {
                cur1 = std::max(cur1, spans[j].second);
            }
        }
        covered += cur1 - cur0;
        area += static_cast<std::int64_t>(sx1 - sx0) * covered;
    }
    return area;
}

// Block label = 1 iff the union of boxes covers at least
// coverage_threshold of the block's pixels.
inline BlockGrid rasterize_labels(std::span<const MarkupBox> boxes,
                                  const BlockGridShape& shape,
                                  double coverage_threshold = 0.25) {
    if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0))
        throw RangeError("rasterize_labels: threshold outside (0, 1]");
    BlockGrid grid(shape);
    const int bs = shape.block_size;
    const double needed = coverage_threshold * static_cast<double>(bs) * bs;

    std::vector<MarkupBox> local;
    for (int r = 0; r < shape.rows; ++r) {
        const int by0 = r * bs, by1 = by0 + bs;
        for (int c = 0; c < shape.cols; ++c) {
            const int bx0 = c * bs, bx1 = bx0 + bs;
            local.clear();
            for (const auto& b : boxes)
                if (auto cb = clip_box(b, bx0, by0, bx1, by1)) local.push_back(*cb);
            if (local.empty()) continue;
            const std::int64_t covered = box_union_area(local);
            if (static_cast<double>(covered) >= needed) grid.at(r, c) = 1.0f;
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// JSON: {"image": name, "mode": "all"|"document", "boxes": [{x,y,w,h}...]}

inline nlohmann::json markup_to_json(const ImageMarkup& m) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : m.boxes)
        boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.width}, {"h", b.height}});
    return nlohmann::json{
        {"image", m.image}, {"mode", markup_mode_name(m.mode)}, {"boxes", boxes}};
}

inline ImageMarkup markup_from_json(const nlohmann::json& j) {
    ImageMarkup m;
    try {
        m.image = j.at("image").get<std::string>();
        m.mode = markup_mode_from_name(j.at("mode").get<std::string>());
        for (const auto& b : j.at("boxes"))
            m.boxes.push_back(MarkupBox{b.at("x").get<int>(), b.at("y").get<int>(),
                                        b.at("w").get<int>(), b.at("h").get<int>()});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("markup JSON: ") + e.what());
    }
    return m;
}

inline void save_markup(const std::string& path, const ImageMarkup& m) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write: " + tmp);
        out << markup_to_json(m).dump(2) << "\n";
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw FormatError("cannot move output into place: " + path);
}

inline ImageMarkup load_markup(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("markup JSON: ") + e.what());
    }
    return markup_from_json(j);
}

}  // namespace glare
