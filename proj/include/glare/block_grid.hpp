#pragma once

// A 2-D lattice of block-level values (labels, probabilities, masks) with
// block-size metadata. Values are floats; labels use 0.0/1.0.

#include <vector>

#include "glare/core.hpp"
#include "glare/raster/image.hpp"

namespace glare {

struct BlockGrid {
    int rows = 0;
    int cols = 0;
    int block_size = 64;
    std::vector<float> values;

    BlockGrid() = default;
    BlockGrid(int r, int c, int bs, float fill = 0.0f)
        : rows(r), cols(c), block_size(bs),
          values(static_cast<size_t>(r) * c, fill) {}
    explicit BlockGrid(const BlockGridShape& s, float fill = 0.0f)
        : BlockGrid(s.rows, s.cols, s.block_size, fill) {}

    float at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
    float& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return values.size(); }
    BlockGridShape shape() const { return BlockGridShape{rows, cols, block_size}; }
    bool operator==(const BlockGrid&) const = default;
};

inline void require_same_shape(const BlockGrid& a, const BlockGrid& b,
                               const char* what) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError(std::string(what) + ": grid shape mismatch");
}

}  // namespace glare
