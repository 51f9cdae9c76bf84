#pragma once

// Dense rank-3 tensor, row-major with channels last. The innermost channel
// stride keeps per-pixel channel vectors contiguous for the conv kernels.

#include <cstddef>
#include <vector>

#include "glare/core.hpp"

namespace glare {

struct Tensor3 {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<float> values;

    Tensor3() = default;
    Tensor3(int r, int c, int ch, float fill = 0.0f)
        : rows(r), cols(c), channels(ch),
          values(static_cast<size_t>(r) * c * ch, fill) {}

    size_t index(int r, int c, int ch) const {
        return (static_cast<size_t>(r) * cols + c) * channels + ch;
    }
    float at(int r, int c, int ch) const { return values[index(r, c, ch)]; }
    float& at(int r, int c, int ch) { return values[index(r, c, ch)]; }

    const float* px(int r, int c) const {
        return values.data() + (static_cast<size_t>(r) * cols + c) * channels;
    }
    float* px(int r, int c) {
        return values.data() + (static_cast<size_t>(r) * cols + c) * channels;
    }

    size_t size() const { return values.size(); }
    bool same_shape(const Tensor3& o) const {
        return rows == o.rows && cols == o.cols && channels == o.channels;
    }
    bool operator==(const Tensor3&) const = default;
};

}  // namespace glare
