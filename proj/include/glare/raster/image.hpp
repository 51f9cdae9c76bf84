#pragma once

// Image ingestion primitives: grayscale conversion, bilinear rescaling and
// tiling into fixed-size square blocks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "glare/core.hpp"

namespace glare {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major luma

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h),
          pixels(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<size_t>(y) * width + x];
    }
    const std::uint8_t* row(int y) const {
        return pixels.data() + static_cast<size_t>(y) * width;
    }
    std::uint8_t* row(int y) {
        return pixels.data() + static_cast<size_t>(y) * width;
    }
    bool operator==(const GrayImage&) const = default;
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h)
        : width(w), height(h),
          pixels(static_cast<size_t>(w) * static_cast<size_t>(h) * 3, 0) {}

    const std::uint8_t* px(int x, int y) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    std::uint8_t* px(int x, int y) {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    bool operator==(const RgbImage&) const = default;
};

struct BlockGridShape {
    int rows = 0;
    int cols = 0;
    int block_size = 64;

    int block_count() const { return rows * cols; }
    bool operator==(const BlockGridShape&) const = default;
};

// BT.601 luma, rounded to nearest.
inline std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    long v = std::lround(y);
    return static_cast<std::uint8_t>(std::clamp(v, 0l, 255l));
}

inline GrayImage to_grayscale(const RgbImage& rgb) {
    if (rgb.width <= 0 || rgb.height <= 0)
        throw DimensionError("to_grayscale: zero-dimension image");
    GrayImage out(rgb.width, rgb.height);
    const std::uint8_t* s = rgb.pixels.data();
    for (size_t i = 0, n = out.pixels.size(); i < n; ++i, s += 3)
        out.pixels[i] = luma601(s[0], s[1], s[2]);
    return out;
}

// Bilinear resize by `scale` in [0.3, 1.5]; output dims round(dim * scale).
// scale 1.0 reproduces the input bit-exactly.
inline GrayImage rescale(const GrayImage& img, double scale) {
    if (!(scale >= 0.3 && scale <= 1.5))
        throw RangeError("rescale: scale outside [0.3, 1.5]");
    if (img.width <= 0 || img.height <= 0)
        throw DimensionError("rescale: zero-dimension image");

    const int ow = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    const int oh = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    GrayImage out(ow, oh);

    const double sx = static_cast<double>(img.width) / ow;
    const double sy = static_cast<double>(img.height) / oh;
    for (int y = 0; y < oh; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0) fy = 0;
        int y0 = std::min(static_cast<int>(fy), img.height - 1);
        int y1 = std::min(y0 + 1, img.height - 1);
        double wy = fy - y0;
        const std::uint8_t* r0 = img.row(y0);
        const std::uint8_t* r1 = img.row(y1);
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < ow; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0) fx = 0;
            int x0 = std::min(static_cast<int>(fx), img.width - 1);
            int x1 = std::min(x0 + 1, img.width - 1);
            double wx = fx - x0;
            double top = (1.0 - wx) * r0[x0] + wx * r0[x1];
            double bot = (1.0 - wx) * r1[x0] + wx * r1[x1];
            double v = (1.0 - wy) * top + wy * bot;
            dst[x] = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(v), 0, 255));
        }
    }
    return out;
}

// Disjoint tiling anchored top-left; partial right/bottom margins drop.
inline BlockGridShape tile_shape(int width, int height, int block_size) {
    if (block_size < 8)
        throw RangeError("tile: block_size must be >= 8");
    if (width < block_size || height < block_size)
        throw DimensionError("tile: image smaller than one block");
    return BlockGridShape{height / block_size, width / block_size, block_size};
}

inline BlockGridShape tile_shape(const GrayImage& img, int block_size) {
    return tile_shape(img.width, img.height, block_size);
}

// Zero-copy view of one tile inside a larger byte raster.
struct BlockView {
    const std::uint8_t* top_left = nullptr;
    int stride = 0;
    int size = 0;

    std::uint8_t at(int x, int y) const {
        return top_left[static_cast<size_t>(y) * stride + x];
    }
};

inline BlockView block_view(const GrayImage& img, const BlockGridShape& shape,
                            int row, int col) {
    return BlockView{
        img.pixels.data() +
            static_cast<size_t>(row) * shape.block_size * img.width +
            static_cast<size_t>(col) * shape.block_size,
        img.width, shape.block_size};
}

inline GrayImage crop_block(const GrayImage& img, const BlockGridShape& shape,
                            int row, int col) {
    GrayImage out(shape.block_size, shape.block_size);
    BlockView v = block_view(img, shape, row, col);
    for (int y = 0; y < shape.block_size; ++y)
        for (int x = 0; x < shape.block_size; ++x)
            out.at(x, y) = v.at(x, y);
    return out;
}

// Row-major, deterministic iteration order.
template <typename F>
inline BlockGridShape for_each_block(const GrayImage& img, int block_size, F&& fn) {
    BlockGridShape shape = tile_shape(img, block_size);
    for (int r = 0; r < shape.rows; ++r)
        for (int c = 0; c < shape.cols; ++c)
            fn(r, c, block_view(img, shape, r, c));
    return shape;
}

}  // namespace glare
