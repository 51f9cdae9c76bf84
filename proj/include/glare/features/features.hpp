#pragma once

// Per-block luminance statistics, Sauvola adaptive binarization, black/white
// horizontal/vertical run-length histograms, and their assembly into the
// five per-image feature tensors.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "glare/core.hpp"
#include "glare/nn/tensor.hpp"
#include "glare/raster/image.hpp"

namespace glare {

struct LuminanceFeatures {
    int min = 0;
    int max = 0;
    int dynamic_range = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // population

    bool operator==(const LuminanceFeatures&) const = default;
};

inline LuminanceFeatures luminance_features(const BlockView& b) {
    int lo = 255, hi = 0;
    std::uint64_t sum = 0, sumsq = 0;
    for (int y = 0; y < b.size; ++y) {
        const std::uint8_t* row = b.top_left + static_cast<size_t>(y) * b.stride;
        for (int x = 0; x < b.size; ++x) {
            int v = row[x];
            lo = v < lo ? v : lo;
            hi = v > hi ? v : hi;
            sum += static_cast<std::uint64_t>(v);
            sumsq += static_cast<std::uint64_t>(v) * v;
        }
    }
    const double n = static_cast<double>(b.size) * b.size;
    const double mean = static_cast<double>(sum) / n;
    double var = (static_cast<double>(sumsq) - static_cast<double>(sum) * sum / n) / n;
    if (var < 0) var = 0;
    return LuminanceFeatures{lo, hi, hi - lo, mean, std::sqrt(var)};
}

inline LuminanceFeatures luminance_features(const GrayImage& block) {
    return luminance_features(BlockView{block.pixels.data(), block.width, block.width});
}

// ---------------------------------------------------------------------------
// Binarization

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // 1 = white, 0 = black

    BinaryImage() = default;
    BinaryImage(int w, int h)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<size_t>(y) * width + x];
    }
    bool operator==(const BinaryImage&) const = default;
};

struct SauvolaParams {
    int window = 31;  // odd
    double k = 0.2;
    double r = 128.0;
};

inline double sauvola_threshold(std::int64_t sum, std::int64_t sumsq, int n,
                                const SauvolaParams& p) {
    const double mean = static_cast<double>(sum) / n;
    double var = (static_cast<double>(sumsq) -
                  static_cast<double>(sum) * static_cast<double>(sum) / n) / n;
    if (var < 0) var = 0;
    const double s = std::sqrt(var);
    return mean * (1.0 + p.k * (s / p.r - 1.0));
}

// Whole-image Sauvola thresholding; white iff luma strictly exceeds the local
// threshold. Windows clip at the borders.
inline BinaryImage binarize(const GrayImage& img, const SauvolaParams& params = {},
                            int workers = 1) {
    if (img.width <= 0 || img.height <= 0)
        throw DimensionError("binarize: zero-dimension image");
    const int w = img.width, h = img.height;
    const int radius = params.window / 2;

    // Integral tables with a zero guard row/column.
    const size_t iw = static_cast<size_t>(w) + 1;
    std::vector<std::int64_t> isum(iw * (h + 1), 0), isq(iw * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = img.row(y);
        std::int64_t rs = 0, rq = 0;
        std::int64_t* srow = isum.data() + (y + 1) * iw;
        std::int64_t* qrow = isq.data() + (y + 1) * iw;
        const std::int64_t* sprev = isum.data() + y * iw;
        const std::int64_t* qprev = isq.data() + y * iw;
        for (int x = 0; x < w; ++x) {
            const std::int64_t v = row[x];
            rs += v;
            rq += v * v;
            srow[x + 1] = sprev[x + 1] + rs;
            qrow[x + 1] = qprev[x + 1] + rq;
        }
    }

    BinaryImage out(w, h);
    parallel_for(0, h, workers, [&](int y) {
        const int y0 = y - radius < 0 ? 0 : y - radius;
        const int y1 = y + radius >= h ? h - 1 : y + radius;
        const std::uint8_t* row = img.row(y);
        std::uint8_t* orow = &out.pixels[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            const int x0 = x - radius < 0 ? 0 : x - radius;
            const int x1 = x + radius >= w ? w - 1 : x + radius;
            const int n = (x1 - x0 + 1) * (y1 - y0 + 1);
            const std::int64_t sum = isum[(y1 + 1) * iw + x1 + 1] -
                                     isum[y0 * iw + x1 + 1] -
                                     isum[(y1 + 1) * iw + x0] +
                                     isum[y0 * iw + x0];
            const std::int64_t sq = isq[(y1 + 1) * iw + x1 + 1] -
                                    isq[y0 * iw + x1 + 1] -
                                    isq[(y1 + 1) * iw + x0] +
                                    isq[y0 * iw + x0];
            orow[x] = row[x] > sauvola_threshold(sum, sq, n, params) ? 1 : 0;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Run-length stroke histograms

struct StrokeHistogram {
    std::vector<float> bins;

    explicit StrokeHistogram(int b = 8) : bins(static_cast<size_t>(b), 0.0f) {}
    bool operator==(const StrokeHistogram&) const = default;
};

// Logarithmic bins {1, 2, 3-4, 5-8, 9-16, 17-32, 33-64, >64} for B = 8;
// generally bin i covers (2^(i-1), 2^i] with the last bin open-ended.
inline int run_length_bin(int length, int bins) {
    const int b = static_cast<int>(std::bit_width(
        static_cast<unsigned>(length - 1)));
    return b < bins - 1 ? b : bins - 1;
}

struct RunLengthHistograms {
    StrokeHistogram black_h, black_v, white_h, white_v;

    explicit RunLengthHistograms(int bins = 8)
        : black_h(bins), black_v(bins), white_h(bins), white_v(bins) {}
    bool operator==(const RunLengthHistograms&) const = default;
};

struct BinaryBlockView {
    const std::uint8_t* top_left = nullptr;
    int stride = 0;
    int size = 0;

    std::uint8_t at(int x, int y) const {
        return top_left[static_cast<size_t>(y) * stride + x];
    }
};

inline BinaryBlockView binary_block_view(const BinaryImage& img,
                                         const BlockGridShape& shape,
                                         int row, int col) {
    return BinaryBlockView{
        img.pixels.data() +
            static_cast<size_t>(row) * shape.block_size * img.width +
            static_cast<size_t>(col) * shape.block_size,
        img.width, shape.block_size};
}

// Maximal same-color runs per row (horizontal) and per column (vertical),
// strictly inside the block. Histograms normalize to unit mass per
// color/orientation pair; a pair with no runs stays all-zero.
inline RunLengthHistograms run_length_histograms(const BinaryBlockView& block,
                                                 int bins = 8) {
    RunLengthHistograms out(bins);
    std::array<std::vector<std::uint32_t>, 4> counts;  // bh, bv, wh, wv
    for (auto& c : counts) c.assign(static_cast<size_t>(bins), 0);

    const int n = block.size;
    for (int y = 0; y < n; ++y) {
        int run = 1;
        std::uint8_t color = block.at(0, y);
        for (int x = 1; x < n; ++x) {
            const std::uint8_t v = block.at(x, y);
            if (v == color) {
                ++run;
            } else {
                ++counts[color ? 2 : 0][run_length_bin(run, bins)];
                color = v;
                run = 1;
            }
        }
        ++counts[color ? 2 : 0][run_length_bin(run, bins)];
    }
    for (int x = 0; x < n; ++x) {
        int run = 1;
        std::uint8_t color = block.at(x, 0);
        for (int y = 1; y < n; ++y) {
            const std::uint8_t v = block.at(x, y);
            if (v == color) {
                ++run;
            } else {
                ++counts[color ? 3 : 1][run_length_bin(run, bins)];
                color = v;
                run = 1;
            }
        }
        ++counts[color ? 3 : 1][run_length_bin(run, bins)];
    }

    StrokeHistogram* hists[4] = {&out.black_h, &out.black_v, &out.white_h, &out.white_v};
    for (int i = 0; i < 4; ++i) {
        std::uint64_t total = 0;
        for (auto c : counts[i]) total += c;
        if (total == 0) continue;
        for (int b = 0; b < bins; ++b)
            hists[i]->bins[b] = static_cast<float>(
                static_cast<double>(counts[i][b]) / static_cast<double>(total));
    }
    return out;
}

inline RunLengthHistograms run_length_histograms(const BinaryImage& block,
                                                 int bins = 8) {
    return run_length_histograms(
        BinaryBlockView{block.pixels.data(), block.width, block.width}, bins);
}

// ---------------------------------------------------------------------------
// Feature stack

struct FeatureStack {
    int rows = 0;
    int cols = 0;
    int bins = 8;
    int block_size = 64;  // in-memory convenience, not serialized
    Tensor3 lum;                                            // rows x cols x 5
    Tensor3 hist_black_h, hist_black_v, hist_white_h, hist_white_v;  // rows x cols x bins

    bool operator==(const FeatureStack&) const = default;
};

inline FeatureStack assemble_feature_stack(const GrayImage& img,
                                           int block_size = 64, int bins = 8,
                                           int workers = 1) {
    const BlockGridShape shape = tile_shape(img, block_size);
    const BinaryImage binary = binarize(img, SauvolaParams{}, workers);

    FeatureStack fs;
    fs.rows = shape.rows;
    fs.cols = shape.cols;
    fs.bins = bins;
    fs.block_size = block_size;
    fs.lum = Tensor3(shape.rows, shape.cols, 5);
    fs.hist_black_h = Tensor3(shape.rows, shape.cols, bins);
    fs.hist_black_v = Tensor3(shape.rows, shape.cols, bins);
    fs.hist_white_h = Tensor3(shape.rows, shape.cols, bins);
    fs.hist_white_v = Tensor3(shape.rows, shape.cols, bins);

    parallel_for(0, shape.rows, workers, [&](int r) {
        for (int c = 0; c < shape.cols; ++c) {
            const LuminanceFeatures lf = luminance_features(block_view(img, shape, r, c));
            float* lp = fs.lum.px(r, c);
            lp[0] = static_cast<float>(lf.min);
            lp[1] = static_cast<float>(lf.max);
            lp[2] = static_cast<float>(lf.dynamic_range);
            lp[3] = static_cast<float>(lf.mean);
            lp[4] = static_cast<float>(lf.std_dev);

            const RunLengthHistograms rh =
                run_length_histograms(binary_block_view(binary, shape, r, c), bins);
            std::memcpy(fs.hist_black_h.px(r, c), rh.black_h.bins.data(),
                        sizeof(float) * bins);
            std::memcpy(fs.hist_black_v.px(r, c), rh.black_v.bins.data(),
                        sizeof(float) * bins);
            std::memcpy(fs.hist_white_h.px(r, c), rh.white_h.bins.data(),
                        sizeof(float) * bins);
            std::memcpy(fs.hist_white_v.px(r, c), rh.white_v.bins.data(),
                        sizeof(float) * bins);
        }
    });
    return fs;
}

// ---------------------------------------------------------------------------
// GLFS container: magic "GLFS", version u32, rows u32, cols u32, bins u32,
// then the five tensors as little-endian f32, row-major, in the order
// lum, black_h, black_v, white_h, white_v.

inline constexpr std::uint32_t kGlfsVersion = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (in.gcount() != 4) throw FormatError(std::string("truncated ") + what);
    return v;
}

inline void write_f32(std::ostream& out, const std::vector<float>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

inline void read_f32(std::istream& in, std::vector<float>& v, const char* what) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(float)))
        throw FormatError(std::string("truncated ") + what);
}

}  // namespace detail

inline void save_feature_stack(const std::string& path, const FeatureStack& fs) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write: " + tmp);
        out.write("GLFS", 4);
        detail::write_u32(out, kGlfsVersion);
        detail::write_u32(out, static_cast<std::uint32_t>(fs.rows));
        detail::write_u32(out, static_cast<std::uint32_t>(fs.cols));
        detail::write_u32(out, static_cast<std::uint32_t>(fs.bins));
        detail::write_f32(out, fs.lum.values);
        detail::write_f32(out, fs.hist_black_h.values);
        detail::write_f32(out, fs.hist_black_v.values);
        detail::write_f32(out, fs.hist_white_h.values);
        detail::write_f32(out, fs.hist_white_v.values);
        if (!out) throw FormatError("short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw FormatError("cannot move output into place: " + path);
}

inline FeatureStack load_feature_stack(const std::string& path, int block_size = 64) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "GLFS", 4) != 0)
        throw FormatError("GLFS: bad magic in " + path);
    const std::uint32_t version = detail::read_u32(in, "GLFS header");
    if (version != kGlfsVersion)
        throw FormatError("GLFS: unsupported version in " + path);
    const int rows = static_cast<int>(detail::read_u32(in, "GLFS header"));
    const int cols = static_cast<int>(detail::read_u32(in, "GLFS header"));
    const int bins = static_cast<int>(detail::read_u32(in, "GLFS header"));
    if (rows <= 0 || cols <= 0 || bins <= 0)
        throw FormatError("GLFS: bad dimensions in " + path);

    FeatureStack fs;
    fs.rows = rows;
    fs.cols = cols;
    fs.bins = bins;
    fs.block_size = block_size;
    fs.lum = Tensor3(rows, cols, 5);
    fs.hist_black_h = Tensor3(rows, cols, bins);
    fs.hist_black_v = Tensor3(rows, cols, bins);
    fs.hist_white_h = Tensor3(rows, cols, bins);
    fs.hist_white_v = Tensor3(rows, cols, bins);
    detail::read_f32(in, fs.lum.values, "GLFS lum tensor");
    detail::read_f32(in, fs.hist_black_h.values, "GLFS histogram tensor");
    detail::read_f32(in, fs.hist_black_v.values, "GLFS histogram tensor");
    detail::read_f32(in, fs.hist_white_h.values, "GLFS histogram tensor");
    detail::read_f32(in, fs.hist_white_v.values, "GLFS histogram tensor");
    return fs;
}

}  // namespace glare
