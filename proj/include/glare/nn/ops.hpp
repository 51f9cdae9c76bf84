#pragma once

// Deterministic CPU kernels: 2-D convolution with same/zero padding,
// parameter-free instance normalization, 2x2 max pooling, nearest-neighbor
// upsampling, channel concatenation, and hand-derived backward passes for
// all of them.

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "glare/core.hpp"
#include "glare/nn/tensor.hpp"

namespace glare {

enum class Activation { None, Relu, Sigmoid };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        default: return "none";
    }
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "none") return Activation::None;
    throw ConfigError("unknown activation: " + s);
}

struct ConvSpec {
    int kernel = 3;  // 1 or 3
    int in_channels = 0;
    int out_channels = 0;
    Activation act = Activation::None;
};

struct ConvParams {
    ConvSpec spec;
    std::vector<float> weights;  // [(kr*k + kc)*in + ic]*out + oc
    std::vector<float> bias;     // out

    ConvParams() = default;
    explicit ConvParams(const ConvSpec& s) : spec(s) {
        if (s.kernel != 1 && s.kernel != 3)
            throw ConfigError("conv kernel must be 1 or 3");
        if (s.in_channels <= 0 || s.out_channels <= 0)
            throw ConfigError("conv channel counts must be positive");
        weights.assign(static_cast<size_t>(s.kernel) * s.kernel *
                           s.in_channels * s.out_channels, 0.0f);
        bias.assign(static_cast<size_t>(s.out_channels), 0.0f);
    }

    size_t weight_index(int kr, int kc, int ic, int oc) const {
        return ((static_cast<size_t>(kr) * spec.kernel + kc) * spec.in_channels + ic) *
                   spec.out_channels + oc;
    }
    size_t parameter_count() const { return weights.size() + bias.size(); }
};

inline void he_init(ConvParams& p, Rng& rng) {
    const double stddev = std::sqrt(
        2.0 / (static_cast<double>(p.spec.kernel) * p.spec.kernel * p.spec.in_channels));
    for (auto& w : p.weights) w = static_cast<float>(rng_normal(rng) * stddev);
    for (auto& b : p.bias) b = 0.0f;
}

inline float apply_activation(float v, Activation a) {
    switch (a) {
        case Activation::Relu: return v > 0.0f ? v : 0.0f;
        case Activation::Sigmoid: return 1.0f / (1.0f + std::exp(-v));
        default: return v;
    }
}

// Same (zero) padding; output spatial dims equal input dims.
inline Tensor3 conv2d(const Tensor3& x, const ConvParams& p, int workers = 1) {
    const int k = p.spec.kernel;
    const int in = p.spec.in_channels;
    const int out = p.spec.out_channels;
    if (x.channels != in)
        throw ShapeError("conv2d: input has " + std::to_string(x.channels) +
                         " channels, layer expects " + std::to_string(in));
    const int pad = k / 2;
    Tensor3 y(x.rows, x.cols, out);
    const float* __restrict__ w = p.weights.data();
    const float* __restrict__ b = p.bias.data();
    const Activation act = p.spec.act;

    parallel_for(0, x.rows, workers, [&](int r) {
        std::vector<float> accbuf(static_cast<size_t>(out));
        float* __restrict__ acc = accbuf.data();
        for (int c = 0; c < x.cols; ++c) {
            std::memcpy(acc, b, sizeof(float) * out);
            const int kr0 = pad - r < 0 ? 0 : pad - r;
            const int kr1 = x.rows - 1 - r + pad < k - 1 ? x.rows - 1 - r + pad : k - 1;
            const int kc0 = pad - c < 0 ? 0 : pad - c;
            const int kc1 = x.cols - 1 - c + pad < k - 1 ? x.cols - 1 - c + pad : k - 1;
            for (int kr = kr0; kr <= kr1; ++kr) {
                const int rr = r + kr - pad;
                for (int kc = kc0; kc <= kc1; ++kc) {
                    const int cc = c + kc - pad;
                    const float* __restrict__ xp = x.px(rr, cc);
                    const float* __restrict__ wt = w +
                        (static_cast<size_t>(kr) * k + kc) * in * out;
                    for (int ic = 0; ic < in; ++ic) {
                        const float xv = xp[ic];
                        const float* __restrict__ wrow = wt + static_cast<size_t>(ic) * out;
                        for (int oc = 0; oc < out; ++oc) acc[oc] += xv * wrow[oc];
                    }
                }
            }
            float* yp = y.px(r, c);
            for (int oc = 0; oc < out; ++oc) yp[oc] = apply_activation(acc[oc], act);
        }
    });
    return y;
}

// Backward through activation + convolution. `y` is the forward output
// (post-activation). Pass dx == nullptr for input layers.
inline void conv2d_backward(const Tensor3& x, const ConvParams& p, const Tensor3& y,
                            const Tensor3& dy, Tensor3* dx,
                            std::vector<float>& dweights, std::vector<float>& dbias,
                            int workers = 1) {
    const int k = p.spec.kernel;
    const int in = p.spec.in_channels;
    const int out = p.spec.out_channels;
    const int pad = k / 2;
    if (!dy.same_shape(y)) throw ShapeError("conv2d_backward: dy/y shape mismatch");

    Tensor3 dpre(y.rows, y.cols, out);
    switch (p.spec.act) {
        case Activation::Relu:
            for (size_t i = 0; i < dpre.size(); ++i)
                dpre.values[i] = y.values[i] > 0.0f ? dy.values[i] : 0.0f;
            break;
        case Activation::Sigmoid:
            for (size_t i = 0; i < dpre.size(); ++i)
                dpre.values[i] = dy.values[i] * y.values[i] * (1.0f - y.values[i]);
            break;
        default:
            dpre.values = dy.values;
            break;
    }

    dbias.assign(static_cast<size_t>(out), 0.0f);
    for (int r = 0; r < y.rows; ++r)
        for (int c = 0; c < y.cols; ++c) {
            const float* dp = dpre.px(r, c);
            for (int oc = 0; oc < out; ++oc) dbias[oc] += dp[oc];
        }

    dweights.assign(p.weights.size(), 0.0f);
    parallel_for(0, k * k, workers, [&](int tap) {
        const int kr = tap / k, kc = tap % k;
        float* __restrict__ dwt = dweights.data() +
            (static_cast<size_t>(kr) * k + kc) * in * out;
        for (int r = 0; r < y.rows; ++r) {
            const int rr = r + kr - pad;
            if (rr < 0 || rr >= x.rows) continue;
            for (int c = 0; c < y.cols; ++c) {
                const int cc = c + kc - pad;
                if (cc < 0 || cc >= x.cols) continue;
                const float* __restrict__ xp = x.px(rr, cc);
                const float* __restrict__ dp = dpre.px(r, c);
                for (int ic = 0; ic < in; ++ic) {
                    const float xv = xp[ic];
                    if (xv == 0.0f) continue;
                    float* __restrict__ drow = dwt + static_cast<size_t>(ic) * out;
                    for (int oc = 0; oc < out; ++oc) drow[oc] += xv * dp[oc];
                }
            }
        }
    });

    if (dx != nullptr) {
        *dx = Tensor3(x.rows, x.cols, in);
        const float* __restrict__ w = p.weights.data();
        parallel_for(0, x.rows, workers, [&](int i) {
            for (int j = 0; j < x.cols; ++j) {
                float* __restrict__ dxp = dx->px(i, j);
                for (int kr = 0; kr < k; ++kr) {
                    const int r = i - kr + pad;
                    if (r < 0 || r >= y.rows) continue;
                    for (int kc = 0; kc < k; ++kc) {
                        const int c = j - kc + pad;
                        if (c < 0 || c >= y.cols) continue;
                        const float* __restrict__ dp = dpre.px(r, c);
                        const float* __restrict__ wt = w +
                            (static_cast<size_t>(kr) * k + kc) * in * out;
                        for (int ic = 0; ic < in; ++ic) {
                            const float* __restrict__ wrow = wt + static_cast<size_t>(ic) * out;
                            float s = 0.0f;
                            for (int oc = 0; oc < out; ++oc) s += wrow[oc] * dp[oc];
                            dxp[ic] += s;
                        }
                    }
                }
            }
        });
    }
}

inline constexpr double kInstanceNormEps = 1e-5;

// Per-channel spatial standardization without trainable parameters.
// Statistics accumulate in double so constant channels map to exact zeros.
inline Tensor3 instance_norm(const Tensor3& x, double eps = kInstanceNormEps) {
    if (x.rows * x.cols < 1) throw ShapeError("instance_norm: empty tensor");
    const int ch = x.channels;
    const size_t px_count = static_cast<size_t>(x.rows) * x.cols;

    std::vector<double> mean(ch, 0.0), var(ch, 0.0);
    const float* v = x.values.data();
    for (size_t i = 0; i < px_count; ++i, v += ch)
        for (int q = 0; q < ch; ++q) mean[q] += v[q];
    for (int q = 0; q < ch; ++q) mean[q] /= static_cast<double>(px_count);
    v = x.values.data();
    for (size_t i = 0; i < px_count; ++i, v += ch)
        for (int q = 0; q < ch; ++q) {
            const double d = v[q] - mean[q];
            var[q] += d * d;
        }

    std::vector<double> invstd(ch);
    for (int q = 0; q < ch; ++q)
        invstd[q] = 1.0 / std::sqrt(var[q] / static_cast<double>(px_count) + eps);

    Tensor3 y(x.rows, x.cols, ch);
    v = x.values.data();
    float* o = y.values.data();
    for (size_t i = 0; i < px_count; ++i, v += ch, o += ch)
        for (int q = 0; q < ch; ++q)
            o[q] = static_cast<float>((v[q] - mean[q]) * invstd[q]);
    return y;
}

inline Tensor3 instance_norm_backward(const Tensor3& x, const Tensor3& y,
                                      const Tensor3& dy,
                                      double eps = kInstanceNormEps) {
    const int ch = x.channels;
    const size_t px_count = static_cast<size_t>(x.rows) * x.cols;
    const double n = static_cast<double>(px_count);

    std::vector<double> mean(ch, 0.0), var(ch, 0.0);
    const float* v = x.values.data();
    for (size_t i = 0; i < px_count; ++i, v += ch)
        for (int q = 0; q < ch; ++q) mean[q] += v[q];
    for (int q = 0; q < ch; ++q) mean[q] /= n;
    v = x.values.data();
    for (size_t i = 0; i < px_count; ++i, v += ch)
        for (int q = 0; q < ch; ++q) {
            const double d = v[q] - mean[q];
            var[q] += d * d;
        }

    std::vector<double> invstd(ch), g1(ch, 0.0), g2(ch, 0.0);
    for (int q = 0; q < ch; ++q) invstd[q] = 1.0 / std::sqrt(var[q] / n + eps);
    const float* dp = dy.values.data();
    const float* yp = y.values.data();
    for (size_t i = 0; i < px_count; ++i, dp += ch, yp += ch)
        for (int q = 0; q < ch; ++q) {
            g1[q] += dp[q];
            g2[q] += static_cast<double>(dp[q]) * yp[q];
        }
    for (int q = 0; q < ch; ++q) {
        g1[q] /= n;
        g2[q] /= n;
    }

    Tensor3 dx(x.rows, x.cols, ch);
    dp = dy.values.data();
    yp = y.values.data();
    float* o = dx.values.data();
    for (size_t i = 0; i < px_count; ++i, dp += ch, yp += ch, o += ch)
        for (int q = 0; q < ch; ++q)
            o[q] = static_cast<float>(invstd[q] * (dp[q] - g1[q] - yp[q] * g2[q]));
    return dx;
}

inline Tensor3 maxpool2(const Tensor3& x) {
    if (x.rows % 2 != 0 || x.cols % 2 != 0)
        throw ShapeError("maxpool2: spatial dims must be even");
    Tensor3 y(x.rows / 2, x.cols / 2, x.channels);
    for (int r = 0; r < y.rows; ++r)
        for (int c = 0; c < y.cols; ++c) {
            const float* a = x.px(2 * r, 2 * c);
            const float* b = x.px(2 * r, 2 * c + 1);
            const float* d = x.px(2 * r + 1, 2 * c);
            const float* e = x.px(2 * r + 1, 2 * c + 1);
            float* o = y.px(r, c);
            for (int q = 0; q < x.channels; ++q) {
                float m = a[q];
                if (b[q] > m) m = b[q];
                if (d[q] > m) m = d[q];
                if (e[q] > m) m = e[q];
                o[q] = m;
            }
        }
    return y;
}

// Gradient routes to the first maximum in window scan order.
inline Tensor3 maxpool2_backward(const Tensor3& x, const Tensor3& dy) {
    Tensor3 dx(x.rows, x.cols, x.channels);
    for (int r = 0; r < dy.rows; ++r)
        for (int c = 0; c < dy.cols; ++c)
            for (int q = 0; q < x.channels; ++q) {
                int br = 2 * r, bc = 2 * c;
                float best = x.at(br, bc, q);
                for (int dr = 0; dr < 2; ++dr)
                    for (int dc = 0; dc < 2; ++dc) {
                        const float v = x.at(2 * r + dr, 2 * c + dc, q);
                        if (v > best) {
                            best = v;
                            br = 2 * r + dr;
                            bc = 2 * c + dc;
                        }
                    }
                dx.at(br, bc, q) += dy.at(r, c, q);
            }
    return dx;
}

inline Tensor3 upsample2(const Tensor3& x) {
    Tensor3 y(x.rows * 2, x.cols * 2, x.channels);
    const size_t row_bytes = sizeof(float) * x.channels;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            const float* s = x.px(r, c);
            std::memcpy(y.px(2 * r, 2 * c), s, row_bytes);
            std::memcpy(y.px(2 * r, 2 * c + 1), s, row_bytes);
            std::memcpy(y.px(2 * r + 1, 2 * c), s, row_bytes);
            std::memcpy(y.px(2 * r + 1, 2 * c + 1), s, row_bytes);
        }
    return y;
}

inline Tensor3 upsample2_backward(const Tensor3& dy) {
    if (dy.rows % 2 != 0 || dy.cols % 2 != 0)
        throw ShapeError("upsample2_backward: odd gradient dims");
    Tensor3 dx(dy.rows / 2, dy.cols / 2, dy.channels);
    for (int r = 0; r < dx.rows; ++r)
        for (int c = 0; c < dx.cols; ++c) {
            float* o = dx.px(r, c);
            for (int dr = 0; dr < 2; ++dr)
                for (int dc = 0; dc < 2; ++dc) {
                    const float* s = dy.px(2 * r + dr, 2 * c + dc);
                    for (int q = 0; q < dy.channels; ++q) o[q] += s[q];
                }
        }
    return dx;
}

inline Tensor3 concat_channels(const std::vector<const Tensor3*>& parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    int ch = 0;
    for (const Tensor3* t : parts) {
        if (t->rows != parts[0]->rows || t->cols != parts[0]->cols)
            throw ShapeError("concat: spatial dims differ");
        ch += t->channels;
    }
    Tensor3 y(parts[0]->rows, parts[0]->cols, ch);
    for (int r = 0; r < y.rows; ++r)
        for (int c = 0; c < y.cols; ++c) {
            float* o = y.px(r, c);
            for (const Tensor3* t : parts) {
                std::memcpy(o, t->px(r, c), sizeof(float) * t->channels);
                o += t->channels;
            }
        }
    return y;
}

}  // namespace glare
