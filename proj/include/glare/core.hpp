#pragma once

// Shared plumbing: error types, deterministic RNG helpers, worker-count
// resolution and a wall-clock timer.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace glare {

static_assert(std::endian::native == std::endian::little,
              "GLFS/GLNW file formats assume a little-endian host");

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class RangeError     : public Error { public: using Error::Error; };
class ShapeError     : public Error { public: using Error::Error; };
class FormatError    : public Error { public: using Error::Error; };
class ConfigError    : public Error { public: using Error::Error; };
class FitError       : public Error { public: using Error::Error; };

// Raised when training hits a non-finite loss; the CLI maps it to its own
// exit code so scripts can tell divergence from bad input.
class DivergenceError : public Error { public: using Error::Error; };

using Rng = std::mt19937;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Distribution helpers are hand-rolled so sampled streams depend only on the
// mt19937 sequence, not on the standard library's distribution internals.
inline double rng_uniform(Rng& g) {
    return static_cast<double>(g() >> 8) * (1.0 / 16777216.0);  // [0,1)
}

inline double rng_range(Rng& g, double lo, double hi) {
    return lo + (hi - lo) * rng_uniform(g);
}

inline int rng_index(Rng& g, int n) {
    return static_cast<int>((static_cast<std::uint64_t>(g()) *
                             static_cast<std::uint64_t>(n)) >> 32);  // [0,n)
}

inline double rng_normal(Rng& g) {
    double u1 = 1.0 - rng_uniform(g);  // (0,1]
    double u2 = rng_uniform(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// GLARE_NUM_WORKERS caps parallelism for every parallel section.
inline int worker_count(int requested = 0) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int n = requested > 0 ? requested : hw;
    if (const char* s = std::getenv("GLARE_NUM_WORKERS")) {
        int cap = std::atoi(s);
        if (cap > 0 && cap < n) n = cap;
    }
    return n;
}

// Static row partition; worker results land in disjoint slots, so outputs
// are bit-identical for any worker count.
template <typename F>
inline void parallel_for(int begin, int end, int workers, F&& fn) {
    const int count = end - begin;
    if (count <= 0) return;
    if (workers > count) workers = count;
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

class WallTimer {
public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    void reset() { start_ = std::chrono::steady_clock::now(); }
    double ms() const {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace glare
