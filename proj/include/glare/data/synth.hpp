#pragma once

// Synthetic document-photo generator: textured dark background, a page
// covering most of the frame with text-line patterns, and elliptical
// Gaussian glare blobs composited additively then clipped. Ground-truth
// boxes bound each blob's half-maximum ellipse. Per-image glare box area
// is drawn so the dataset mean lands near 5.8% of the image with support
// capped at 40%.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "glare/core.hpp"
#include "glare/data/markup.hpp"
#include "glare/raster/image.hpp"

namespace glare {

struct SynthProfile {
    std::vector<std::pair<int, int>> sizes = {
        {896, 640}, {1024, 768}, {768, 1024}, {1152, 832}, {640, 896}};
    double glare_mean_fraction = 0.055;  // pre-rounding exponential mean
    double glare_min_fraction = 0.004;
    double glare_max_fraction = 0.40;
    double doc_min_side_fraction = 0.80;  // >= 0.60 area coverage
    bool keep_glare_blobs = false;        // retain blob params for inspection
};

struct SynthBlob {
    double cx = 0, cy = 0;      // center
    double rx = 0, ry = 0;      // half-max radii
    double amplitude = 0;
};

struct SynthSample {
    std::string id;
    GrayImage image;
    MarkupBox document;
    std::vector<MarkupBox> boxes_all;       // clipped to image bounds
    std::vector<MarkupBox> boxes_document;  // intersecting the page, clipped to it
    std::vector<SynthBlob> blobs;           // kept when profile asks for it
};

namespace detail {

inline constexpr double kHalfMaxSigma = 1.1774100225154747;  // sqrt(2 ln 2)

inline MarkupBox blob_box(const SynthBlob& b) {
    const int x0 = static_cast<int>(std::floor(b.cx - b.rx));
    const int y0 = static_cast<int>(std::floor(b.cy - b.ry));
    const int x1 = static_cast<int>(std::ceil(b.cx + b.rx));
    const int y1 = static_cast<int>(std::ceil(b.cy + b.ry));
    return MarkupBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

inline void render_text_line(std::vector<float>& canvas, int width, int height,
                             Rng& rng, int x0, int x1, int y_top, int glyph_h) {
    int x = x0;
    while (x < x1) {
        const int word_w = 24 + rng_index(rng, 66);
        const int gap_w = 10 + rng_index(rng, 18);
        const int word_end = std::min(x + word_w, x1);
        const float ink = static_cast<float>(15 + rng_index(rng, 45));
        while (x < word_end) {
            const int stroke_w = 1 + rng_index(rng, 3);
            const int hole_w = 1 + rng_index(rng, 3);
            for (int sx = 0; sx < stroke_w && x < word_end; ++sx, ++x)
                for (int y = y_top; y < std::min(y_top + glyph_h, height); ++y)
                    if (x >= 0 && x < width)
                        canvas[static_cast<size_t>(y) * width + x] = ink;
            x += hole_w;
        }
        x = word_end + gap_w;
    }
}

}  // namespace detail

inline SynthSample synth_image(Rng& rng, const SynthProfile& profile,
                               int force_width = 0, int force_height = 0) {
    int width, height;
    if (force_width > 0 && force_height > 0) {
        width = force_width;
        height = force_height;
    } else {
        const auto& wh = profile.sizes[static_cast<size_t>(
            rng_index(rng, static_cast<int>(profile.sizes.size())))];
        width = wh.first;
        height = wh.second;
    }
    const size_t px_count = static_cast<size_t>(width) * height;
    std::vector<float> canvas(px_count, 0.0f);

    // Background: dark surface with a soft linear gradient.
    {
        const float base = static_cast<float>(rng_range(rng, 40, 95));
        const float gx = static_cast<float>(rng_range(rng, -20, 20));
        const float gy = static_cast<float>(rng_range(rng, -20, 20));
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                canvas[static_cast<size_t>(y) * width + x] =
                    base + gx * (static_cast<float>(x) / width - 0.5f) +
                    gy * (static_cast<float>(y) / height - 0.5f);
    }

    // Page rectangle.
    const int doc_w = static_cast<int>(
        width * rng_range(rng, profile.doc_min_side_fraction, 0.97));
    const int doc_h = static_cast<int>(
        height * rng_range(rng, profile.doc_min_side_fraction, 0.97));
    const int doc_x = rng_index(rng, width - doc_w + 1);
    const int doc_y = rng_index(rng, height - doc_h + 1);
    const MarkupBox document{doc_x, doc_y, doc_w, doc_h};
    {
        const float page = static_cast<float>(rng_range(rng, 185, 232));
        const float gx = static_cast<float>(rng_range(rng, -14, 14));
        for (int y = doc_y; y < doc_y + doc_h; ++y)
            for (int x = doc_x; x < doc_x + doc_w; ++x)
                canvas[static_cast<size_t>(y) * width + x] =
                    page + gx * (static_cast<float>(x - doc_x) / doc_w - 0.5f);
    }

    // Text lines on the page.
    {
        const int margin = std::max(8, static_cast<int>(0.05 * std::min(doc_w, doc_h)));
        int y = doc_y + margin;
        while (y + 34 < doc_y + doc_h - margin) {
            const int line_h = 18 + rng_index(rng, 17);
            const int glyph_h = std::max(6, static_cast<int>(
                line_h * rng_range(rng, 0.42, 0.62)));
            if (rng_uniform(rng) > 0.15)  // occasional paragraph break
                detail::render_text_line(canvas, width, height, rng,
                                         doc_x + margin, doc_x + doc_w - margin,
                                         y, glyph_h);
            y += line_h;
        }
        if (rng_uniform(rng) < 0.3) {  // a ruled separator line
            const int ry = doc_y + margin + rng_index(rng, std::max(1, doc_h - 2 * margin));
            const int thickness = 1 + rng_index(rng, 2);
            for (int yy = ry; yy < std::min(ry + thickness, doc_y + doc_h); ++yy)
                for (int x = doc_x + margin; x < doc_x + doc_w - margin; ++x)
                    canvas[static_cast<size_t>(yy) * width + x] = 30.0f;
        }
    }

    // Glare blobs. Target union-of-boxes fraction drawn from a truncated
    // exponential; rounding inflates boxes slightly, so a shrink pass keeps
    // the hard 40% cap.
    std::vector<SynthBlob> blobs;
    {
        double frac = -profile.glare_mean_fraction * std::log(1.0 - rng_uniform(rng));
        frac = std::clamp(frac, profile.glare_min_fraction, profile.glare_max_fraction);
        const double u = rng_uniform(rng);
        const int blob_count = u < 0.5 ? 1 : (u < 0.85 ? 2 : 3);
        std::vector<double> weights;
        double wsum = 0.0;
        for (int i = 0; i < blob_count; ++i) {
            weights.push_back(rng_range(rng, 0.5, 1.5));
            wsum += weights.back();
        }

        const double image_area = static_cast<double>(width) * height;
        for (int i = 0; i < blob_count; ++i) {
            const double target_area = frac * image_area * weights[static_cast<size_t>(i)] / wsum;
            const double aspect = std::exp(rng_range(rng, -0.55, 0.55));
            double rx = std::sqrt(target_area * aspect) / 2.0;
            double ry = target_area / (4.0 * rx);
            const double rx_cap = width / 2.0 - 3.0, ry_cap = height / 2.0 - 3.0;
            rx = std::clamp(rx, 3.0, rx_cap);
            ry = std::clamp(ry, 3.0, ry_cap);

            SynthBlob blob;
            blob.rx = rx;
            blob.ry = ry;
            blob.amplitude = rng_range(rng, 150, 245);
            // Prefer centers on the page; fall back to anywhere that fits.
            for (int attempt = 0; attempt < 16; ++attempt) {
                const double lo_x = std::max(rx + 1.0, static_cast<double>(doc_x));
                const double hi_x = std::min(width - rx - 2.0,
                                             static_cast<double>(doc_x + doc_w));
                const double lo_y = std::max(ry + 1.0, static_cast<double>(doc_y));
                const double hi_y = std::min(height - ry - 2.0,
                                             static_cast<double>(doc_y + doc_h));
                blob.cx = lo_x < hi_x ? rng_range(rng, lo_x, hi_x)
                                      : std::clamp(width / 2.0, rx + 1.0, width - rx - 2.0);
                blob.cy = lo_y < hi_y ? rng_range(rng, lo_y, hi_y)
                                      : std::clamp(height / 2.0, ry + 1.0, height - ry - 2.0);
                const MarkupBox candidate = detail::blob_box(blob);
                bool overlaps = false;
                for (const auto& other : blobs) {
                    const MarkupBox ob = detail::blob_box(other);
                    if (clip_box(candidate, ob.x - 1, ob.y - 1,
                                 ob.x + ob.width + 1, ob.y + ob.height + 1))
                        overlaps = true;
                }
                if (!overlaps) break;
            }
            blobs.push_back(blob);
        }

        // Shrink uniformly until the union of rounded boxes respects the cap.
        for (int pass = 0; pass < 8; ++pass) {
            std::vector<MarkupBox> boxes;
            for (const auto& b : blobs) boxes.push_back(detail::blob_box(b));
            boxes = clip_boxes(boxes, width, height);
            const double union_frac = static_cast<double>(box_union_area(boxes)) / image_area;
            if (union_frac <= profile.glare_max_fraction) break;
            const double s = std::sqrt(profile.glare_max_fraction * 0.97 / union_frac);
            for (auto& b : blobs) {
                b.rx = std::max(3.0, b.rx * s);
                b.ry = std::max(3.0, b.ry * s);
            }
        }

        // Composite.
        for (const auto& b : blobs) {
            const double sx = b.rx / detail::kHalfMaxSigma;
            const double sy = b.ry / detail::kHalfMaxSigma;
            const int x0 = std::max(0, static_cast<int>(b.cx - 3.2 * sx));
            const int x1 = std::min(width - 1, static_cast<int>(b.cx + 3.2 * sx) + 1);
            const int y0 = std::max(0, static_cast<int>(b.cy - 3.2 * sy));
            const int y1 = std::min(height - 1, static_cast<int>(b.cy + 3.2 * sy) + 1);
            for (int y = y0; y <= y1; ++y) {
                const double dy = (y - b.cy) / sy;
                for (int x = x0; x <= x1; ++x) {
                    const double dx = (x - b.cx) / sx;
                    canvas[static_cast<size_t>(y) * width + x] += static_cast<float>(
                        b.amplitude * std::exp(-0.5 * (dx * dx + dy * dy)));
                }
            }
        }
    }

    // Sensor-ish noise, then quantize.
    SynthSample sample;
    sample.image = GrayImage(width, height);
    for (size_t i = 0; i < px_count; ++i) {
        const float noisy = canvas[i] + static_cast<float>(rng_index(rng, 5) - 2);
        sample.image.pixels[i] = static_cast<std::uint8_t>(
            std::clamp(static_cast<int>(std::lround(noisy)), 0, 255));
    }

    sample.document = document;
    for (const auto& b : blobs) {
        if (auto clipped = clip_box(detail::blob_box(b), width, height))
            sample.boxes_all.push_back(*clipped);
        if (auto on_doc = clip_box(detail::blob_box(b), doc_x, doc_y,
                                   doc_x + doc_w, doc_y + doc_h))
            sample.boxes_document.push_back(*on_doc);
    }
    if (profile.keep_glare_blobs) sample.blobs = blobs;
    return sample;
}

// Deterministic per index: the same (seed, i) pair always produces the same
// image, so generation parallelizes without changing output.
inline SynthSample synth_sample_at(int index, std::uint32_t seed,
                                   const SynthProfile& profile = {},
                                   int force_width = 0, int force_height = 0) {
    Rng rng(static_cast<Rng::result_type>(splitmix64(
        (static_cast<std::uint64_t>(seed) << 20) + static_cast<std::uint64_t>(index))));
    SynthSample s = synth_image(rng, profile, force_width, force_height);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img_%05d", index);
    s.id = buf;
    return s;
}

inline std::vector<SynthSample> synth_dataset(int n, std::uint32_t seed,
                                              const SynthProfile& profile = {},
                                              int workers = 1) {
    if (n < 1) throw RangeError("synth_dataset: n must be >= 1");
    std::vector<SynthSample> out(static_cast<size_t>(n));
    parallel_for(0, n, workers, [&](int i) {
        out[static_cast<size_t>(i)] = synth_sample_at(i, seed, profile);
    });
    return out;
}

}  // namespace glare
