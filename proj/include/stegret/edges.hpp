#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "stegret/error.hpp"
#include "stegret/image.hpp"

namespace stegret {

/// Grayscale grid companion to ImageRaster (one 8-bit value per pixel).
struct GrayGrid {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    GrayGrid() = default;
    GrayGrid(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    // Replicate-border lookup used by every convolution here.
    std::uint8_t at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y);
    }

    bool operator==(const GrayGrid&) const = default;
};

/// Per-pixel edge/smooth classification. flags nonzero = edge pixel.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> flags;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), flags(static_cast<std::size_t>(w) * h, 0) {}

    bool at(int x, int y) const {
        return flags[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) {
        flags[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }
    std::size_t edge_count() const {
        return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(),
                                                      [](std::uint8_t f) { return f != 0; }));
    }

    bool operator==(const EdgeMap&) const = default;
};

/// Detector parameters. These are format constants: extraction recomputes the
/// map from the stego image, so the values used at embed time must be used
/// again at extract time (they are carried inside EmbedConfig).
struct EdgeParams {
    int laplacian_threshold = 16;
    double log_sigma = 1.0;
    int log_threshold = 4;
    double fuzzy_low = 0.0625;
    double fuzzy_high = 0.25;
    int mask_bits = 3; // low-order bits cleared before detection; = k_edge

    void validate() const {
        if (laplacian_threshold <= 0 || log_threshold <= 0)
            raise(Errc::parse_error, "edge thresholds must be positive");
        if (!(log_sigma > 0.0))
            raise(Errc::parse_error, "log sigma must be positive");
        if (!(0.0 < fuzzy_low && fuzzy_low < fuzzy_high && fuzzy_high <= 1.0))
            raise(Errc::parse_error, "fuzzy memberships must satisfy 0 < low < high <= 1");
        if (mask_bits < 0 || mask_bits > 4)
            raise(Errc::parse_error, "mask_bits must be in [0, 4]");
    }
};

/// Grayscale with the low mask_bits of every channel cleared first:
/// gray = (77*R + 150*G + 29*B) >> 8 on the masked channels. Any modification
/// confined to those low bits leaves the result unchanged, which is what lets
/// the extractor recompute the embed-time edge map from the stego image.
inline GrayGrid masked_gray(const ImageRaster& raster, int mask_bits) {
    const std::uint8_t mask = static_cast<std::uint8_t>(0xff << mask_bits);
    GrayGrid gray(raster.width, raster.height);
    const std::size_t pixels = raster.pixel_count();
    for (std::size_t i = 0; i < pixels; ++i) {
        const int r = raster.samples[i * 3 + 0] & mask;
        const int g = raster.samples[i * 3 + 1] & mask;
        const int b = raster.samples[i * 3 + 2] & mask;
        gray.values[i] = static_cast<std::uint8_t>((77 * r + 150 * g + 29 * b) >> 8);
    }
    return gray;
}

/// 4-neighbour Laplacian, kernel [[0,1,0],[1,-4,1],[0,1,0]], replicate
/// borders. Edge iff |response| >= threshold.
inline EdgeMap laplacian_edges(const GrayGrid& gray, int threshold) {
    if (gray.width < 3 || gray.height < 3)
        raise(Errc::image_too_small, "laplacian needs at least 3x3");
    EdgeMap map(gray.width, gray.height);
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            const int response = gray.at_clamped(x - 1, y) + gray.at_clamped(x + 1, y) +
                                 gray.at_clamped(x, y - 1) + gray.at_clamped(x, y + 1) -
                                 4 * gray.at(x, y);
            map.set(x, y, std::abs(response) >= threshold);
        }
    }
    return map;
}

namespace edge_detail {

// Gaussian taps in 1/65536 units, truncated at radius ceil(3*sigma) and
// renormalized; the residual after rounding goes to the centre tap so the
// taps sum to exactly 65536. The rounded taps are part of the map contract.
inline std::vector<std::int64_t> gaussian_taps_q16(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        w[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += w[i + radius];
    }
    std::vector<std::int64_t> q(w.size());
    std::int64_t qsum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        q[i] = std::llround(w[i] / sum * 65536.0);
        qsum += q[i];
    }
    q[radius] += 65536 - qsum;
    return q;
}

} // namespace edge_detail

/// Laplacian of Gaussian: separable fixed-point Gaussian blur followed by the
/// Laplacian kernel above. All arithmetic is integer, so the map is bit-exact
/// across runs and platforms. Edge iff |response| >= threshold (gray levels).
inline EdgeMap log_edges(const GrayGrid& gray, double sigma, int threshold) {
    if (gray.width < 5 || gray.height < 5)
        raise(Errc::image_too_small, "laplacian-of-gaussian needs at least 5x5");
    const auto taps = edge_detail::gaussian_taps_q16(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = gray.width, h = gray.height;

    // Horizontal pass: units of 1/2^16. Max |value| 65536*255 fits int32.
    std::vector<std::int32_t> hpass(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = &gray.values[static_cast<std::size_t>(y) * w];
        std::int32_t* out = &hpass[static_cast<std::size_t>(y) * w];
        const int interior_end = std::max(w - radius, radius);
        int x = 0;
        for (; x < std::min(radius, w); ++x) {
            std::int64_t acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += taps[i + radius] * row[std::clamp(x + i, 0, w - 1)];
            out[x] = static_cast<std::int32_t>(acc);
        }
        for (; x < interior_end; ++x) {
            std::int64_t acc = 0;
            for (int i = -radius; i <= radius; ++i) acc += taps[i + radius] * row[x + i];
            out[x] = static_cast<std::int32_t>(acc);
        }
        for (; x < w; ++x) {
            std::int64_t acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += taps[i + radius] * row[std::clamp(x + i, 0, w - 1)];
            out[x] = static_cast<std::int32_t>(acc);
        }
    }
    // Vertical pass: units of 1/2^32, accumulated row-by-row.
    std::vector<std::int64_t> blur(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        std::int64_t* out = &blur[static_cast<std::size_t>(y) * w];
        for (int i = -radius; i <= radius; ++i) {
            const int yy = std::clamp(y + i, 0, h - 1);
            const std::int32_t* src = &hpass[static_cast<std::size_t>(yy) * w];
            const std::int64_t tap = taps[i + radius];
            for (int x = 0; x < w; ++x) out[x] += tap * src[x];
        }
    }

    const auto blur_at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return blur[static_cast<std::size_t>(y) * w + x];
    };
    const std::int64_t limit = static_cast<std::int64_t>(threshold) << 32;
    EdgeMap map(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int64_t response = blur_at(x - 1, y) + blur_at(x + 1, y) +
                                          blur_at(x, y - 1) + blur_at(x, y + 1) -
                                          4 * blur_at(x, y);
            map.set(x, y, std::abs(response) >= limit);
        }
    }
    return map;
}

/// Fuzzy detector: Sobel gradient magnitude |Gx|+|Gy| normalized by 2040 (its
/// maximum for 8-bit input), then a linear membership ramp between fuzzy_low
/// and fuzzy_high. Edge iff membership >= 0.5.
inline EdgeMap fuzzy_edges(const GrayGrid& gray, double fuzzy_low, double fuzzy_high) {
    if (gray.width < 3 || gray.height < 3)
        raise(Errc::image_too_small, "sobel needs at least 3x3");
    EdgeMap map(gray.width, gray.height);
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            const int tl = gray.at_clamped(x - 1, y - 1), tc = gray.at_clamped(x, y - 1),
                      tr = gray.at_clamped(x + 1, y - 1), ml = gray.at_clamped(x - 1, y),
                      mr = gray.at_clamped(x + 1, y), bl = gray.at_clamped(x - 1, y + 1),
                      bc = gray.at_clamped(x, y + 1), br = gray.at_clamped(x + 1, y + 1);
            const int gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
            const int gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr);
            const double m = static_cast<double>(std::abs(gx) + std::abs(gy)) / 2040.0;
            const double mu = std::clamp((m - fuzzy_low) / (fuzzy_high - fuzzy_low), 0.0, 1.0);
            map.set(x, y, mu >= 0.5);
        }
    }
    return map;
}

/// Hybrid map: per-pixel union of the three detectors, all computed on the
/// bit-masked grayscale. The union maximizes edge coverage and therefore
/// payload capacity.
inline EdgeMap hybrid_edges(const ImageRaster& raster, const EdgeParams& params) {
    if (raster.width < 5 || raster.height < 5)
        raise(Errc::image_too_small, "hybrid edge map needs at least 5x5");
    params.validate();
    const GrayGrid gray = masked_gray(raster, params.mask_bits);
    const EdgeMap lap = laplacian_edges(gray, params.laplacian_threshold);
    const EdgeMap log = log_edges(gray, params.log_sigma, params.log_threshold);
    const EdgeMap fuz = fuzzy_edges(gray, params.fuzzy_low, params.fuzzy_high);
    EdgeMap map(raster.width, raster.height);
    for (std::size_t i = 0; i < map.flags.size(); ++i)
        map.flags[i] = (lap.flags[i] | log.flags[i] | fuz.flags[i]) ? 1 : 0;
    return map;
}

} // namespace stegret
