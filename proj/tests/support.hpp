#pragma once

// Shared fixtures for the test suites: deterministic synthetic rasters,
// random records/keys, and self-cleaning temp directories. Everything is
// seeded explicitly; only raw mt19937_64 output is used so the fixtures are
// identical across standard libraries.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "stegret/stegret.hpp"

namespace testsupport {

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next() { return engine(); }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    int range(int lo, int hi) { return lo + below(hi - lo + 1); } // inclusive
    std::uint8_t byte() { return static_cast<std::uint8_t>(next() & 0xff); }
    bool chance(double p) { return unit() < p; }
    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
};

inline stegret::ImageRaster noise_raster(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    stegret::ImageRaster img(w, h);
    for (auto& s : img.samples) s = rng.byte();
    return img;
}

/// Natural-ish cover: bilinear gradient background plus a few solid
/// rectangles and discs. Smooth regions dominate; shape borders make edges.
inline stegret::ImageRaster synthetic_cover(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    stegret::ImageRaster img(w, h);
    std::uint8_t corners[4][3];
    for (auto& corner : corners)
        for (auto& c : corner) c = rng.byte();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fx = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            const double fy = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
            for (int c = 0; c < 3; ++c) {
                const double top = corners[0][c] * (1 - fx) + corners[1][c] * fx;
                const double bottom = corners[2][c] * (1 - fx) + corners[3][c] * fx;
                img.at(x, y, c) = static_cast<std::uint8_t>(top * (1 - fy) + bottom * fy);
            }
        }
    }
    const int shapes = rng.range(2, 5);
    for (int s = 0; s < shapes; ++s) {
        const std::uint8_t color[3] = {rng.byte(), rng.byte(), rng.byte()};
        const int cx = rng.below(w), cy = rng.below(h);
        const int rw = rng.range(w / 8 + 1, w / 3 + 1), rh = rng.range(h / 8 + 1, h / 3 + 1);
        const bool disc = rng.chance(0.5);
        for (int y = std::max(0, cy - rh); y < std::min(h, cy + rh); ++y)
            for (int x = std::max(0, cx - rw); x < std::min(w, cx + rw); ++x) {
                if (disc) {
                    const double dx = static_cast<double>(x - cx) / rw;
                    const double dy = static_cast<double>(y - cy) / rh;
                    if (dx * dx + dy * dy > 1.0) continue;
                }
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
            }
    }
    return img;
}

// Test-side HSV->RGB (the library only goes the other way).
inline void hsv_to_rgb(double hue, double sat, double val, std::uint8_t out[3]) {
    const double c = val * sat;
    const double hp = hue / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = val - c;
    out[0] = static_cast<std::uint8_t>((r + m) * 255.0 + 0.5);
    out[1] = static_cast<std::uint8_t>((g + m) * 255.0 + 0.5);
    out[2] = static_cast<std::uint8_t>((b + m) * 255.0 + 0.5);
}

/// Cover with one dominant hue family, for classifier fixtures: per-class
/// images cluster in HSV space however the layout varies.
inline stegret::ImageRaster hue_cover(int w, int h, double hue_deg, std::uint64_t seed) {
    Rng rng(seed);
    stegret::ImageRaster img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double val = 0.45 + 0.5 * (static_cast<double>(x + y) / (w + h));
            std::uint8_t px[3];
            hsv_to_rgb(hue_deg, 0.85, val, px);
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = px[c];
        }
    }
    const int shapes = rng.range(1, 3);
    for (int s = 0; s < shapes; ++s) {
        std::uint8_t px[3];
        hsv_to_rgb(hue_deg, 0.9, 0.35 + 0.1 * rng.unit(), px);
        const int x0 = rng.below(w / 2), y0 = rng.below(h / 2);
        const int rw = rng.range(w / 6 + 1, w / 3 + 1), rh = rng.range(h / 6 + 1, h / 3 + 1);
        for (int y = y0; y < std::min(h, y0 + rh); ++y)
            for (int x = x0; x < std::min(w, x0 + rw); ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = px[c];
    }
    return img;
}

inline std::string random_token(Rng& rng, int min_len, int max_len) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    const int len = rng.range(min_len, max_len);
    std::string s;
    for (int i = 0; i < len; ++i) s += alphabet[rng.below(36)];
    return s;
}

inline stegret::SemanticRecord random_record(Rng& rng) {
    stegret::SemanticRecord rec;
    rec.class_label = random_token(rng, 1, 12);
    const int kws = rng.below(5);
    for (int i = 0; i < kws; ++i) rec.keywords.push_back(random_token(rng, 1, 10));
    const int desc_words = rng.below(8);
    for (int i = 0; i < desc_words; ++i) {
        if (i) rec.description += ' ';
        rec.description += random_token(rng, 1, 8);
    }
    const int attrs = rng.below(3);
    for (int i = 0; i < attrs; ++i)
        rec.attributes.emplace_back(random_token(rng, 1, 6), random_token(rng, 0, 12));
    return rec;
}

inline std::string random_key(Rng& rng) { return random_token(rng, 1, 16); }

/// A stego key whose quadrant permutation provably differs from `right`'s.
inline stegret::StegoKey different_perm_key(const stegret::StegoKey& right, Rng& rng) {
    const auto target = stegret::quadrant_permutation(right);
    for (;;) {
        stegret::StegoKey candidate{random_key(rng)};
        if (candidate.passphrase != right.passphrase &&
            stegret::quadrant_permutation(candidate) != target)
            return candidate;
    }
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("stegret-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace testsupport
