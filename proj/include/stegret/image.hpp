#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "stegret/error.hpp"

namespace stegret {

/// 8-bit RGB raster, row-major, channel order R,G,B per pixel.
/// samples.size() == width * height * 3. Immutable by convention once built;
/// all pipeline stages copy instead of mutating shared rasters.
struct ImageRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> samples;

    ImageRaster() = default;
    ImageRaster(int w, int h)
        : width(w), height(h), samples(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t sample_count() const { return pixel_count() * 3; }

    std::uint8_t& at(int x, int y, int channel) {
        return samples[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
    }
    std::uint8_t at(int x, int y, int channel) const {
        return samples[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
    }

    bool same_dimensions(const ImageRaster& other) const {
        return width == other.width && height == other.height;
    }
};

/// Axis-aligned pixel rectangle, half-open in neither direction:
/// covers columns [x0, x0+w) and rows [y0, y0+h).
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;
};

/// The four quadrants of a raster. Index order: 0 = top-left, 1 = top-right,
/// 2 = bottom-left, 3 = bottom-right. Split lines at floor(width/2) and
/// floor(height/2); right/bottom quadrants absorb any odd row/column.
struct QuadrantGeometry {
    std::array<Rect, 4> rects;
};

inline QuadrantGeometry quadrants(const ImageRaster& raster) {
    if (raster.width < 2 || raster.height < 2)
        raise(Errc::image_too_small, "quadrant split needs at least a 2x2 raster");
    const int xs = raster.width / 2;
    const int ys = raster.height / 2;
    QuadrantGeometry geo;
    geo.rects[0] = Rect{0, 0, xs, ys};
    geo.rects[1] = Rect{xs, 0, raster.width - xs, ys};
    geo.rects[2] = Rect{0, ys, xs, raster.height - ys};
    geo.rects[3] = Rect{xs, ys, raster.width - xs, raster.height - ys};
    return geo;
}

} // namespace stegret
