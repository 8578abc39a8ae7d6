#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stegret/edges.hpp"
#include "stegret/error.hpp"
#include "stegret/image.hpp"

namespace stegret {

struct QualityReport {
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

/// Mean squared error over all 3*M*N samples (color convention: the three
/// channels are averaged together).
inline double mse(const ImageRaster& c, const ImageRaster& s) {
    if (!c.same_dimensions(s))
        raise(Errc::dimension_mismatch, "mse needs identically sized rasters");
    double sum = 0.0;
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const double d = static_cast<double>(c.samples[i]) - static_cast<double>(s.samples[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(c.samples.size());
}

/// 10*log10(255^2 / mse) in decibels; identical images give +infinity.
inline double psnr(const ImageRaster& c, const ImageRaster& s) {
    const double e = mse(c, s);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

namespace metrics_detail {

// 11x11 Gaussian window, sigma 1.5, normalized to sum 1 (the canonical
// mean-SSIM windowing).
inline const std::vector<double>& ssim_window() {
    static const std::vector<double> window = [] {
        std::vector<double> w(11 * 11);
        double sum = 0.0;
        for (int dy = -5; dy <= 5; ++dy)
            for (int dx = -5; dx <= 5; ++dx) {
                const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
                w[(dy + 5) * 11 + (dx + 5)] = v;
                sum += v;
            }
        for (double& v : w) v /= sum;
        return w;
    }();
    return window;
}

} // namespace metrics_detail

/// Mean structural similarity over all 11x11 windows (stride 1, no padding)
/// of the two grayscales, with C1 = (0.01*255)^2 and C2 = (0.03*255)^2.
/// Grayscale is the library-wide (77R + 150G + 29B) >> 8 conversion.
inline double ssim(const ImageRaster& c, const ImageRaster& s) {
    if (!c.same_dimensions(s))
        raise(Errc::dimension_mismatch, "ssim needs identically sized rasters");
    if (c.width < 11 || c.height < 11)
        raise(Errc::image_too_small, "ssim needs at least 11x11");

    const GrayGrid gx = masked_gray(c, 0);
    const GrayGrid gy = masked_gray(s, 0);
    const auto& window = metrics_detail::ssim_window();
    constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double total = 0.0;
    std::size_t windows = 0;
    for (int y0 = 0; y0 + 11 <= c.height; ++y0) {
        for (int x0 = 0; x0 + 11 <= c.width; ++x0) {
            double mu_x = 0.0, mu_y = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int dy = 0; dy < 11; ++dy) {
                for (int dx = 0; dx < 11; ++dx) {
                    const double w = window[dy * 11 + dx];
                    const double a = gx.at(x0 + dx, y0 + dy);
                    const double b = gy.at(x0 + dx, y0 + dy);
                    mu_x += w * a;
                    mu_y += w * b;
                    // one grouping for all three second moments: keeps
                    // ssim(x,x) == 1 and ssim(a,b) == ssim(b,a) bit-exact
                    xx += w * (a * a);
                    yy += w * (b * b);
                    xy += w * (a * b);
                }
            }
            const double var_x = xx - mu_x * mu_x;
            const double var_y = yy - mu_y * mu_y;
            const double cov = xy - mu_x * mu_y;
            total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                     ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

inline QualityReport quality_report(const ImageRaster& c, const ImageRaster& s) {
    return QualityReport{mse(c, s), psnr(c, s), ssim(c, s)};
}

} // namespace stegret
