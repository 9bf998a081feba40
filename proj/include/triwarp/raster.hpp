#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace triwarp {

// Multi-channel pixel grid, row-major, channel-interleaved, values in [0,1].
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        if (w < 1 || h < 1 || (c != 1 && c != 3))
            throw std::invalid_argument("raster: bad image dimensions");
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Single-channel real-valued grid, row-major.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ScalarField() = default;
    ScalarField(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("raster: bad field dimensions");
    }

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

enum class GradientNorm { L1, L2 };

inline ScalarField to_luminance(const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("raster: luminance needs 1 or 3 channels");
    ScalarField out(img.width, img.height);
    if (img.channels == 1) {
        out.data = img.data;
        return out;
    }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                           0.114 * img.at(y, x, 2);
    return out;
}

// Forward differences, zero at the far border.
inline ScalarField gradient_energy(const ScalarField& f, GradientNorm nrm) {
    if (f.width < 2 || f.height < 2)
        throw std::invalid_argument("raster: gradient needs at least 2x2");
    ScalarField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            const double gx = (x + 1 < f.width) ? f.at(y, x + 1) - f.at(y, x) : 0.0;
            const double gy = (y + 1 < f.height) ? f.at(y + 1, x) - f.at(y, x) : 0.0;
            out.at(y, x) = (nrm == GradientNorm::L1) ? std::abs(gx) + std::abs(gy)
                                                     : std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

// Rescale to [0,1]; a constant field maps to all zeros.
inline ScalarField normalize_unit(const ScalarField& f) {
    if (f.data.empty()) throw std::invalid_argument("raster: normalize of empty field");
    const auto [mn_it, mx_it] = std::minmax_element(f.data.begin(), f.data.end());
    const double mn = *mn_it, mx = *mx_it;
    ScalarField out(f.width, f.height);
    if (mx == mn) return out;
    const double inv = 1.0 / (mx - mn);
    for (std::size_t i = 0; i < f.data.size(); ++i) out.data[i] = (f.data[i] - mn) * inv;
    return out;
}

namespace detail {

// Bilinear sample at a continuous position in pixel-index space (0 = first
// pixel center), clamped to the grid.
inline double bilerp(const double* row0, const double* row1, int x0, int x1,
                     int stride, double fx, double fy) {
    const double a = row0[x0 * stride] * (1.0 - fx) + row0[x1 * stride] * fx;
    const double b = row1[x0 * stride] * (1.0 - fx) + row1[x1 * stride] * fx;
    return a * (1.0 - fy) + b * fy;
}

inline void sample_prep(double u, int n, int& i0, int& i1, double& f) {
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<int>(u);
    i1 = std::min(i0 + 1, n - 1);
    f = u - i0;
}

} // namespace detail

// Sample one channel at continuous center-based coordinates (u, v).
inline double sample_bilinear(const RasterImage& img, double u, double v, int c) {
    int x0, x1, y0, y1;
    double fx, fy;
    detail::sample_prep(u, img.width, x0, x1, fx);
    detail::sample_prep(v, img.height, y0, y1, fy);
    const double* r0 = &img.data[(static_cast<std::size_t>(y0) * img.width) * img.channels + c];
    const double* r1 = &img.data[(static_cast<std::size_t>(y1) * img.width) * img.channels + c];
    return detail::bilerp(r0, r1, x0, x1, img.channels, fx, fy);
}

inline double sample_bilinear(const ScalarField& f, double u, double v) {
    int x0, x1, y0, y1;
    double fx, fy;
    detail::sample_prep(u, f.width, x0, x1, fx);
    detail::sample_prep(v, f.height, y0, y1, fy);
    const double* r0 = &f.data[static_cast<std::size_t>(y0) * f.width];
    const double* r1 = &f.data[static_cast<std::size_t>(y1) * f.width];
    return detail::bilerp(r0, r1, x0, x1, 1, fx, fy);
}

// Destination pixel centers map to source as (dst + 0.5) * scale - 0.5.
inline RasterImage resample_bilinear(const RasterImage& img, int w, int h) {
    if (w < 2 || h < 2)
        throw std::invalid_argument("raster: resample target below 2x2");
    RasterImage out(w, h, img.channels);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        const double v = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) * sx - 0.5;
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = sample_bilinear(img, u, v, c);
        }
    }
    return out;
}

inline ScalarField resample_field(const ScalarField& f, int w, int h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("raster: resample target below 1x1");
    ScalarField out(w, h);
    const double sx = static_cast<double>(f.width) / w;
    const double sy = static_cast<double>(f.height) / h;
    for (int y = 0; y < h; ++y) {
        const double v = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < w; ++x)
            out.at(y, x) = sample_bilinear(f, (x + 0.5) * sx - 0.5, v);
    }
    return out;
}

inline ScalarField transpose(const ScalarField& f) {
    ScalarField out(f.height, f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(x, y) = f.at(y, x);
    return out;
}

inline RasterImage transpose(const RasterImage& img) {
    RasterImage out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(y, x, c);
    return out;
}

inline double field_mean(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.data) s += v;
    return s / static_cast<double>(f.data.size());
}

} // namespace triwarp
