#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "triwarp/raster.hpp"

namespace triwarp {

struct ImportanceParams {
    double alpha = 1.2; // texture threshold multiplier
    double beta = 1.5;  // texture blend weight
    double gamma = 2.0; // feature-line weight
};

struct LineSegment {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double length = 0;
};

namespace detail {

// 3x3 convolution with replicate border.
inline ScalarField conv3x3(const ScalarField& f, const std::array<double, 9>& k) {
    ScalarField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double s = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    s += k[(dy + 1) * 3 + (dx + 1)] *
                         f.at(std::clamp(y + dy, 0, f.height - 1),
                              std::clamp(x + dx, 0, f.width - 1));
            out.at(y, x) = s;
        }
    return out;
}

inline ScalarField abs_field(ScalarField f) {
    for (double& v : f.data) v = std::abs(v);
    return f;
}

// Intensity plus four oriented second-derivative responses.
inline std::vector<ScalarField> feature_channels(const ScalarField& lum) {
    static constexpr std::array<double, 9> kH{0, 0, 0, -1, 2, -1, 0, 0, 0};
    static constexpr std::array<double, 9> kV{0, -1, 0, 0, 2, 0, 0, -1, 0};
    static constexpr std::array<double, 9> kD1{-1, 0, 0, 0, 2, 0, 0, 0, -1};
    static constexpr std::array<double, 9> kD2{0, 0, -1, 0, 2, 0, -1, 0, 0};
    std::vector<ScalarField> ch;
    ch.reserve(5);
    ch.push_back(lum);
    for (const auto& k : {kH, kD1, kV, kD2}) ch.push_back(abs_field(conv3x3(lum, k)));
    return ch;
}

// Equilibrium distribution of the fully connected chain over the coarse grid.
// Edge weight = |f(a)-f(b)| * exp(-d^2/(2 sigma^2)) + eps; the additive eps
// keeps the chain irreducible and makes a featureless map yield the uniform
// distribution exactly.
inline std::vector<double> chain_equilibrium(const ScalarField& coarse,
                                             const std::vector<double>& kernel,
                                             double eps_d, double tol, int max_iters) {
    const int n = coarse.width * coarse.height;
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
        double row_sum = 0.0;
        for (int b = 0; b < n; ++b) {
            const double v =
                std::abs(coarse.data[a] - coarse.data[b]) * kernel[a * static_cast<std::size_t>(n) + b] +
                eps_d;
            w[a * static_cast<std::size_t>(n) + b] = v;
            row_sum += v;
        }
        const double inv = 1.0 / row_sum;
        for (int b = 0; b < n; ++b) w[a * static_cast<std::size_t>(n) + b] *= inv;
    }

    std::vector<double> pi(n, 1.0 / n), nxt(n);
    for (int it = 0; it < max_iters; ++it) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (int a = 0; a < n; ++a) {
            const double pa = pi[a];
            const double* row = &w[a * static_cast<std::size_t>(n)];
            for (int b = 0; b < n; ++b) nxt[b] += pa * row[b];
        }
        double total = 0.0;
        for (double v : nxt) total += v;
        const double inv = 1.0 / total;
        double change = 0.0;
        for (int b = 0; b < n; ++b) {
            nxt[b] *= inv;
            change += std::abs(nxt[b] - pi[b]);
        }
        pi.swap(nxt);
        if (change < tol) {
            double s = 0.0;
            for (double v : pi) s += v;
            if (std::abs(s - 1.0) > 1e-9)
                throw std::runtime_error("importance: equilibrium mass drifted");
            return pi;
        }
    }
    throw std::runtime_error("importance: saliency chain failed to converge");
}

inline std::vector<double> distance_kernel(int cw, int ch, double sigma) {
    const int n = cw * ch;
    std::vector<double> k(static_cast<std::size_t>(n) * n);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int a = 0; a < n; ++a) {
        const double ax = a % cw, ay = a / cw;
        for (int b = 0; b < n; ++b) {
            const double dx = ax - (b % cw), dy = ay - (b / cw);
            k[a * static_cast<std::size_t>(n) + b] = std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
    }
    return k;
}

} // namespace detail

// Saliency by Markov-chain equilibrium over coarse feature graphs: intensity
// and four orientation channels at two pyramid scales, each reduced to a grid
// of max dimension 32, averaged and normalized to [0,1].
inline ScalarField gbvs_saliency(const ScalarField& lum_in) {
    constexpr int kCoarseMax = 32;
    constexpr double kEps = 1e-4;
    constexpr double kTol = 1e-6;
    constexpr int kMaxIters = 10000;

    // small inputs are upsampled so the pyramid has room
    ScalarField lum = lum_in;
    const bool upscaled = std::min(lum_in.width, lum_in.height) < kCoarseMax;
    if (upscaled) {
        const double s = static_cast<double>(kCoarseMax) / std::min(lum_in.width, lum_in.height);
        lum = resample_field(lum_in, std::max(kCoarseMax, static_cast<int>(std::lround(lum_in.width * s))),
                             std::max(kCoarseMax, static_cast<int>(std::lround(lum_in.height * s))));
    }

    const int maxdim = std::max(lum.width, lum.height);
    int cw = lum.width, ch = lum.height;
    if (maxdim > kCoarseMax) {
        cw = std::max(2, static_cast<int>(std::lround(lum.width * static_cast<double>(kCoarseMax) / maxdim)));
        ch = std::max(2, static_cast<int>(std::lround(lum.height * static_cast<double>(kCoarseMax) / maxdim)));
    }
    const double sigma_g = std::max(cw, ch) / 6.0;
    const std::vector<double> kernel = detail::distance_kernel(cw, ch, sigma_g);

    const std::array<ScalarField, 2> scales{
        lum, resample_field(lum, std::max(2, lum.width / 2), std::max(2, lum.height / 2))};

    ScalarField avg(cw, ch, 0.0);
    int channels = 0;
    for (const ScalarField& s : scales) {
        for (const ScalarField& feat : detail::feature_channels(s)) {
            const ScalarField coarse = resample_field(feat, cw, ch);
            const std::vector<double> pi =
                detail::chain_equilibrium(coarse, kernel, kEps, kTol, kMaxIters);
            for (std::size_t i = 0; i < pi.size(); ++i) avg.data[i] += pi[i];
            ++channels;
        }
    }
    for (double& v : avg.data) v /= channels;

    ScalarField full = resample_field(avg, lum.width, lum.height);
    if (upscaled) full = resample_field(full, lum_in.width, lum_in.height);
    return normalize_unit(full);
}

// Suppresses fine texture: gradient energy is clamped to 0.1 wherever the L2
// gradient falls below alpha times its mean, then W = E_mod + beta * Y.
inline std::pair<ScalarField, ScalarField> texture_suppress(const ScalarField& e,
                                                            const ScalarField& y,
                                                            double alpha, double beta) {
    if (e.width != y.width || e.height != y.height)
        throw std::invalid_argument("importance: gradient field dimension mismatch");
    const double threshold = alpha * field_mean(y);
    ScalarField e_mod = e;
    for (std::size_t i = 0; i < e.data.size(); ++i)
        if (y.data[i] < threshold) e_mod.data[i] = 0.1;
    ScalarField w(e.width, e.height);
    for (std::size_t i = 0; i < e.data.size(); ++i)
        w.data[i] = e_mod.data[i] + beta * y.data[i];
    return {std::move(e_mod), std::move(w)};
}

namespace detail {

struct HoughPeak {
    int theta_bin;
    int rho_bin;
    long count;
};

inline void rasterize_segment(ScalarField& h, const LineSegment& seg) {
    int x0 = static_cast<int>(std::lround(seg.x0)), y0 = static_cast<int>(std::lround(seg.y0));
    const int x1 = static_cast<int>(std::lround(seg.x1)), y1 = static_cast<int>(std::lround(seg.y1));
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (x0 >= 0 && x0 < h.width && y0 >= 0 && y0 < h.height) h.at(y0, x0) = 1.0;
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

} // namespace detail

// Feature-line map: edge pixels are the top decile of the L2 gradient, voted
// into a 1-degree / 1-px accumulator; up to 20 peaks above 0.3 of the max are
// traced into segments (gap tolerance 5 px) and segments shorter than a tenth
// of the image diagonal are discarded. H carries 1 on the kept segments.
inline std::pair<ScalarField, std::vector<LineSegment>> hough_line_map(const ScalarField& lum) {
    if (lum.width < 8 || lum.height < 8)
        throw std::invalid_argument("importance: image below 8x8 for line detection");
    constexpr int kThetaBins = 180;
    constexpr int kMaxPeaks = 20;
    constexpr double kPeakFrac = 0.3;
    constexpr double kGapTol = 5.0;

    ScalarField h(lum.width, lum.height, 0.0);
    std::vector<LineSegment> lines;

    const ScalarField grad = gradient_energy(lum, GradientNorm::L2);
    std::vector<double> sorted = grad.data;
    std::size_t idx = static_cast<std::size_t>(0.9 * (sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + idx, sorted.end());
    const double edge_thresh = sorted[idx];

    std::vector<std::pair<int, int>> edge_pixels; // (x, y)
    for (int y = 0; y < lum.height; ++y)
        for (int x = 0; x < lum.width; ++x)
            if (grad.at(y, x) > edge_thresh) edge_pixels.emplace_back(x, y);
    if (edge_pixels.empty()) return {std::move(h), std::move(lines)};

    const double diag = std::sqrt(static_cast<double>(lum.width) * lum.width +
                                  static_cast<double>(lum.height) * lum.height);
    const int rho_max = static_cast<int>(std::ceil(diag));
    const int rho_bins = 2 * rho_max + 1;

    std::array<double, kThetaBins> cs, sn;
    for (int t = 0; t < kThetaBins; ++t) {
        const double rad = t * M_PI / 180.0;
        cs[t] = std::cos(rad);
        sn[t] = std::sin(rad);
    }
    std::vector<long> acc(static_cast<std::size_t>(kThetaBins) * rho_bins, 0);
    for (const auto& [x, y] : edge_pixels)
        for (int t = 0; t < kThetaBins; ++t) {
            const int r = static_cast<int>(std::lround(x * cs[t] + y * sn[t])) + rho_max;
            ++acc[static_cast<std::size_t>(t) * rho_bins + r];
        }
    const long max_count = *std::max_element(acc.begin(), acc.end());
    if (max_count <= 0) return {std::move(h), std::move(lines)};
    const double count_floor = kPeakFrac * max_count;

    auto suppress = [&](int tb, int rb) {
        for (int dt = -3; dt <= 3; ++dt)
            for (int dr = -5; dr <= 5; ++dr) {
                int t = tb + dt, r = rb + dr;
                if (t < 0) {
                    t += kThetaBins;
                    r = 2 * rho_max - r; // theta wraps with rho sign flip
                } else if (t >= kThetaBins) {
                    t -= kThetaBins;
                    r = 2 * rho_max - r;
                }
                if (r >= 0 && r < rho_bins) acc[static_cast<std::size_t>(t) * rho_bins + r] = 0;
            }
    };

    for (int peak = 0; peak < kMaxPeaks; ++peak) {
        const auto it = std::max_element(acc.begin(), acc.end());
        const long count = *it;
        if (count <= 0 || static_cast<double>(count) < count_floor) break;
        const int flat = static_cast<int>(it - acc.begin());
        const int tb = flat / rho_bins, rb = flat % rho_bins;
        const double rho = rb - rho_max;

        // pixels voting into this bin, ordered along the line direction
        std::vector<std::pair<double, int>> along; // (projection, pixel index)
        for (std::size_t i = 0; i < edge_pixels.size(); ++i) {
            const auto& [x, y] = edge_pixels[i];
            if (std::abs(x * cs[tb] + y * sn[tb] - rho) <= 0.5)
                along.emplace_back(-x * sn[tb] + y * cs[tb], static_cast<int>(i));
        }
        std::sort(along.begin(), along.end());
        std::size_t run_start = 0;
        for (std::size_t i = 1; i <= along.size(); ++i) {
            if (i == along.size() || along[i].first - along[i - 1].first > kGapTol) {
                const auto& [px0, py0] = edge_pixels[along[run_start].second];
                const auto& [px1, py1] = edge_pixels[along[i - 1].second];
                LineSegment seg{static_cast<double>(px0), static_cast<double>(py0),
                                static_cast<double>(px1), static_cast<double>(py1), 0.0};
                seg.length = std::hypot(seg.x1 - seg.x0, seg.y1 - seg.y0);
                if (seg.length >= diag / 10.0) {
                    detail::rasterize_segment(h, seg);
                    lines.push_back(seg);
                }
                run_start = i;
            }
        }
        suppress(tb, rb);
    }
    return {std::move(h), std::move(lines)};
}

// M = unit( unit(G) * unit(E) + unit(W) + gamma * unit(H) ), elementwise.
inline ScalarField combine_importance(const ScalarField& g, const ScalarField& e_mod,
                                      const ScalarField& w, const ScalarField& h,
                                      double gamma) {
    if (g.width != e_mod.width || g.height != e_mod.height || g.width != w.width ||
        g.height != w.height || g.width != h.width || g.height != h.height)
        throw std::invalid_argument("importance: combination dimension mismatch");
    const ScalarField ng = normalize_unit(g), ne = normalize_unit(e_mod),
                      nw = normalize_unit(w), nh = normalize_unit(h);
    ScalarField m(g.width, g.height);
    for (std::size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = ng.data[i] * ne.data[i] + nw.data[i] + gamma * nh.data[i];
    return normalize_unit(m);
}

} // namespace triwarp
