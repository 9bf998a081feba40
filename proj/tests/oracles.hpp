#pragma once

// Independent reference computations the implementation is checked against.
// Everything here is deliberately written the slow, obvious way and shares no
// code with the library paths it verifies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "triwarp/raster.hpp"

namespace oracles {

// Minimum total energy over every 8-connected top-to-bottom seam, by
// exhaustive enumeration.
inline double brute_min_backward_cost(const triwarp::ScalarField& e) {
    double best = std::numeric_limits<double>::max();
    std::vector<int> path(e.height);
    const auto recurse = [&](auto&& self, int row, int col, double acc) -> void {
        acc += e.at(row, col);
        if (row == e.height - 1) {
            best = std::min(best, acc);
            return;
        }
        for (int d = -1; d <= 1; ++d) {
            const int nc = col + d;
            if (nc >= 0 && nc < e.width) self(self, row + 1, nc, acc);
        }
    };
    for (int c = 0; c < e.width; ++c) recurse(recurse, 0, c, 0.0);
    return best;
}

// Forward-energy seam cost evaluated case by case along every path: the cost
// of arriving at (row, col) depends on the move that got there, charging the
// new edges created by the removal. Out-of-range differences count zero.
inline double brute_min_forward_cost(const triwarp::ScalarField& lum,
                                     const triwarp::ScalarField& p) {
    const int w = lum.width, h = lum.height;
    auto lum_at = [&](int y, int x) { return lum.at(y, x); };
    auto arrive_cost = [&](int y, int x, int move) {
        // move: -1 from upper-left, 0 straight, +1 from upper-right
        const bool has_l = x > 0, has_r = x + 1 < w;
        const double lr = (has_l && has_r) ? std::abs(lum_at(y, x + 1) - lum_at(y, x - 1)) : 0.0;
        if (move == 0) return lr;
        if (move == -1) return lr + (has_l ? std::abs(lum_at(y - 1, x) - lum_at(y, x - 1)) : 0.0);
        return lr + (has_r ? std::abs(lum_at(y - 1, x) - lum_at(y, x + 1)) : 0.0);
    };
    double best = std::numeric_limits<double>::max();
    const auto recurse = [&](auto&& self, int row, int col, double acc) -> void {
        if (row == h - 1) {
            best = std::min(best, acc);
            return;
        }
        for (int d = -1; d <= 1; ++d) {
            const int nc = col + d;
            if (nc < 0 || nc >= w) continue;
            self(self, row + 1, nc, acc + p.at(row + 1, nc) + arrive_cost(row + 1, nc, -d));
        }
    };
    for (int c = 0; c < w; ++c) recurse(recurse, 0, c, p.at(0, c));
    return best;
}

// Straight replay of the graph-merge predicate with naive bookkeeping:
// components are kept as explicit pixel lists, sizes and internal differences
// tracked directly. Returns per-pixel component representatives.
inline std::vector<int> fh_partition_oracle(const triwarp::RasterImage& img, double k,
                                            int min_size) {
    const int n = img.width * img.height;
    struct Edge {
        double w;
        int a, b;
    };
    std::vector<Edge> edges;
    auto dist = [&](int a, int b) {
        double s = 0;
        for (int c = 0; c < img.channels; ++c) {
            const double d = img.data[static_cast<std::size_t>(a) * img.channels + c] -
                             img.data[static_cast<std::size_t>(b) * img.channels + c];
            s += d * d;
        }
        return std::sqrt(s);
    };
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int a = y * img.width + x;
            if (x + 1 < img.width) edges.push_back({dist(a, a + 1), a, a + 1});
            if (y + 1 < img.height) edges.push_back({dist(a, a + img.width), a, a + img.width});
            if (x + 1 < img.width && y + 1 < img.height)
                edges.push_back({dist(a, a + img.width + 1), a, a + img.width + 1});
            if (x > 0 && y + 1 < img.height)
                edges.push_back({dist(a, a + img.width - 1), a, a + img.width - 1});
        }
    std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
        if (l.w != r.w) return l.w < r.w;
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });

    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    std::vector<double> internal(n, 0.0);
    std::vector<int> size(n, 1);
    auto merge = [&](int ca, int cb, double w) {
        for (int i = 0; i < n; ++i)
            if (comp[i] == cb) comp[i] = ca;
        size[ca] += size[cb];
        internal[ca] = w;
    };
    for (const Edge& e : edges) {
        const int ca = comp[e.a], cb = comp[e.b];
        if (ca == cb) continue;
        if (e.w <= std::min(internal[ca] + k / size[ca], internal[cb] + k / size[cb]))
            merge(ca, cb, e.w);
    }
    if (min_size > 1)
        for (const Edge& e : edges) {
            const int ca = comp[e.a], cb = comp[e.b];
            if (ca != cb && (size[ca] < min_size || size[cb] < min_size)) merge(ca, cb, e.w);
        }
    return comp;
}

// Partition equality irrespective of label values.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::pair<int, int>> fwd, rev;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::pair<int, int> p{a[i], b[i]};
        auto it = std::lower_bound(fwd.begin(), fwd.end(), std::pair<int, int>{p.first, -1});
        if (it != fwd.end() && it->first == p.first) {
            if (it->second != p.second) return false;
        } else {
            fwd.insert(it, p);
        }
        std::pair<int, int> q{b[i], a[i]};
        auto jt = std::lower_bound(rev.begin(), rev.end(), std::pair<int, int>{q.first, -1});
        if (jt != rev.end() && jt->first == q.first) {
            if (jt->second != q.second) return false;
        } else {
            rev.insert(jt, q);
        }
    }
    return true;
}

} // namespace oracles
