#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "triwarp/raster.hpp"

namespace triwarp {

// Per-pixel region partition with per-region importance weights.
struct RegionLabeling {
    int width = 0;
    int height = 0;
    int region_count = 0;
    std::vector<int> labels;     // row-major, values in [0, region_count)
    std::vector<double> weights; // empty until region_weight_map fills it

    int label_at(int y, int x) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

struct SegmentationParams {
    double k = 1000.0;  // scale of observation
    double sigma = 0.5; // pre-smoothing std dev, pixels
    int min_size = 1;   // post-merge component floor, pixels
};

namespace detail {

struct PixelEdge {
    double w;
    int a, b;
    bool operator<(const PixelEdge& o) const {
        if (w != o.w) return w < o.w;
        if (a != o.a) return a < o.a;
        return b < o.b;
    }
};

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), rank_(n, 0), size_(n, 1), internal_(n, 0.0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // Joins two roots; the merging edge weight becomes the new internal
    // difference (edges are processed in ascending order).
    int join(int ra, int rb, double w) {
        if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
        parent_[rb] = ra;
        size_[ra] += size_[rb];
        internal_[ra] = w;
        if (rank_[ra] == rank_[rb]) ++rank_[ra];
        return ra;
    }
    int size(int root) const { return size_[root]; }
    double internal(int root) const { return internal_[root]; }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
    std::vector<int> size_;
    std::vector<double> internal_;
};

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

inline RasterImage gaussian_smooth(const RasterImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(k.size()) - 1) / 2;
    RasterImage tmp(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double s = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    s += k[d + radius] * img.at(y, std::clamp(x + d, 0, img.width - 1), c);
                tmp.at(y, x, c) = s;
            }
    RasterImage out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double s = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    s += k[d + radius] * tmp.at(std::clamp(y + d, 0, img.height - 1), x, c);
                out.at(y, x, c) = s;
            }
    return out;
}

inline double color_dist(const RasterImage& img, int a, int b) {
    double s = 0.0;
    for (int c = 0; c < img.channels; ++c) {
        const double d = img.data[static_cast<std::size_t>(a) * img.channels + c] -
                         img.data[static_cast<std::size_t>(b) * img.channels + c];
        s += d * d;
    }
    return std::sqrt(s);
}

// 8-connected grid edges in a fixed generation order: right, down,
// down-right, down-left from each pixel.
inline std::vector<PixelEdge> build_grid_edges(const RasterImage& img) {
    std::vector<PixelEdge> edges;
    edges.reserve(static_cast<std::size_t>(img.width) * img.height * 4);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int a = y * img.width + x;
            if (x + 1 < img.width)
                edges.push_back({color_dist(img, a, a + 1), a, a + 1});
            if (y + 1 < img.height)
                edges.push_back({color_dist(img, a, a + img.width), a, a + img.width});
            if (x + 1 < img.width && y + 1 < img.height)
                edges.push_back({color_dist(img, a, a + img.width + 1), a, a + img.width + 1});
            if (x > 0 && y + 1 < img.height)
                edges.push_back({color_dist(img, a, a + img.width - 1), a, a + img.width - 1});
        }
    return edges;
}

} // namespace detail

// Felzenszwalb-Huttenlocher graph segmentation. Labels are compacted in
// raster-scan first-appearance order; weights are left unset.
inline RegionLabeling segment_graph(const RasterImage& img, const SegmentationParams& params) {
    if (img.width < 2 || img.height < 2)
        throw std::invalid_argument("regions: image below 2x2");
    if (params.k <= 0.0 || params.sigma < 0.0 || params.min_size < 1)
        throw std::invalid_argument("regions: bad segmentation parameters");

    const RasterImage smooth = detail::gaussian_smooth(img, params.sigma);
    std::vector<detail::PixelEdge> edges = detail::build_grid_edges(smooth);
    std::sort(edges.begin(), edges.end());

    const int n = img.width * img.height;
    detail::UnionFind uf(n);
    for (const auto& e : edges) {
        const int ra = uf.find(e.a), rb = uf.find(e.b);
        if (ra == rb) continue;
        const double ta = uf.internal(ra) + params.k / uf.size(ra);
        const double tb = uf.internal(rb) + params.k / uf.size(rb);
        if (e.w <= std::min(ta, tb)) uf.join(ra, rb, e.w);
    }
    if (params.min_size > 1) {
        for (const auto& e : edges) {
            const int ra = uf.find(e.a), rb = uf.find(e.b);
            if (ra != rb && (uf.size(ra) < params.min_size || uf.size(rb) < params.min_size))
                uf.join(ra, rb, e.w);
        }
    }

    RegionLabeling out;
    out.width = img.width;
    out.height = img.height;
    out.labels.resize(n);
    std::vector<int> compact(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        const int r = uf.find(i);
        if (compact[r] < 0) compact[r] = next++;
        out.labels[i] = compact[r];
    }
    out.region_count = next;
    return out;
}

// Fills per-region weights with the mean importance over each region and
// expands them into the region-weighted map.
inline std::pair<RegionLabeling, ScalarField> region_weight_map(const RegionLabeling& seg,
                                                                const ScalarField& m) {
    if (seg.width != m.width || seg.height != m.height)
        throw std::invalid_argument("regions: importance map dimension mismatch");
    RegionLabeling out = seg;
    std::vector<double> sum(seg.region_count, 0.0);
    std::vector<long> count(seg.region_count, 0);
    for (std::size_t i = 0; i < seg.labels.size(); ++i) {
        sum[seg.labels[i]] += m.data[i];
        ++count[seg.labels[i]];
    }
    out.weights.resize(seg.region_count);
    for (int r = 0; r < seg.region_count; ++r) out.weights[r] = sum[r] / count[r];

    ScalarField mr(m.width, m.height);
    for (std::size_t i = 0; i < seg.labels.size(); ++i) mr.data[i] = out.weights[seg.labels[i]];
    return {std::move(out), std::move(mr)};
}

} // namespace triwarp
