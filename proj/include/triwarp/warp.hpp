#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "triwarp/geometry.hpp"
#include "triwarp/mesh.hpp"
#include "triwarp/raster.hpp"

namespace triwarp {

// Destination-to-source affine map: (x, y, 1) -> source (x, y).
struct AffineMap {
    double m[6] = {1, 0, 0, 0, 1, 0};

    Vec2 apply(const Vec2& p) const {
        return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
    }
};

// The unique affine map taking the dst vertex triple onto the src triple.
inline AffineMap affine_from_triangles(const Vec2 dst[3], const Vec2 src[3]) {
    const double det = signed_area2(dst[0], dst[1], dst[2]);
    if (det == 0.0) throw std::runtime_error("warp: degenerate destination triangle");
    const double inv = 1.0 / det;
    // inverse of [[x0 x1 x2],[y0 y1 y2],[1 1 1]] times the source rows
    const double i00 = (dst[1].y - dst[2].y) * inv, i01 = (dst[2].x - dst[1].x) * inv;
    const double i02 = (dst[1].x * dst[2].y - dst[2].x * dst[1].y) * inv;
    const double i10 = (dst[2].y - dst[0].y) * inv, i11 = (dst[0].x - dst[2].x) * inv;
    const double i12 = (dst[2].x * dst[0].y - dst[0].x * dst[2].y) * inv;
    const double i20 = (dst[0].y - dst[1].y) * inv, i21 = (dst[1].x - dst[0].x) * inv;
    const double i22 = (dst[0].x * dst[1].y - dst[1].x * dst[0].y) * inv;

    AffineMap a;
    a.m[0] = src[0].x * i00 + src[1].x * i10 + src[2].x * i20;
    a.m[1] = src[0].x * i01 + src[1].x * i11 + src[2].x * i21;
    a.m[2] = src[0].x * i02 + src[1].x * i12 + src[2].x * i22;
    a.m[3] = src[0].y * i00 + src[1].y * i10 + src[2].y * i20;
    a.m[4] = src[0].y * i01 + src[1].y * i11 + src[2].y * i21;
    a.m[5] = src[0].y * i02 + src[1].y * i12 + src[2].y * i22;
    return a;
}

// Renders the retargeted image: each deformed triangle is rasterized with an
// inclusive pixel-center test and sampled from the source through its inverse
// affine map; triangles later in index order overwrite shared-edge pixels.
// Pixels no triangle reaches are filled from the nearest covered neighbor.
inline RasterImage warp_render(const RasterImage& src, const TriMesh& mesh,
                               const std::vector<Vec2>& c_prime, int target_w, int target_h) {
    if (target_w < 2 || target_h < 2) throw std::invalid_argument("warp: target below 2x2");
    if (c_prime.size() != mesh.vertices.size())
        throw std::invalid_argument("warp: vertex count mismatch");
    for (const Triangle& t : mesh.triangles) {
        const double a0 = signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
        const double a1 = signed_area2(c_prime[t.a], c_prime[t.b], c_prime[t.c]);
        if (a0 * a1 <= 0.0) throw std::runtime_error("warp: flipped triangle in deformed mesh");
    }

    RasterImage out(target_w, target_h, src.channels);
    std::vector<char> covered(static_cast<std::size_t>(target_w) * target_h, 0);

    for (const Triangle& t : mesh.triangles) {
        const Vec2 dst[3] = {c_prime[t.a], c_prime[t.b], c_prime[t.c]};
        const Vec2 orig[3] = {mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]};
        const AffineMap map = affine_from_triangles(dst, orig);
        const double denom_inv = 1.0 / signed_area2(dst[0], dst[1], dst[2]);

        const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({dst[0].x, dst[1].x, dst[2].x}) - 0.5)));
        const int x_hi = std::min(target_w - 1, static_cast<int>(std::ceil(std::max({dst[0].x, dst[1].x, dst[2].x}))));
        const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({dst[0].y, dst[1].y, dst[2].y}) - 0.5)));
        const int y_hi = std::min(target_h - 1, static_cast<int>(std::ceil(std::max({dst[0].y, dst[1].y, dst[2].y}))));

        for (int py = y_lo; py <= y_hi; ++py)
            for (int px = x_lo; px <= x_hi; ++px) {
                const Vec2 p{px + 0.5, py + 0.5};
                if (!detail::barycentric_inside(p, dst[0], dst[1], dst[2], denom_inv)) continue;
                const Vec2 s = map.apply(p);
                // continuous corner-origin coords to center-based sample coords
                for (int c = 0; c < src.channels; ++c)
                    out.at(py, px, c) = sample_bilinear(src, s.x - 0.5, s.y - 0.5, c);
                covered[static_cast<std::size_t>(py) * target_w + px] = 1;
            }
    }

    // breadth-first fill from covered pixels for any numerically missed ones
    std::deque<std::pair<int, int>> frontier;
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            if (covered[static_cast<std::size_t>(y) * target_w + x]) frontier.emplace_back(x, y);
    if (frontier.empty()) throw std::runtime_error("warp: no pixel covered by any triangle");
    while (!frontier.empty()) {
        const auto [x, y] = frontier.front();
        frontier.pop_front();
        static constexpr int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k], ny = y + dy[k];
            if (nx < 0 || nx >= target_w || ny < 0 || ny >= target_h) continue;
            char& flag = covered[static_cast<std::size_t>(ny) * target_w + nx];
            if (flag) continue;
            for (int c = 0; c < src.channels; ++c) out.at(ny, nx, c) = out.at(y, x, c);
            flag = 1;
            frontier.emplace_back(nx, ny);
        }
    }
    return out;
}

namespace detail {

inline void draw_line(RasterImage& img, int x0, int y0, int x1, int y1, double r, double g,
                      double b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (x0 >= 0 && x0 < img.width && y0 >= 0 && y0 < img.height) {
            img.at(y0, x0, 0) = r;
            img.at(y0, x0, 1) = g;
            img.at(y0, x0, 2) = b;
        }
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

inline RasterImage to_rgb(const RasterImage& img) {
    if (img.channels == 3) return img;
    RasterImage out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, 0);
    return out;
}

} // namespace detail

// Draws every mesh edge one pixel wide in a fixed highlight color on a copy
// of the image. Grayscale inputs are promoted to RGB.
inline RasterImage mesh_overlay(const RasterImage& img, const std::vector<Vec2>& vertices,
                                const std::vector<Triangle>& triangles) {
    RasterImage out = detail::to_rgb(img);
    std::vector<std::pair<int, int>> seen;
    for (const Triangle& t : triangles)
        for (int k = 0; k < 3; ++k) {
            const int u = std::min(t[k], t[(k + 1) % 3]);
            const int v = std::max(t[k], t[(k + 1) % 3]);
            seen.emplace_back(u, v);
        }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto& [u, v] : seen) {
        const int x0 = static_cast<int>(std::lround(vertices[u].x));
        const int y0 = static_cast<int>(std::lround(vertices[u].y));
        const int x1 = static_cast<int>(std::lround(vertices[v].x));
        const int y1 = static_cast<int>(std::lround(vertices[v].y));
        detail::draw_line(out, std::clamp(x0, 0, out.width - 1), std::clamp(y0, 0, out.height - 1),
                          std::clamp(x1, 0, out.width - 1), std::clamp(y1, 0, out.height - 1),
                          0.15, 1.0, 0.2);
    }
    return out;
}

} // namespace triwarp
