#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "triwarp/geometry.hpp"
#include "triwarp/raster.hpp"
#include "triwarp/regions.hpp"

namespace triwarp {

enum class BoundaryTag : std::uint8_t {
    Interior,
    Left,
    Right,
    Top,
    Bottom,
    CornerTL,
    CornerTR,
    CornerBL,
    CornerBR
};

inline bool on_left(BoundaryTag t) {
    return t == BoundaryTag::Left || t == BoundaryTag::CornerTL || t == BoundaryTag::CornerBL;
}
inline bool on_right(BoundaryTag t) {
    return t == BoundaryTag::Right || t == BoundaryTag::CornerTR || t == BoundaryTag::CornerBR;
}
inline bool on_top(BoundaryTag t) {
    return t == BoundaryTag::Top || t == BoundaryTag::CornerTL || t == BoundaryTag::CornerTR;
}
inline bool on_bottom(BoundaryTag t) {
    return t == BoundaryTag::Bottom || t == BoundaryTag::CornerBL || t == BoundaryTag::CornerBR;
}

struct Triangle {
    int a, b, c;
    int operator[](int i) const { return i == 0 ? a : (i == 1 ? b : c); }
};

// Triangular mesh over the image rectangle [0,w] x [0,h]. Triangles are
// positively oriented; edges are deduplicated undirected index pairs.
struct TriMesh {
    double width = 0, height = 0;
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<std::pair<int, int>> edges;
    std::vector<BoundaryTag> boundary_tags;
};

namespace detail {

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
// The threshold scales with the fourth power of the local edge length so
// exactly cocircular lattice quads never register as violations.
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const Vec2 pa = a - d, pb = b - d, pc = c - d;
    const double na = norm2(pa), nb = norm2(pb), nc = norm2(pc);
    return na * cross(pb, pc) + nb * cross(pc, pa) + nc * cross(pa, pb);
}

inline bool incircle_violated(const std::vector<Vec2>& v, const Triangle& t, int d) {
    const double det = incircle(v[t.a], v[t.b], v[t.c], v[d]);
    const double scale = norm2(v[t.a] - v[d]) + norm2(v[t.b] - v[d]) + norm2(v[t.c] - v[d]);
    return det > 1e-10 * scale * scale;
}

struct SharedEdge {
    int u, v;   // u < v
    int t0, t1; // adjacent triangles, t1 = -1 on the hull
};

inline std::vector<SharedEdge> collect_edges(const std::vector<Triangle>& tris) {
    std::vector<std::array<int, 3>> keyed; // (u, v, tri)
    keyed.reserve(tris.size() * 3);
    for (int ti = 0; ti < static_cast<int>(tris.size()); ++ti) {
        const Triangle& t = tris[ti];
        for (int k = 0; k < 3; ++k) {
            const int u = t[k], v = t[(k + 1) % 3];
            keyed.push_back({std::min(u, v), std::max(u, v), ti});
        }
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<SharedEdge> out;
    out.reserve(keyed.size());
    for (std::size_t i = 0; i < keyed.size();) {
        SharedEdge e{keyed[i][0], keyed[i][1], keyed[i][2], -1};
        if (i + 1 < keyed.size() && keyed[i + 1][0] == e.u && keyed[i + 1][1] == e.v) {
            e.t1 = keyed[i + 1][2];
            i += 2;
        } else {
            ++i;
        }
        out.push_back(e);
    }
    return out;
}

inline int opposite_vertex(const Triangle& t, int u, int v) {
    for (int k = 0; k < 3; ++k)
        if (t[k] != u && t[k] != v) return t[k];
    return -1;
}

inline Triangle oriented(const std::vector<Vec2>& verts, int a, int b, int c) {
    if (signed_area2(verts[a], verts[b], verts[c]) < 0) std::swap(b, c);
    return {a, b, c};
}

// Lawson flips until the empty-circumcircle condition holds on every interior
// edge. Returns false if the flip budget runs out (degenerate geometry).
inline bool flip_to_delaunay(const std::vector<Vec2>& verts, std::vector<Triangle>& tris) {
    constexpr double kAreaEps = 1e-9;
    long budget = static_cast<long>(tris.size()) * 50 + 1000;
    for (;;) {
        bool flipped = false;
        for (const SharedEdge& e : collect_edges(tris)) {
            if (e.t1 < 0) continue;
            Triangle& t0 = tris[e.t0];
            Triangle& t1 = tris[e.t1];
            const int p = opposite_vertex(t0, e.u, e.v);
            const int q = opposite_vertex(t1, e.u, e.v);
            if (!incircle_violated(verts, t0, q) && !incircle_violated(verts, t1, p)) continue;
            const Triangle n0 = oriented(verts, e.u, p, q);
            const Triangle n1 = oriented(verts, e.v, p, q);
            if (signed_area2(verts[n0.a], verts[n0.b], verts[n0.c]) <= kAreaEps ||
                signed_area2(verts[n1.a], verts[n1.b], verts[n1.c]) <= kAreaEps)
                continue; // non-convex quad, flip would invert
            t0 = n0;
            t1 = n1;
            flipped = true;
            if (--budget < 0) return false;
            break; // adjacency is stale, rescan
        }
        if (!flipped) return true;
    }
}

inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

} // namespace detail

// Jittered uniform Delaunay mesh. Lattice points divide each axis evenly at
// roughly the requested spacing; interior points get a seeded uniform offset
// up to jitter*spacing per axis, border points slide only along their border,
// corners stay fixed. Degenerate results retry with the jitter halved.
inline TriMesh build_tri_mesh(int width, int height, double spacing, double jitter,
                              std::uint64_t seed) {
    if (spacing < 4.0) throw std::invalid_argument("mesh: spacing below 4 px");
    if (jitter < 0.0 || jitter > 0.3) throw std::invalid_argument("mesh: jitter out of [0, 0.3]");
    if (width < 2 * spacing || height < 2 * spacing)
        throw std::invalid_argument("mesh: image too small for spacing");

    const int nx = std::max(2, static_cast<int>(std::lround(width / spacing)));
    const int ny = std::max(2, static_cast<int>(std::lround(height / spacing)));
    const double dx = static_cast<double>(width) / nx;
    const double dy = static_cast<double>(height) / ny;

    double level = jitter;
    for (int attempt = 0; attempt < 4; ++attempt, level *= 0.5) {
        std::mt19937_64 gen(seed);
        auto offset = [&] { return (2.0 * detail::uniform_unit(gen) - 1.0) * level * spacing; };

        TriMesh mesh;
        mesh.width = width;
        mesh.height = height;
        mesh.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
        mesh.boundary_tags.reserve(mesh.vertices.capacity());
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                Vec2 p{i * dx, j * dy};
                if (i == nx) p.x = width;
                if (j == ny) p.y = height;
                const bool lx = (i == 0), rx = (i == nx), ty = (j == 0), by = (j == ny);
                BoundaryTag tag = BoundaryTag::Interior;
                if (lx && ty) tag = BoundaryTag::CornerTL;
                else if (rx && ty) tag = BoundaryTag::CornerTR;
                else if (lx && by) tag = BoundaryTag::CornerBL;
                else if (rx && by) tag = BoundaryTag::CornerBR;
                else if (lx) tag = BoundaryTag::Left;
                else if (rx) tag = BoundaryTag::Right;
                else if (ty) tag = BoundaryTag::Top;
                else if (by) tag = BoundaryTag::Bottom;

                if (tag == BoundaryTag::Interior) {
                    p.x += offset();
                    p.y += offset();
                } else if (tag == BoundaryTag::Top || tag == BoundaryTag::Bottom) {
                    p.x += offset();
                } else if (tag == BoundaryTag::Left || tag == BoundaryTag::Right) {
                    p.y += offset();
                }
                mesh.vertices.push_back(p);
                mesh.boundary_tags.push_back(tag);
            }

        mesh.triangles.reserve(static_cast<std::size_t>(nx) * ny * 2);
        auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                mesh.triangles.push_back(
                    detail::oriented(mesh.vertices, vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)));
                mesh.triangles.push_back(
                    detail::oriented(mesh.vertices, vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)));
            }

        if (!detail::flip_to_delaunay(mesh.vertices, mesh.triangles)) continue;

        double total = 0.0;
        double min_area = std::numeric_limits<double>::max();
        for (const Triangle& t : mesh.triangles) {
            const double a2 =
                signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
            total += 0.5 * a2;
            min_area = std::min(min_area, 0.5 * std::abs(a2));
        }
        const double expect = static_cast<double>(width) * height;
        if (min_area <= 1e-9 || std::abs(total - expect) > 1e-6 * expect) continue;

        for (const detail::SharedEdge& e : detail::collect_edges(mesh.triangles))
            mesh.edges.emplace_back(e.u, e.v);
        return mesh;
    }
    throw std::runtime_error("mesh: degenerate triangulation after jitter retries");
}

// Line-oriented dump: "v x y" records then 1-based "f i j k" records.
inline void dump_mesh(std::ostream& os, const std::vector<Vec2>& vertices,
                      const std::vector<Triangle>& triangles) {
    os.setf(std::ios::fixed);
    const auto old_precision = os.precision(6);
    for (const Vec2& v : vertices) os << "v " << v.x << " " << v.y << "\n";
    for (const Triangle& t : triangles)
        os << "f " << t.a + 1 << " " << t.b + 1 << " " << t.c + 1 << "\n";
    os.precision(old_precision);
    os.unsetf(std::ios::fixed);
}

// Per-triangle classification: region membership, feature status, weight.
struct TriangleClasses {
    std::vector<int> region_of;
    std::vector<char> feature;
    std::vector<double> tri_weight;
    std::vector<std::vector<int>> region_triangles; // triangle ids per region
};

namespace detail {

// Inclusive pixel-center-in-triangle test shared with the renderer.
inline bool barycentric_inside(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c,
                               double denom_inv, double eps = 1e-9) {
    const double l0 = signed_area2(p, b, c) * denom_inv;
    const double l1 = signed_area2(a, p, c) * denom_inv;
    const double l2 = signed_area2(a, b, p) * denom_inv;
    return l0 >= -eps && l1 >= -eps && l2 >= -eps;
}

} // namespace detail

// Assigns each triangle its majority region, marks feature triangles (all
// covered pixels clear mu times the region weight, or the triangle straddles
// a region boundary) and records mean importance per triangle. A triangle
// covering no pixel centers inherits from its nearest covered neighbor.
inline TriangleClasses classify_triangles(const TriMesh& mesh, const RegionLabeling& seg,
                                          const ScalarField& m, double mu,
                                          bool require_all_pixels = true) {
    if (seg.width != m.width || seg.height != m.height ||
        static_cast<int>(mesh.width) != seg.width || static_cast<int>(mesh.height) != seg.height)
        throw std::invalid_argument("mesh: classification input dimension mismatch");
    if (seg.weights.empty())
        throw std::invalid_argument("mesh: region weights unset");

    const int nt = static_cast<int>(mesh.triangles.size());
    TriangleClasses cls;
    cls.region_of.assign(nt, -1);
    cls.feature.assign(nt, 0);
    cls.tri_weight.assign(nt, 0.0);

    std::vector<long> covered(nt, 0);
    for (int ti = 0; ti < nt; ++ti) {
        const Triangle& t = mesh.triangles[ti];
        const Vec2 &a = mesh.vertices[t.a], &b = mesh.vertices[t.b], &c = mesh.vertices[t.c];
        const double denom_inv = 1.0 / signed_area2(a, b, c);

        const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
        const int x_hi = std::min(seg.width - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
        const int y_hi = std::min(seg.height - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));

        std::vector<std::pair<int, long>> hist; // (region label, pixel count)
        double m_sum = 0.0, m_min = std::numeric_limits<double>::max(), m_max = 0.0;
        long n_pix = 0;
        for (int py = y_lo; py <= y_hi; ++py)
            for (int px = x_lo; px <= x_hi; ++px) {
                if (!detail::barycentric_inside({px + 0.5, py + 0.5}, a, b, c, denom_inv))
                    continue;
                ++n_pix;
                const double mv = m.at(py, px);
                m_sum += mv;
                m_min = std::min(m_min, mv);
                m_max = std::max(m_max, mv);
                const int lbl = seg.label_at(py, px);
                auto it = std::find_if(hist.begin(), hist.end(),
                                       [lbl](const auto& h) { return h.first == lbl; });
                if (it == hist.end()) hist.emplace_back(lbl, 1);
                else ++it->second;
            }
        covered[ti] = n_pix;
        if (n_pix == 0) continue;

        // majority label, ties to the lowest region id
        int best_lbl = hist[0].first;
        long best_cnt = hist[0].second;
        for (const auto& [lbl, cnt] : hist)
            if (cnt > best_cnt || (cnt == best_cnt && lbl < best_lbl)) {
                best_lbl = lbl;
                best_cnt = cnt;
            }
        cls.region_of[ti] = best_lbl;
        cls.tri_weight[ti] = m_sum / n_pix;
        const double bar = mu * seg.weights[best_lbl];
        const bool qualified = (require_all_pixels ? m_min : m_max) >= bar;
        const bool straddles = hist.size() >= 2;
        cls.feature[ti] = qualified || straddles;
    }

    // zero-coverage triangles inherit from the nearest covered centroid
    for (int ti = 0; ti < nt; ++ti) {
        if (covered[ti] > 0) continue;
        const Triangle& t = mesh.triangles[ti];
        const Vec2 ctr = (mesh.vertices[t.a] + mesh.vertices[t.b] + mesh.vertices[t.c]) * (1.0 / 3.0);
        int nearest = -1;
        double best_d = std::numeric_limits<double>::max();
        for (int tj = 0; tj < nt; ++tj) {
            if (covered[tj] == 0) continue;
            const Triangle& o = mesh.triangles[tj];
            const Vec2 octr =
                (mesh.vertices[o.a] + mesh.vertices[o.b] + mesh.vertices[o.c]) * (1.0 / 3.0);
            const double d = norm2(ctr - octr);
            if (d < best_d) {
                best_d = d;
                nearest = tj;
            }
        }
        if (nearest < 0) throw std::runtime_error("mesh: no triangle covers any pixel");
        cls.region_of[ti] = cls.region_of[nearest];
        cls.tri_weight[ti] = cls.tri_weight[nearest];
        cls.feature[ti] = 1; // the all-pixels test is vacuous here
    }

    cls.region_triangles.assign(seg.region_count, {});
    for (int ti = 0; ti < nt; ++ti) cls.region_triangles[cls.region_of[ti]].push_back(ti);
    return cls;
}

// Edge-adjacent triangle pairs (sharing a full edge).
inline std::vector<std::vector<int>> triangle_adjacency(const TriMesh& mesh) {
    std::vector<std::vector<int>> adj(mesh.triangles.size());
    for (const detail::SharedEdge& e : detail::collect_edges(mesh.triangles))
        if (e.t1 >= 0) {
            adj[e.t0].push_back(e.t1);
            adj[e.t1].push_back(e.t0);
        }
    return adj;
}

} // namespace triwarp
