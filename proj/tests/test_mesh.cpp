#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "triwarp/mesh.hpp"
#include "test_support.hpp"

using namespace triwarp;

namespace {

// independent circumcircle membership used only by tests
bool strictly_in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    // circumcenter from perpendicular bisector intersection
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double ux = ((norm2(a)) * (b.y - c.y) + (norm2(b)) * (c.y - a.y) + (norm2(c)) * (a.y - b.y)) / d;
    const double uy = ((norm2(a)) * (c.x - b.x) + (norm2(b)) * (a.x - c.x) + (norm2(c)) * (b.x - a.x)) / d;
    const Vec2 center{ux, uy};
    const double r = dist(center, a);
    return dist(center, p) < r * (1.0 - 1e-9);
}

bool is_delaunay(const TriMesh& mesh) {
    for (const Triangle& t : mesh.triangles)
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            if (static_cast<int>(v) == t.a || static_cast<int>(v) == t.b ||
                static_cast<int>(v) == t.c)
                continue;
            if (strictly_in_circumcircle(mesh.vertices[t.a], mesh.vertices[t.b],
                                         mesh.vertices[t.c], mesh.vertices[v]))
                return false;
        }
    return true;
}

double total_area(const TriMesh& mesh) {
    double s = 0;
    for (const Triangle& t : mesh.triangles)
        s += 0.5 * signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
    return s;
}

RegionLabeling uniform_labels(int w, int h, double weight) {
    RegionLabeling seg;
    seg.width = w;
    seg.height = h;
    seg.region_count = 1;
    seg.labels.assign(static_cast<std::size_t>(w) * h, 0);
    seg.weights = {weight};
    return seg;
}

} // namespace

TEST_CASE("build_tri_mesh produces the exact lattice without jitter") {
    const TriMesh mesh = build_tri_mesh(100, 100, 25.0, 0.0, 7);
    CHECK(mesh.vertices.size() == 25);
    CHECK(mesh.triangles.size() == 32);
    CHECK(total_area(mesh) == Catch::Approx(100.0 * 100.0));
    for (const Triangle& t : mesh.triangles) {
        const double area =
            0.5 * signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
        CHECK(area == Catch::Approx(25.0 * 25.0 / 2.0)); // congruent cell halves
    }
}

TEST_CASE("build_tri_mesh is deterministic per seed") {
    const TriMesh a = build_tri_mesh(120, 90, 15.0, 0.2, 99);
    const TriMesh b = build_tri_mesh(120, 90, 15.0, 0.2, 99);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        CHECK(a.vertices[i].x == b.vertices[i].x);
        CHECK(a.vertices[i].y == b.vertices[i].y);
    }
    const TriMesh c = build_tri_mesh(120, 90, 15.0, 0.2, 100);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.vertices.size(); ++i)
        if (a.vertices[i].x != c.vertices[i].x || a.vertices[i].y != c.vertices[i].y)
            any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("meshes satisfy the empty-circumcircle property and tile the rectangle") {
    for (const double jitter : {0.0, 0.15, 0.3}) {
        for (const std::uint64_t seed : {1ull, 5ull}) {
            const TriMesh mesh = build_tri_mesh(130, 80, 14.0, jitter, seed);
            CHECK(is_delaunay(mesh));
            CHECK(total_area(mesh) == Catch::Approx(130.0 * 80.0));
            for (const Triangle& t : mesh.triangles)
                CHECK(signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]) >
                      2e-9);
        }
    }
}

TEST_CASE("boundary vertices sit exactly on their borders") {
    const TriMesh mesh = build_tri_mesh(110, 70, 13.0, 0.25, 3);
    int corners = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Vec2& p = mesh.vertices[v];
        switch (mesh.boundary_tags[v]) {
            case BoundaryTag::Interior:
                CHECK(p.x > 0.0);
                CHECK(p.x < 110.0);
                CHECK(p.y > 0.0);
                CHECK(p.y < 70.0);
                break;
            case BoundaryTag::Left: CHECK(p.x == 0.0); break;
            case BoundaryTag::Right: CHECK(p.x == 110.0); break;
            case BoundaryTag::Top: CHECK(p.y == 0.0); break;
            case BoundaryTag::Bottom: CHECK(p.y == 70.0); break;
            default: ++corners; break;
        }
    }
    CHECK(corners == 4);
}

TEST_CASE("mesh edge set is deduplicated and consistent") {
    const TriMesh mesh = build_tri_mesh(100, 100, 20.0, 0.1, 11);
    std::set<std::pair<int, int>> unique(mesh.edges.begin(), mesh.edges.end());
    CHECK(unique.size() == mesh.edges.size());
    for (const auto& [u, v] : mesh.edges) CHECK(u < v);
    // Euler: V - E + F = 2 with the outer face
    const long euler = static_cast<long>(mesh.vertices.size()) -
                       static_cast<long>(mesh.edges.size()) +
                       static_cast<long>(mesh.triangles.size()) + 1;
    CHECK(euler == 2);
}

TEST_CASE("mesh parameter validation") {
    CHECK_THROWS(build_tri_mesh(100, 100, 2.0, 0.1, 1));  // spacing too small
    CHECK_THROWS(build_tri_mesh(100, 100, 20.0, 0.5, 1)); // jitter out of range
    CHECK_THROWS(build_tri_mesh(30, 100, 20.0, 0.1, 1));  // image too narrow
}

TEST_CASE("dump_mesh emits vertex and face records") {
    const TriMesh mesh = build_tri_mesh(100, 100, 50.0, 0.0, 1);
    std::ostringstream os;
    dump_mesh(os, mesh.vertices, mesh.triangles);
    std::istringstream is(os.str());
    std::string tag;
    int vcount = 0, fcount = 0;
    double x, y;
    while (is >> tag) {
        if (tag == "v") {
            REQUIRE((is >> x >> y));
            ++vcount;
        } else {
            REQUIRE(tag == "f");
            int i, j, k;
            REQUIRE((is >> i >> j >> k));
            CHECK(i >= 1);
            CHECK(j >= 1);
            CHECK(k >= 1);
            ++fcount;
        }
    }
    CHECK(vcount == static_cast<int>(mesh.vertices.size()));
    CHECK(fcount == static_cast<int>(mesh.triangles.size()));
}

TEST_CASE("classify_triangles with one region and constant importance") {
    const TriMesh mesh = build_tri_mesh(60, 60, 12.0, 0.1, 2);
    const RegionLabeling seg = uniform_labels(60, 60, 0.45);
    const ScalarField m(60, 60, 0.45);
    const TriangleClasses cls = classify_triangles(mesh, seg, m, 0.9);
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        CHECK(cls.region_of[q] == 0);
        CHECK(cls.feature[q] == 1); // v >= mu * v everywhere
        CHECK(cls.tri_weight[q] == Catch::Approx(0.45));
    }
    REQUIRE(cls.region_triangles.size() == 1);
    CHECK(cls.region_triangles[0].size() == mesh.triangles.size());
}

TEST_CASE("straddling triangles are exactly those crossing the region split") {
    const int w = 96, h = 48;
    const TriMesh mesh = build_tri_mesh(w, h, 12.0, 0.0, 1);
    RegionLabeling seg;
    seg.width = w;
    seg.height = h;
    seg.region_count = 2;
    seg.labels.resize(static_cast<std::size_t>(w) * h);
    const int split = 48;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) seg.labels[y * w + x] = x < split ? 0 : 1;
    seg.weights = {0.2, 0.2};
    const ScalarField m(w, h, 0.2);
    const TriangleClasses cls = classify_triangles(mesh, seg, m, 2.0); // mu > 1: nothing qualifies

    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        double min_x = 1e9, max_x = -1e9;
        for (int k = 0; k < 3; ++k) {
            min_x = std::min(min_x, mesh.vertices[mesh.triangles[q][k]].x);
            max_x = std::max(max_x, mesh.vertices[mesh.triangles[q][k]].x);
        }
        // lattice triangles sit strictly on one side iff they do not touch
        // the split line; pixel centers at x = split-0.5 and split+0.5
        const bool crosses = min_x < split && max_x > split;
        CHECK(static_cast<bool>(cls.feature[q]) == crosses);
    }
}

TEST_CASE("threshold qualification replays the all-pixels predicate") {
    const int w = 72, h = 72;
    const TriMesh mesh = build_tri_mesh(w, h, 12.0, 0.05, 6);
    const RegionLabeling seg = uniform_labels(w, h, 0.0); // weight filled below
    ScalarField m(w, h, 0.05);
    for (int y = 20; y < 40; ++y)
        for (int x = 20; x < 40; ++x) m.at(y, x) = 1.0; // hot blob
    RegionLabeling seg_w = seg;
    double mean = 0;
    for (double v : m.data) mean += v;
    seg_w.weights = {mean / m.data.size()};
    const double mu = 0.9;
    const TriangleClasses cls = classify_triangles(mesh, seg_w, m, mu);

    // independent replay with a plain sign-based point-in-triangle test
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Vec2 a = mesh.vertices[mesh.triangles[q].a];
        const Vec2 b = mesh.vertices[mesh.triangles[q].b];
        const Vec2 c = mesh.vertices[mesh.triangles[q].c];
        bool all_hot = true;
        bool any = false;
        for (int py = 0; py < h; ++py)
            for (int px = 0; px < w; ++px) {
                const Vec2 p{px + 0.5, py + 0.5};
                const double s0 = signed_area2(a, b, p), s1 = signed_area2(b, c, p),
                             s2 = signed_area2(c, a, p);
                const double area = signed_area2(a, b, c);
                const double eps = -1e-9 * std::abs(area);
                if (s0 * area < eps || s1 * area < eps || s2 * area < eps) continue;
                any = true;
                if (m.at(py, px) < mu * seg_w.weights[0]) all_hot = false;
            }
        if (any) CHECK(static_cast<bool>(cls.feature[q]) == all_hot); // single region, no straddle
    }
}

TEST_CASE("region triangle lists partition the mesh") {
    std::mt19937_64 gen(61);
    const int w = 80, h = 64;
    const TriMesh mesh = build_tri_mesh(w, h, 13.0, 0.15, 9);
    RegionLabeling seg;
    seg.width = w;
    seg.height = h;
    seg.region_count = 3;
    seg.labels.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) seg.labels[y * w + x] = std::min(2, 3 * x / w);
    seg.weights = {0.3, 0.6, 0.9};
    const ScalarField m = test_support::random_field(w, h, gen);
    const TriangleClasses cls = classify_triangles(mesh, seg, m, 0.9);

    std::size_t sum = 0;
    std::set<int> seen;
    for (int r = 0; r < 3; ++r) {
        sum += cls.region_triangles[r].size();
        for (int q : cls.region_triangles[r]) {
            CHECK(cls.region_of[q] == r);
            CHECK(seen.insert(q).second); // disjoint
        }
    }
    CHECK(sum == mesh.triangles.size());
    for (double wq : cls.tri_weight) {
        CHECK(wq >= 0.0);
        CHECK(wq <= 1.0);
    }
}

TEST_CASE("triangle_adjacency pairs triangles over shared edges") {
    const TriMesh mesh = build_tri_mesh(100, 100, 25.0, 0.0, 1);
    const auto adj = triangle_adjacency(mesh);
    REQUIRE(adj.size() == mesh.triangles.size());
    for (std::size_t q = 0; q < adj.size(); ++q) {
        CHECK(adj[q].size() >= 1);
        CHECK(adj[q].size() <= 3);
        for (int qn : adj[q]) {
            // adjacency is symmetric
            CHECK(std::find(adj[qn].begin(), adj[qn].end(), static_cast<int>(q)) != adj[qn].end());
        }
    }
}
