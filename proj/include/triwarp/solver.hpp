#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "triwarp/geometry.hpp"
#include "triwarp/mesh.hpp"

namespace triwarp {

struct SolverParams {
    double tau = 0.4;        // size-preservation weight inside the region term
    double eps_t = 0.02;     // edge-orientation constraint slack
    double eps_p = 0.05;     // perpendicular-orientation constraint slack
    double vertex_tol = 0.5; // outer stop, px
    double factor_tol = 0.1; // factor-smoothing stop
    int max_outer = 100;
    int max_smooth = 500;
};

struct EnergyBreakdown {
    double e1 = 0, e2 = 0, e3 = 0;
    double total() const { return e1 + e2 + e3; }
};

struct IterationRecord {
    int iteration = 0;
    EnergyBreakdown energy;
    double max_displacement = 0;
    std::vector<Vec2> positions; // accepted vertex positions
};

struct DeformState {
    std::vector<Vec2> c_prime;
    std::vector<double> theta;
    std::vector<double> theta_u;
    EnergyBreakdown energies;
    bool converged = false;
    int iterations = 0;
    std::vector<IterationRecord> trace;
};

// Orthogonal projection of the vertex opposite edge (i,j) onto the edge line.
struct PerpFoot {
    Vec2 foot;
    double length = 0;
};

inline PerpFoot perp_foot(const std::vector<Vec2>& pts, int i, int j, int z) {
    const Vec2 e = pts[j] - pts[i];
    const double t = dot(pts[z] - pts[i], e) / norm2(e);
    PerpFoot out;
    out.foot = pts[i] + t * e;
    out.length = norm(pts[z] - out.foot);
    return out;
}

// Closed-form least-squares scale of each triangle's original edge vectors
// onto the deformed ones.
inline std::vector<double> optimal_scale_factors(const TriMesh& mesh,
                                                 const std::vector<Vec2>& c_prime) {
    std::vector<double> theta(mesh.triangles.size());
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Triangle& t = mesh.triangles[q];
        double num = 0.0, den = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            num += dot(d, c_prime[i] - c_prime[j]);
            den += norm2(d);
        }
        theta[q] = num / den;
    }
    return theta;
}

// Jacobi relaxation of the factor-smoothing objective over feature triangles:
// fidelity to the raw factor plus weighted agreement with edge-adjacent
// feature triangles of the same region. Non-feature triangles pass through.
inline std::vector<double> smooth_scale_factors(const std::vector<double>& theta,
                                                const TriangleClasses& classes,
                                                const std::vector<std::vector<int>>& adjacency,
                                                double factor_tol, int max_smooth) {
    const int nt = static_cast<int>(theta.size());
    std::vector<std::vector<int>> nbrs(nt);
    for (int q = 0; q < nt; ++q) {
        if (!classes.feature[q]) continue;
        for (int qn : adjacency[q])
            if (classes.feature[qn] && classes.region_of[qn] == classes.region_of[q])
                nbrs[q].push_back(qn);
    }

    std::vector<double> u(nt), nxt(nt);
    for (int q = 0; q < nt; ++q) u[q] = classes.feature[q] ? 1.0 : theta[q];
    for (int sweep = 0; sweep < max_smooth; ++sweep) {
        double change = 0.0;
        for (int q = 0; q < nt; ++q) {
            if (!classes.feature[q]) {
                nxt[q] = theta[q];
                continue;
            }
            double num = theta[q], den = 1.0;
            for (int qn : nbrs[q]) {
                const double w = classes.tri_weight[q] + classes.tri_weight[qn];
                num += w * u[qn];
                den += w;
            }
            nxt[q] = num / den;
            change = std::max(change, std::abs(nxt[q] - u[q]));
        }
        u.swap(nxt);
        if (change < factor_tol) break;
    }
    return u;
}

// One weighted squared edge-difference residual: k * ||(c'_i - c'_j) - t||^2.
struct EdgeTerm {
    int i, j;
    double k;
    Vec2 target;
};

// The quadratic obtained by freezing the per-edge length ratios and the
// perpendicular ratios at a reference configuration. Exposes value and
// gradient so the linearization can be checked against finite differences.
struct LinearizedEnergy {
    std::vector<EdgeTerm> terms;

    double value(const std::vector<Vec2>& c) const {
        double s = 0.0;
        for (const EdgeTerm& t : terms) {
            const Vec2 d = c[t.i] - c[t.j];
            s += t.k * norm2(d - t.target);
        }
        return s;
    }
    std::vector<Vec2> gradient(const std::vector<Vec2>& c) const {
        std::vector<Vec2> g(c.size());
        for (const EdgeTerm& t : terms) {
            const Vec2 r = (c[t.i] - c[t.j] - t.target) * (2.0 * t.k);
            g[t.i] += r;
            g[t.j] += {-r.x, -r.y};
        }
        return g;
    }
};

namespace detail {

inline double deformed_edge_ratio(const Vec2& dp, const Vec2& d, const char* what) {
    const double lp = norm(dp), l0 = norm(d);
    if (lp == 0.0) throw std::runtime_error(std::string("solver: degenerate deformed ") + what);
    return lp / l0;
}

} // namespace detail

// Builds the frozen-ratio quadratic around c_ref.
inline LinearizedEnergy build_linearized_energy(const TriMesh& mesh,
                                                const TriangleClasses& classes,
                                                const std::vector<double>& region_weights,
                                                const std::vector<Vec2>& c_ref,
                                                const std::vector<double>& theta_u, double tau) {
    LinearizedEnergy lin;
    lin.terms.reserve(mesh.triangles.size() * 9 + mesh.edges.size());

    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Triangle& t = mesh.triangles[q];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            lin.terms.push_back({i, j, classes.tri_weight[q], theta_u[q] * d});
        }
    }
    for (const auto& [i, j] : mesh.edges) {
        const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
        const double r = detail::deformed_edge_ratio(c_ref[i] - c_ref[j], d, "edge");
        lin.terms.push_back({i, j, 1.0, r * d});
    }
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Triangle& t = mesh.triangles[q];
        const double wr = region_weights[classes.region_of[q]];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3], z = t[(k + 2) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            const double p0 = perp_foot(mesh.vertices, i, j, z).length;
            const double p1 = perp_foot(c_ref, i, j, z).length;
            if (p1 == 0.0) throw std::runtime_error("solver: degenerate deformed perpendicular");
            lin.terms.push_back({i, j, wr, (p1 / p0) * d});
            lin.terms.push_back({i, j, wr * tau, d});
        }
    }
    return lin;
}

// Exact (non-frozen) energies at c_prime with the given smoothed factors.
inline EnergyBreakdown evaluate_energy(const TriMesh& mesh, const TriangleClasses& classes,
                                       const std::vector<double>& region_weights,
                                       const std::vector<Vec2>& c_prime,
                                       const std::vector<double>& theta_u, double tau) {
    EnergyBreakdown e;
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Triangle& t = mesh.triangles[q];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            e.e1 += classes.tri_weight[q] * norm2((c_prime[i] - c_prime[j]) - theta_u[q] * d);
        }
    }
    for (const auto& [i, j] : mesh.edges) {
        const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
        const Vec2 dp = c_prime[i] - c_prime[j];
        const double r = detail::deformed_edge_ratio(dp, d, "edge");
        e.e2 += norm2(dp - r * d);
    }
    for (std::size_t q = 0; q < mesh.triangles.size(); ++q) {
        const Triangle& t = mesh.triangles[q];
        const double wr = region_weights[classes.region_of[q]];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3], z = t[(k + 2) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            const Vec2 dp = c_prime[i] - c_prime[j];
            const double p0 = perp_foot(mesh.vertices, i, j, z).length;
            const double p1 = perp_foot(c_prime, i, j, z).length;
            e.e3 += wr * (norm2(dp - (p1 / p0) * d) + tau * norm2(dp - d));
        }
    }
    return e;
}

enum class ConstraintKind { EdgeX, EdgeY, PerpX, PerpY };

struct ConstraintViolation {
    int triangle;
    int edge; // 0..2, edge k runs from vertex k to k+1
    ConstraintKind kind;
    double lhs;
};

// Orientation constraints: per triangle edge the deformed coordinate
// difference must keep the original sign and at least an eps fraction of the
// original magnitude (the slack scales with the squared original difference,
// so the identity and any positive axis scaling are always feasible), and
// likewise for the offset from the opposite vertex to its perpendicular
// foot. An axis whose original component is zero or a negligible share of
// its vector carries no orientation and is exempt on that axis.
inline std::vector<ConstraintViolation> constraint_check(const TriMesh& mesh,
                                                         const std::vector<Vec2>& c_prime,
                                                         double eps_t, double eps_p) {
    constexpr double kShareExempt = 0.05;
    std::vector<ConstraintViolation> out;
    for (int q = 0; q < static_cast<int>(mesh.triangles.size()); ++q) {
        const Triangle& t = mesh.triangles[q];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3], z = t[(k + 2) % 3];
            const Vec2 d = mesh.vertices[i] - mesh.vertices[j];
            const Vec2 dp = c_prime[i] - c_prime[j];
            const double d_floor = kShareExempt * norm(d);
            if (std::abs(d.x) >= d_floor && dp.x * d.x < eps_t * d.x * d.x)
                out.push_back({q, k, ConstraintKind::EdgeX, dp.x * d.x});
            if (std::abs(d.y) >= d_floor && dp.y * d.y < eps_t * d.y * d.y)
                out.push_back({q, k, ConstraintKind::EdgeY, dp.y * d.y});

            const Vec2 off0 = mesh.vertices[z] - perp_foot(mesh.vertices, i, j, z).foot;
            const Vec2 off1 = c_prime[z] - perp_foot(c_prime, i, j, z).foot;
            const double off_floor = kShareExempt * norm(off0);
            if (std::abs(off0.x) >= off_floor && off1.x * off0.x < eps_p * off0.x * off0.x)
                out.push_back({q, k, ConstraintKind::PerpX, off1.x * off0.x});
            if (std::abs(off0.y) >= off_floor && off1.y * off0.y < eps_p * off0.y * off0.y)
                out.push_back({q, k, ConstraintKind::PerpY, off1.y * off0.y});
        }
    }
    return out;
}

namespace detail {

inline bool any_area_flip(const TriMesh& mesh, const std::vector<Vec2>& c_prime) {
    for (const Triangle& t : mesh.triangles) {
        const double a0 = signed_area2(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
        const double a1 = signed_area2(c_prime[t.a], c_prime[t.b], c_prime[t.c]);
        if (a0 * a1 <= 0.0) return true;
    }
    return false;
}

// Per-axis equality constraints: corners pin both coordinates, border
// vertices pin the coordinate normal to their border.
inline void fixed_coordinates(const TriMesh& mesh, double target_w, double target_h, int axis,
                              std::vector<char>& is_fixed, std::vector<double>& value) {
    const int n = static_cast<int>(mesh.vertices.size());
    is_fixed.assign(n, 0);
    value.assign(n, 0.0);
    for (int v = 0; v < n; ++v) {
        const BoundaryTag tag = mesh.boundary_tags[v];
        if (axis == 0) {
            if (on_left(tag)) {
                is_fixed[v] = 1;
                value[v] = 0.0;
            } else if (on_right(tag)) {
                is_fixed[v] = 1;
                value[v] = target_w;
            }
        } else {
            if (on_top(tag)) {
                is_fixed[v] = 1;
                value[v] = 0.0;
            } else if (on_bottom(tag)) {
                is_fixed[v] = 1;
                value[v] = target_h;
            }
        }
    }
}

// Minimizes the axis slice of the frozen quadratic subject to the fixed
// coordinates; the normal equations form a weighted graph Laplacian.
inline std::vector<double> solve_axis(const LinearizedEnergy& lin, int n, int axis,
                                      const std::vector<char>& is_fixed,
                                      const std::vector<double>& fixed_value) {
    std::vector<int> index(n, -1);
    int free_count = 0;
    for (int v = 0; v < n; ++v)
        if (!is_fixed[v]) index[v] = free_count++;

    std::vector<double> x(n);
    for (int v = 0; v < n; ++v)
        if (is_fixed[v]) x[v] = fixed_value[v];
    if (free_count == 0) return x;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(lin.terms.size() * 4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_count);
    for (const EdgeTerm& t : lin.terms) {
        const double tgt = (axis == 0) ? t.target.x : t.target.y;
        const int fi = index[t.i], fj = index[t.j];
        if (fi >= 0) {
            trips.emplace_back(fi, fi, t.k);
            rhs[fi] += t.k * tgt;
            if (fj >= 0) trips.emplace_back(fi, fj, -t.k);
            else rhs[fi] += t.k * fixed_value[t.j];
        }
        if (fj >= 0) {
            trips.emplace_back(fj, fj, t.k);
            rhs[fj] -= t.k * tgt;
            if (fi >= 0) trips.emplace_back(fj, fi, -t.k);
            else rhs[fj] += t.k * fixed_value[t.i];
        }
    }
    Eigen::SparseMatrix<double> a(free_count, free_count);
    a.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solver: normal equations factorization failed");
    const Eigen::VectorXd sol = solver.solve(rhs);
    for (int v = 0; v < n; ++v)
        if (index[v] >= 0) x[v] = sol[index[v]];
    return x;
}

} // namespace detail

// Outer local-global iteration: scale factors and edge/perpendicular ratios
// are frozen at the current iterate, the resulting quadratic is minimized per
// axis under the boundary equalities, and the step is halved toward the
// previous iterate until the orientation constraints hold. Stops when no
// vertex moves more than vertex_tol.
inline DeformState solve_retarget_mesh(const TriMesh& mesh, const TriangleClasses& classes,
                                       const std::vector<double>& region_weights, int target_w,
                                       int target_h, const SolverParams& params = {}) {
    if (target_w < 2 || target_h < 2)
        throw std::invalid_argument("solver: target below 2 px");

    const int n = static_cast<int>(mesh.vertices.size());
    const auto adjacency = triangle_adjacency(mesh);

    DeformState state;
    state.c_prime.resize(n);
    const double sx = target_w / mesh.width, sy = target_h / mesh.height;
    for (int v = 0; v < n; ++v)
        state.c_prime[v] = {mesh.vertices[v].x * sx, mesh.vertices[v].y * sy};

    std::vector<char> fixed_x, fixed_y;
    std::vector<double> fixed_xv, fixed_yv;
    detail::fixed_coordinates(mesh, target_w, target_h, 0, fixed_x, fixed_xv);
    detail::fixed_coordinates(mesh, target_w, target_h, 1, fixed_y, fixed_yv);

    for (int iter = 1; iter <= params.max_outer; ++iter) {
        state.theta = optimal_scale_factors(mesh, state.c_prime);
        state.theta_u = smooth_scale_factors(state.theta, classes, adjacency, params.factor_tol,
                                             params.max_smooth);
        const LinearizedEnergy lin = build_linearized_energy(
            mesh, classes, region_weights, state.c_prime, state.theta_u, params.tau);

        const std::vector<double> xs = detail::solve_axis(lin, n, 0, fixed_x, fixed_xv);
        const std::vector<double> ys = detail::solve_axis(lin, n, 1, fixed_y, fixed_yv);
        std::vector<Vec2> cand(n);
        for (int v = 0; v < n; ++v) cand[v] = {xs[v], ys[v]};

        bool feasible = true;
        for (int halving = 0;; ++halving) {
            if (constraint_check(mesh, cand, params.eps_t, params.eps_p).empty() &&
                !detail::any_area_flip(mesh, cand))
                break;
            if (halving >= 20) {
                feasible = false;
                break;
            }
            for (int v = 0; v < n; ++v) cand[v] = 0.5 * (cand[v] + state.c_prime[v]);
        }
        if (!feasible) { // keep the previous iterate
            state.energies = evaluate_energy(mesh, classes, region_weights, state.c_prime,
                                             state.theta_u, params.tau);
            break;
        }

        double max_disp = 0.0;
        for (int v = 0; v < n; ++v)
            max_disp = std::max({max_disp, std::abs(cand[v].x - state.c_prime[v].x),
                                 std::abs(cand[v].y - state.c_prime[v].y)});
        state.c_prime = std::move(cand);
        state.iterations = iter;
        state.energies = evaluate_energy(mesh, classes, region_weights, state.c_prime,
                                         state.theta_u, params.tau);
        state.trace.push_back({iter, state.energies, max_disp, state.c_prime});
        if (max_disp < params.vertex_tol) {
            state.converged = true;
            break;
        }
    }
    if (state.theta.empty()) { // no iteration accepted
        state.theta = optimal_scale_factors(mesh, state.c_prime);
        state.theta_u = smooth_scale_factors(state.theta, classes, adjacency, params.factor_tol,
                                             params.max_smooth);
        state.energies = evaluate_energy(mesh, classes, region_weights, state.c_prime,
                                         state.theta_u, params.tau);
    }
    return state;
}

} // namespace triwarp
