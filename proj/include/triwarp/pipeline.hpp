#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "triwarp/image_io.hpp"
#include "triwarp/importance.hpp"
#include "triwarp/mesh.hpp"
#include "triwarp/raster.hpp"
#include "triwarp/regions.hpp"
#include "triwarp/seam.hpp"
#include "triwarp/solver.hpp"
#include "triwarp/warp.hpp"

namespace triwarp {

enum class Method { Mesh, SeamBackward, SeamForward, Scale };

// Target extent for one axis: keep the source, absolute pixels, or a
// percentage (rounded half up).
struct TargetSpec {
    enum class Kind { Keep, Absolute, Percent } kind = Kind::Keep;
    double value = 0.0;

    int resolve(int source) const {
        switch (kind) {
            case Kind::Keep: return source;
            case Kind::Absolute: return static_cast<int>(value);
            case Kind::Percent: return static_cast<int>(std::floor(source * value / 100.0 + 0.5));
        }
        return source;
    }
    // accepts "320" or "55%"
    static TargetSpec parse(const std::string& s) {
        if (s.empty()) return {};
        TargetSpec t;
        std::size_t used = 0;
        t.value = std::stod(s, &used);
        if (used < s.size() && s[used] == '%') {
            t.kind = Kind::Percent;
            ++used;
        } else {
            t.kind = Kind::Absolute;
        }
        if (used != s.size()) throw std::invalid_argument("cli: bad target spec: " + s);
        return t;
    }
};

struct RunConfig {
    std::string input;
    std::string output;
    TargetSpec width;
    TargetSpec height;
    Method method = Method::Mesh;

    double alpha = 1.2;
    double beta = 1.5;
    double gamma = 2.0;
    double seg_k = 1000.0;
    double seg_sigma = 0.5;
    int seg_min_size = 0;  // 0 selects 0.1% of the pixel count, at least 20
    double mu = 0.9;
    double tau = 0.4;
    double eps_t = 0.02;
    double eps_p = 0.05;
    double mesh_spacing = 0.0; // 0 selects max(12, min(w,h)/25)
    double mesh_jitter = 0.15;
    std::uint64_t seed = 1;
    double vertex_tol = 0.5;
    double factor_tol = 0.1;
    int max_outer = 100;
    int max_smooth = 500;

    std::string debug_dir;  // empty disables debug artifacts
    std::string energy_map; // optional external energy for seam modes
};

namespace detail {

inline std::string debug_path(const RunConfig& cfg, const std::string& suffix) {
    const std::string stem = std::filesystem::path(cfg.input).stem().string();
    return (std::filesystem::path(cfg.debug_dir) / (stem + suffix)).string();
}

inline RasterImage palette_render(const RegionLabeling& seg) {
    std::mt19937_64 gen(0x5eedu);
    std::vector<std::array<double, 3>> palette(seg.region_count);
    for (auto& c : palette)
        for (double& v : c) v = 0.15 + 0.85 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    RasterImage out(seg.width, seg.height, 3);
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x < seg.width; ++x) {
            const auto& c = palette[seg.label_at(y, x)];
            for (int k = 0; k < 3; ++k) out.at(y, x, k) = c[k];
        }
    return out;
}

inline RasterImage seam_overlay_render(const RasterImage& src, const SeamOverlayTrace& trace) {
    RasterImage out = to_rgb(src);
    for (const auto& seam : trace.seams)
        for (const auto& [x, y] : seam)
            if (x >= 0 && x < out.width && y >= 0 && y < out.height) {
                out.at(y, x, 0) = 1.0;
                out.at(y, x, 1) = 0.1;
                out.at(y, x, 2) = 0.1;
            }
    return out;
}

struct MeshArtifacts {
    ScalarField g, e_mod, w, h, m, m_r;
    RegionLabeling seg;
    TriMesh mesh;
    DeformState state;
};

inline RasterImage run_mesh_method(const RunConfig& cfg, const RasterImage& img, int tw, int th,
                                   MeshArtifacts* art) {
    const ScalarField lum = to_luminance(img);
    const ScalarField g = gbvs_saliency(lum);
    const ScalarField e_raw = gradient_energy(lum, GradientNorm::L1);
    const ScalarField y = gradient_energy(lum, GradientNorm::L2);
    auto [e_mod, w] = texture_suppress(e_raw, y, cfg.alpha, cfg.beta);
    auto [h, lines] = hough_line_map(lum);
    const ScalarField m = combine_importance(g, e_mod, w, h, cfg.gamma);

    SegmentationParams sp;
    sp.k = cfg.seg_k;
    sp.sigma = cfg.seg_sigma;
    sp.min_size = cfg.seg_min_size > 0
                      ? cfg.seg_min_size
                      : std::max(20, static_cast<int>(std::lround(0.001 * img.width * img.height)));
    auto [seg, m_r] = region_weight_map(segment_graph(img, sp), m);

    const double spacing =
        cfg.mesh_spacing > 0.0
            ? cfg.mesh_spacing
            : std::max(12.0, std::floor(std::min(img.width, img.height) / 25.0 + 0.5));
    const TriMesh mesh = build_tri_mesh(img.width, img.height, spacing, cfg.mesh_jitter, cfg.seed);
    const TriangleClasses classes = classify_triangles(mesh, seg, m, cfg.mu);

    SolverParams params;
    params.tau = cfg.tau;
    params.eps_t = cfg.eps_t;
    params.eps_p = cfg.eps_p;
    params.vertex_tol = cfg.vertex_tol;
    params.factor_tol = cfg.factor_tol;
    params.max_outer = cfg.max_outer;
    params.max_smooth = cfg.max_smooth;
    DeformState state = solve_retarget_mesh(mesh, classes, seg.weights, tw, th, params);

    RasterImage out = warp_render(img, mesh, state.c_prime, tw, th);
    if (art) {
        art->g = g;
        art->e_mod = e_mod;
        art->w = w;
        art->h = h;
        art->m = m;
        art->m_r = m_r;
        art->seg = seg;
        art->mesh = mesh;
        art->state = std::move(state);
    }
    return out;
}

inline void emit_mesh_debug(const RunConfig& cfg, const RasterImage& img,
                            const RasterImage& out, const MeshArtifacts& art) {
    encode_field(art.g, debug_path(cfg, ".g.png"));
    encode_field(normalize_unit(art.e_mod), debug_path(cfg, ".e.png"));
    encode_field(normalize_unit(art.w), debug_path(cfg, ".w.png"));
    encode_field(art.h, debug_path(cfg, ".h.png"));
    encode_field(art.m, debug_path(cfg, ".m.png"));
    encode_field(art.m_r, debug_path(cfg, ".mr.png"));
    encode_image(palette_render(art.seg), debug_path(cfg, ".seg.png"));
    encode_image(mesh_overlay(img, art.mesh.vertices, art.mesh.triangles),
                 debug_path(cfg, ".mesh_initial.png"));
    encode_image(mesh_overlay(out, art.state.c_prime, art.mesh.triangles),
                 debug_path(cfg, ".mesh_final.png"));
    {
        std::ofstream os(debug_path(cfg, ".mesh_initial.txt"));
        dump_mesh(os, art.mesh.vertices, art.mesh.triangles);
    }
    {
        std::ofstream os(debug_path(cfg, ".mesh_final.txt"));
        dump_mesh(os, art.state.c_prime, art.mesh.triangles);
    }
    std::ofstream os(debug_path(cfg, ".trace.txt"));
    os.setf(std::ios::scientific);
    os.precision(9);
    for (const IterationRecord& r : art.state.trace)
        os << r.iteration << " " << r.energy.e1 << " " << r.energy.e2 << " " << r.energy.e3
           << " " << r.energy.total() << " " << r.max_displacement << "\n";
}

} // namespace detail

// Executes one retargeting run. Returns 0 on success, 1 on input or I/O
// errors, 2 when the mesh solver stops without meeting its tolerance (the
// best iterate is still written).
inline int run_pipeline(const RunConfig& cfg) {
    try {
        const RasterImage img = decode_image(cfg.input);
        const int tw = cfg.width.resolve(img.width);
        const int th = cfg.height.resolve(img.height);
        if (tw < 2 || th < 2) throw std::invalid_argument("cli: target below 2 px per axis");

        std::optional<ScalarField> override_map;
        if (!cfg.energy_map.empty()) {
            const RasterImage em = decode_image(cfg.energy_map);
            if (em.width != img.width || em.height != img.height)
                throw std::invalid_argument("cli: energy map dimensions differ from input");
            override_map = to_luminance(em);
        }
        const bool debug = !cfg.debug_dir.empty();
        if (debug) std::filesystem::create_directories(cfg.debug_dir);

        bool solver_converged = true;
        RasterImage out;
        switch (cfg.method) {
            case Method::Scale:
                out = resample_bilinear(img, tw, th);
                break;
            case Method::SeamBackward:
            case Method::SeamForward: {
                const SeamMode mode =
                    cfg.method == Method::SeamBackward ? SeamMode::Backward : SeamMode::Forward;
                SeamOverlayTrace trace;
                out = seam_retarget(img, tw, th, mode, override_map ? &*override_map : nullptr,
                                    debug ? &trace : nullptr);
                if (debug)
                    encode_image(detail::seam_overlay_render(img, trace),
                                 detail::debug_path(cfg, ".seams.png"));
                break;
            }
            case Method::Mesh: {
                detail::MeshArtifacts art;
                out = detail::run_mesh_method(cfg, img, tw, th, &art);
                solver_converged = art.state.converged;
                if (debug) detail::emit_mesh_debug(cfg, img, out, art);
                break;
            }
        }
        encode_image(out, cfg.output);
        return solver_converged ? 0 : 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

} // namespace triwarp
