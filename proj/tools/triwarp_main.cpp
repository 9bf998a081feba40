#include <map>
#include <string>

#include <CLI11.hpp>

#include "triwarp/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Content-aware image retargeting by tri-mesh warping, with "
                 "seam-carving and scaling baselines"};

    triwarp::RunConfig cfg;
    std::string width_spec, height_spec;
    std::string method = "mesh";

    app.add_option("-i,--input", cfg.input, "input image (PNG or binary PPM/PGM)")->required();
    app.add_option("-o,--output", cfg.output, "output PNG path")->required();
    app.add_option("--width", width_spec, "target width, pixels or N% (default: keep)");
    app.add_option("--height", height_spec, "target height, pixels or N% (default: keep)");
    app.add_option("--method", method, "mesh | seam-backward | seam-forward | scale")
        ->check(CLI::IsMember({"mesh", "seam-backward", "seam-forward", "scale"}));

    app.add_option("--alpha", cfg.alpha, "texture threshold multiplier");
    app.add_option("--beta", cfg.beta, "texture blend weight");
    app.add_option("--gamma", cfg.gamma, "feature-line weight");
    app.add_option("--seg-k", cfg.seg_k, "segmentation scale of observation");
    app.add_option("--seg-sigma", cfg.seg_sigma, "segmentation pre-smoothing sigma");
    app.add_option("--seg-min-size", cfg.seg_min_size, "minimum region size (0 = auto)");
    app.add_option("--mu", cfg.mu, "feature-triangle importance threshold");
    app.add_option("--tau", cfg.tau, "size-preservation weight");
    app.add_option("--eps-t", cfg.eps_t, "edge orientation slack");
    app.add_option("--eps-p", cfg.eps_p, "perpendicular orientation slack");
    app.add_option("--mesh-spacing", cfg.mesh_spacing, "mesh lattice spacing, px (0 = auto)");
    app.add_option("--mesh-jitter", cfg.mesh_jitter, "vertex jitter fraction of spacing");
    app.add_option("--seed", cfg.seed, "mesh jitter seed");
    app.add_option("--vertex-tol", cfg.vertex_tol, "solver vertex movement stop, px");
    app.add_option("--factor-tol", cfg.factor_tol, "factor smoothing stop");
    app.add_option("--debug-dir", cfg.debug_dir, "directory for diagnostic maps and overlays");
    app.add_option("--energy-map", cfg.energy_map, "external energy map for seam modes");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.width = triwarp::TargetSpec::parse(width_spec);
        cfg.height = triwarp::TargetSpec::parse(height_spec);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    static const std::map<std::string, triwarp::Method> methods{
        {"mesh", triwarp::Method::Mesh},
        {"seam-backward", triwarp::Method::SeamBackward},
        {"seam-forward", triwarp::Method::SeamForward},
        {"scale", triwarp::Method::Scale}};
    cfg.method = methods.at(method);

    return triwarp::run_pipeline(cfg);
}
