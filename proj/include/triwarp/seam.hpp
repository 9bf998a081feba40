#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "triwarp/raster.hpp"

namespace triwarp {

enum class SeamAxis { Vertical, Horizontal };
enum class SeamMode { Backward, Forward };

// An 8-connected pixel path: one column per row (vertical) or one row per
// column (horizontal).
struct SeamPath {
    SeamAxis axis = SeamAxis::Vertical;
    std::vector<int> coords;
    double cost = 0.0;
};

// Cumulative minimal seam energies. The table is always stored in vertical
// form (DP runs top to bottom); the axis tag records the orientation of the
// image it describes.
struct CumulativeMap {
    ScalarField map;
    SeamAxis axis = SeamAxis::Vertical;
};

namespace detail {

inline double min3_above(const ScalarField& m, int y, int x) {
    double best = m.at(y - 1, x);
    if (x > 0) best = std::min(best, m.at(y - 1, x - 1));
    if (x + 1 < m.width) best = std::min(best, m.at(y - 1, x + 1));
    return best;
}

inline ScalarField backward_table(const ScalarField& e) {
    ScalarField m = e;
    for (int y = 1; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            m.at(y, x) = e.at(y, x) + min3_above(m, y, x);
    return m;
}

// Forward-energy case costs for arriving at (y, x); out-of-range neighbor
// differences are zero.
inline void forward_cases(const ScalarField& lum, int y, int x, double& cl,
                          double& cu, double& cr) {
    const double right = (x + 1 < lum.width) ? lum.at(y, x + 1) : 0.0;
    const double left = (x > 0) ? lum.at(y, x - 1) : 0.0;
    const double lr = (x > 0 && x + 1 < lum.width) ? std::abs(right - left) : 0.0;
    const double up = lum.at(y - 1, x);
    cu = lr;
    cl = lr + ((x > 0) ? std::abs(up - left) : 0.0);
    cr = lr + ((x + 1 < lum.width) ? std::abs(up - right) : 0.0);
}

inline ScalarField forward_table(const ScalarField& lum, const ScalarField& p) {
    ScalarField m(lum.width, lum.height);
    for (int x = 0; x < lum.width; ++x) m.at(0, x) = p.at(0, x);
    for (int y = 1; y < lum.height; ++y) {
        for (int x = 0; x < lum.width; ++x) {
            double cl, cu, cr;
            forward_cases(lum, y, x, cl, cu, cr);
            double best = m.at(y - 1, x) + cu;
            if (x > 0) best = std::min(best, m.at(y - 1, x - 1) + cl);
            if (x + 1 < lum.width) best = std::min(best, m.at(y - 1, x + 1) + cr);
            m.at(y, x) = p.at(y, x) + best;
        }
    }
    return m;
}

} // namespace detail

inline CumulativeMap cumulative_backward(const ScalarField& e,
                                         SeamAxis axis = SeamAxis::Vertical) {
    if (e.width < 2 || e.height < 2)
        throw std::invalid_argument("seam: energy below 2x2");
    if (axis == SeamAxis::Horizontal)
        return {detail::backward_table(transpose(e)), axis};
    return {detail::backward_table(e), axis};
}

// P defaults to the zero field. Degenerates to the backward recurrence on P
// when the luminance is constant.
inline CumulativeMap cumulative_forward(const ScalarField& lum,
                                        const ScalarField* p = nullptr,
                                        SeamAxis axis = SeamAxis::Vertical) {
    if (lum.width < 3 || lum.height < 3)
        throw std::invalid_argument("seam: forward energy needs at least 3x3");
    ScalarField zero;
    if (!p) {
        zero = ScalarField(lum.width, lum.height, 0.0);
        p = &zero;
    }
    if (p->width != lum.width || p->height != lum.height)
        throw std::invalid_argument("seam: energy map dimension mismatch");
    if (axis == SeamAxis::Horizontal)
        return {detail::forward_table(transpose(lum), transpose(*p)), axis};
    return {detail::forward_table(lum, *p), axis};
}

// Starts at the bottom-row minimum and walks up through the cheapest of the
// three connected cells. Ties break leftmost.
inline SeamPath backtrack_min_seam(const CumulativeMap& cm) {
    const ScalarField& m = cm.map;
    SeamPath s;
    s.axis = cm.axis;
    s.coords.resize(m.height);

    int x = 0;
    for (int j = 1; j < m.width; ++j)
        if (m.at(m.height - 1, j) < m.at(m.height - 1, x)) x = j;
    s.cost = m.at(m.height - 1, x);
    s.coords[m.height - 1] = x;

    for (int y = m.height - 1; y > 0; --y) {
        int best = std::max(x - 1, 0);
        for (int j = best + 1; j <= std::min(x + 1, m.width - 1); ++j)
            if (m.at(y - 1, j) < m.at(y - 1, best)) best = j;
        x = best;
        s.coords[y - 1] = x;
    }
    return s;
}

inline RasterImage remove_seam(const RasterImage& img, const SeamPath& seam) {
    if (seam.axis == SeamAxis::Vertical) {
        if (static_cast<int>(seam.coords.size()) != img.height || img.width < 3)
            throw std::invalid_argument("seam: seam does not fit image");
        RasterImage out(img.width - 1, img.height, img.channels);
        for (int y = 0; y < img.height; ++y) {
            const int sx = seam.coords[y];
            if (sx < 0 || sx >= img.width)
                throw std::invalid_argument("seam: coordinate out of bounds");
            const double* src = &img.data[static_cast<std::size_t>(y) * img.width * img.channels];
            double* dst = &out.data[static_cast<std::size_t>(y) * out.width * out.channels];
            std::copy(src, src + static_cast<std::size_t>(sx) * img.channels, dst);
            std::copy(src + static_cast<std::size_t>(sx + 1) * img.channels,
                      src + static_cast<std::size_t>(img.width) * img.channels,
                      dst + static_cast<std::size_t>(sx) * img.channels);
        }
        return out;
    }
    if (static_cast<int>(seam.coords.size()) != img.width || img.height < 3)
        throw std::invalid_argument("seam: seam does not fit image");
    RasterImage out(img.width, img.height - 1, img.channels);
    for (int x = 0; x < img.width; ++x) {
        const int sy = seam.coords[x];
        if (sy < 0 || sy >= img.height)
            throw std::invalid_argument("seam: coordinate out of bounds");
        for (int y = 0; y < out.height; ++y)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y < sy ? y : y + 1, x, c);
    }
    return out;
}

inline ScalarField remove_seam(const ScalarField& f, const SeamPath& seam) {
    RasterImage tmp(f.width, f.height, 1);
    tmp.data = f.data;
    const RasterImage r = remove_seam(tmp, seam);
    ScalarField out(r.width, r.height);
    out.data = r.data;
    return out;
}

namespace detail {

inline ScalarField backward_energy_of(const RasterImage& img) {
    return gradient_energy(to_luminance(img), GradientNorm::L1);
}

inline SeamPath find_seam(const RasterImage& img, SeamAxis axis, SeamMode mode,
                          const ScalarField* override_map,
                          const ScalarField* inf_mask) {
    if (mode == SeamMode::Backward) {
        ScalarField e = override_map ? *override_map : backward_energy_of(img);
        if (inf_mask)
            for (std::size_t i = 0; i < e.data.size(); ++i) e.data[i] += inf_mask->data[i];
        return backtrack_min_seam(cumulative_backward(e, axis));
    }
    const ScalarField lum = to_luminance(img);
    ScalarField p = override_map ? *override_map : ScalarField(img.width, img.height, 0.0);
    if (inf_mask)
        for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] += inf_mask->data[i];
    return backtrack_min_seam(cumulative_forward(lum, &p, axis));
}

} // namespace detail

// Locates n disjoint minimal seams on img, masking each found seam with
// infinite energy before searching for the next.
inline std::vector<SeamPath> find_disjoint_seams(const RasterImage& img, int n,
                                                 SeamAxis axis, SeamMode mode,
                                                 const ScalarField* override_map = nullptr) {
    const int dim = (axis == SeamAxis::Vertical) ? img.width : img.height;
    if (n < 1 || n > dim) throw std::invalid_argument("seam: seam count out of range");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    ScalarField mask(img.width, img.height, 0.0);
    std::vector<SeamPath> seams;
    seams.reserve(n);
    for (int k = 0; k < n; ++k) {
        SeamPath s = detail::find_seam(img, axis, mode, override_map, &mask);
        if (axis == SeamAxis::Vertical)
            for (int y = 0; y < img.height; ++y) mask.at(y, s.coords[y]) = kInf;
        else
            for (int x = 0; x < img.width; ++x) mask.at(s.coords[x], x) = kInf;
        seams.push_back(std::move(s));
    }
    return seams;
}

// Duplicates the given seams in one pass; each inserted pixel averages the
// seam pixel with its right (vertical) or bottom (horizontal) neighbor.
inline RasterImage apply_insert_seams(const RasterImage& img,
                                      const std::vector<SeamPath>& seams, SeamAxis axis) {
    const int n = static_cast<int>(seams.size());
    if (axis == SeamAxis::Vertical) {
        std::vector<std::vector<int>> cols(img.height);
        for (const SeamPath& s : seams)
            for (int y = 0; y < img.height; ++y) cols[y].push_back(s.coords[y]);
        RasterImage out(img.width + n, img.height, img.channels);
        for (int y = 0; y < img.height; ++y) {
            std::sort(cols[y].begin(), cols[y].end());
            int xo = 0;
            std::size_t next = 0;
            for (int x = 0; x < img.width; ++x) {
                for (int c = 0; c < img.channels; ++c) out.at(y, xo, c) = img.at(y, x, c);
                ++xo;
                while (next < cols[y].size() && cols[y][next] == x) {
                    const int xr = std::min(x + 1, img.width - 1);
                    for (int c = 0; c < img.channels; ++c)
                        out.at(y, xo, c) = 0.5 * (img.at(y, x, c) + img.at(y, xr, c));
                    ++xo;
                    ++next;
                }
            }
        }
        return out;
    }
    std::vector<std::vector<int>> rows(img.width);
    for (const SeamPath& s : seams)
        for (int x = 0; x < img.width; ++x) rows[x].push_back(s.coords[x]);
    RasterImage out(img.width, img.height + n, img.channels);
    for (int x = 0; x < img.width; ++x) {
        std::sort(rows[x].begin(), rows[x].end());
        int yo = 0;
        std::size_t next = 0;
        for (int y = 0; y < img.height; ++y) {
            for (int c = 0; c < img.channels; ++c) out.at(yo, x, c) = img.at(y, x, c);
            ++yo;
            while (next < rows[x].size() && rows[x][next] == y) {
                const int yb = std::min(y + 1, img.height - 1);
                for (int c = 0; c < img.channels; ++c)
                    out.at(yo, x, c) = 0.5 * (img.at(y, x, c) + img.at(yb, x, c));
                ++yo;
                ++next;
            }
        }
    }
    return out;
}

inline ScalarField apply_insert_seams(const ScalarField& f,
                                      const std::vector<SeamPath>& seams, SeamAxis axis) {
    RasterImage tmp(f.width, f.height, 1);
    tmp.data = f.data;
    const RasterImage r = apply_insert_seams(tmp, seams, axis);
    ScalarField out(r.width, r.height);
    out.data = r.data;
    return out;
}

inline RasterImage insert_seams(const RasterImage& img, int n, SeamAxis axis,
                                SeamMode mode, const ScalarField* override_map = nullptr) {
    return apply_insert_seams(img, find_disjoint_seams(img, n, axis, mode, override_map), axis);
}

// Seam positions mapped back to source pixel coordinates, for overlays.
struct SeamOverlayTrace {
    std::vector<std::vector<std::pair<int, int>>> seams; // (x, y) per pixel
};

namespace detail {

// Source-coordinate fields carved alongside the image so seams can be drawn
// on the original after any number of prior removals.
struct SourceTrack {
    ScalarField sx, sy;

    explicit SourceTrack(int w, int h) : sx(w, h), sy(w, h) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                sx.at(y, x) = x;
                sy.at(y, x) = y;
            }
    }
    std::vector<std::pair<int, int>> seam_points(const SeamPath& s) const {
        std::vector<std::pair<int, int>> pts;
        if (s.axis == SeamAxis::Vertical) {
            pts.reserve(sx.height);
            for (int y = 0; y < sx.height; ++y)
                pts.emplace_back(static_cast<int>(std::lround(sx.at(y, s.coords[y]))),
                                 static_cast<int>(std::lround(sy.at(y, s.coords[y]))));
        } else {
            pts.reserve(sx.width);
            for (int x = 0; x < sx.width; ++x)
                pts.emplace_back(static_cast<int>(std::lround(sx.at(s.coords[x], x))),
                                 static_cast<int>(std::lround(sy.at(s.coords[x], x))));
        }
        return pts;
    }
    void remove(const SeamPath& s) {
        sx = remove_seam(sx, s);
        sy = remove_seam(sy, s);
    }
    void insert(const std::vector<SeamPath>& seams, SeamAxis axis) {
        sx = apply_insert_seams(sx, seams, axis);
        sy = apply_insert_seams(sy, seams, axis);
    }
};

} // namespace detail

// Retargets by seam carving: vertical seams until the width matches, then
// horizontal seams for the height. Energy is recomputed from the current
// image after every removal; an override map is carved alongside so its
// dimensions track the image. Enlargement inserts the whole batch at once.
inline RasterImage seam_retarget(const RasterImage& img, int target_w, int target_h,
                                 SeamMode mode, const ScalarField* energy_override = nullptr,
                                 SeamOverlayTrace* trace = nullptr) {
    if (target_w < 2 || target_h < 2)
        throw std::invalid_argument("seam: target below 2 px floor");
    if (energy_override &&
        (energy_override->width != img.width || energy_override->height != img.height))
        throw std::invalid_argument("seam: energy map dimension mismatch");

    RasterImage cur = img;
    std::optional<ScalarField> ov;
    if (energy_override) ov = *energy_override;
    detail::SourceTrack track(img.width, img.height);

    for (SeamAxis axis : {SeamAxis::Vertical, SeamAxis::Horizontal}) {
        const int target = (axis == SeamAxis::Vertical) ? target_w : target_h;
        int dim = (axis == SeamAxis::Vertical) ? cur.width : cur.height;
        while (dim > target) {
            const SeamPath s = detail::find_seam(cur, axis, mode, ov ? &*ov : nullptr, nullptr);
            if (trace) trace->seams.push_back(track.seam_points(s));
            cur = remove_seam(cur, s);
            if (ov) ov = remove_seam(*ov, s);
            track.remove(s);
            --dim;
        }
        if (dim < target) {
            const auto seams =
                find_disjoint_seams(cur, target - dim, axis, mode, ov ? &*ov : nullptr);
            if (trace)
                for (const SeamPath& s : seams) trace->seams.push_back(track.seam_points(s));
            cur = apply_insert_seams(cur, seams, axis);
            if (ov) ov = apply_insert_seams(*ov, seams, axis);
            track.insert(seams, axis);
        }
    }
    return cur;
}

} // namespace triwarp
