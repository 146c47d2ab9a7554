#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "distributions.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "sample.hpp"

namespace levelplug {

/// Cell-wise set estimate on a grid: inside[cell] is 1 when the cell belongs
/// to the set.
struct LevelSetMask {
    GridSpec grid;
    std::vector<std::uint8_t> inside;

    LevelSetMask(GridSpec g, std::vector<std::uint8_t> in) : grid(std::move(g)), inside(std::move(in)) {
        detail::require(inside.size() == grid.cell_count(), "LevelSetMask: one flag per cell required");
    }

    std::size_t count() const { return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 1)); }
    double volume() const { return static_cast<double>(count()) * grid.cell_volume(); }

    bool operator==(const LevelSetMask&) const = default;
};

/// Finite point sample of a level curve, with the spacing of the grid that
/// produced it (cell diameter h*sqrt(d)).
struct BoundaryPoints {
    std::size_t dim = 2;
    std::vector<double> coords;  // row-major
    double resolution = 0.0;

    std::size_t size() const noexcept { return coords.size() / dim; }
    bool empty() const noexcept { return coords.empty(); }
    std::span<const double> point(std::size_t i) const noexcept { return {coords.data() + i * dim, dim}; }
};

/// L_n(c)^T on the grid: a cell is inside when the multilinear interpolation
/// of the field at its center is >= c.
inline LevelSetMask plug_in_levelset(const ScalarField& field, double c) {
    detail::require(c > 0.0 && c < 1.0, "plug_in_levelset: level must lie in (0, 1)");
    const auto centers = cell_center_values(field);
    std::vector<std::uint8_t> inside(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) inside[i] = centers[i] >= c;
    return LevelSetMask(field.grid, std::move(inside));
}

/// Centers of inside cells with at least one face-adjacent outside cell.
/// Neighbors beyond the box count as inside, so the truncation walls never
/// show up: what remains samples the level curve {F = c} within [0, T]^d.
/// Output is in lexicographic order.
inline BoundaryPoints extract_boundary(const LevelSetMask& mask) {
    const GridSpec& g = mask.grid;
    const std::size_t d = g.dim;
    const std::size_t m = g.cells;
    BoundaryPoints out{d, {}, g.cell_diameter()};

    std::vector<std::size_t> strides(d, 1);
    for (std::size_t k = d - 1; k-- > 0;) strides[k] = strides[k + 1] * m;

    std::vector<std::size_t> idx(d);
    for (std::size_t cell = 0; cell < mask.inside.size(); ++cell) {
        if (!mask.inside[cell]) continue;
        detail::unravel(cell, m, idx);
        bool edge = false;
        for (std::size_t k = 0; k < d && !edge; ++k) {
            if (idx[k] > 0 && !mask.inside[cell - strides[k]]) edge = true;
            if (idx[k] + 1 < m && !mask.inside[cell + strides[k]]) edge = true;
        }
        if (!edge) continue;
        for (std::size_t k = 0; k < d; ++k) out.coords.push_back(g.center_coord(idx[k]));
    }
    return out;
}

/// Samples {F = c} within [0, T]^d by bisection on every grid line parallel
/// to an axis whose endpoints bracket c. Points are sorted lexicographically.
/// Returns an empty set when the curve misses the box.
inline BoundaryPoints analytic_boundary(const AnalyticModel& model, double c, const GridSpec& grid, double tol) {
    detail::require(c > 0.0 && c < 1.0, "analytic_boundary: level must lie in (0, 1)");
    detail::require(tol > 0.0, "analytic_boundary: tolerance must be positive");
    if (grid.dim != model.dim()) throw ParameterError("analytic_boundary: grid dimension does not match model");

    const std::size_t d = grid.dim;
    const std::size_t lines = GridSpec::ipow(grid.vertices_per_axis(), d - 1);
    std::vector<std::vector<double>> found;
    std::vector<std::size_t> other(d - 1);
    std::vector<double> x(d);

    for (std::size_t axis = 0; axis < d; ++axis) {
        for (std::size_t line = 0; line < lines; ++line) {
            detail::unravel(line, grid.vertices_per_axis(), other);
            for (std::size_t k = 0, o = 0; k < d; ++k)
                if (k != axis) x[k] = grid.vertex_coord(other[o++]);
            auto f_at = [&](double t) {
                x[axis] = t;
                return model.cdf(x);
            };
            if (!(f_at(0.0) < c && c < f_at(grid.T))) continue;
            double lo = 0.0, hi = grid.T;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (f_at(mid) < c ? lo : hi) = mid;
            }
            x[axis] = 0.5 * (lo + hi);
            found.push_back(x);
        }
    }
    std::sort(found.begin(), found.end());

    BoundaryPoints out{d, {}, grid.cell_diameter()};
    out.coords.reserve(found.size() * d);
    for (const auto& p : found) out.coords.insert(out.coords.end(), p.begin(), p.end());
    return out;
}

inline BoundaryPoints scale_points(const BoundaryPoints& points, double a) {
    detail::require(a > 0.0, "scale_points: scale factor must be positive");
    BoundaryPoints out = points;
    for (double& v : out.coords) v *= a;
    out.resolution *= a;
    return out;
}

inline Sample scale_sample(const Sample& sample, double a) {
    detail::require(a > 0.0, "scale_sample: scale factor must be positive");
    std::vector<double> coords = sample.coords();
    for (double& v : coords) v *= a;
    return Sample(sample.dim(), std::move(coords));
}

/// Both F(T1, ..., T1) > c + r and F(0) < c - r, so every level t with
/// |t - c| <= r crosses the box [0, T1]^d.
inline bool level_curves_cross_box(const AnalyticModel& model, double c, double r, double T1) {
    std::vector<double> corner(model.dim(), T1);
    std::vector<double> origin(model.dim(), 0.0);
    return model.cdf(corner) > c + r && model.cdf(origin) < c - r;
}

// ---------------------------------------------------------------------------
// Text formats

/// d columns per row, 17 significant digits, no header.
inline void write_boundary_csv(const BoundaryPoints& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write boundary file: " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto p = points.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << p[k];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Run-length mask format, version 1:
///
///     levelplug-mask 1
///     dim <d> T <T> cells <m>
///     <one line per row along the last axis>
///
/// Rows follow the lexicographic order of the leading d-1 cell indices. Each
/// row lists run lengths alternating outside/inside, starting with an outside
/// run (possibly 0); the runs sum to m.
inline void write_mask_rle(const LevelSetMask& mask, std::ostream& out) {
    const std::size_t m = mask.grid.cells;
    out << "levelplug-mask 1\n";
    out << "dim " << mask.grid.dim << " T " << std::setprecision(17) << mask.grid.T << " cells " << m << '\n';
    for (std::size_t row = 0; row < mask.inside.size(); row += m) {
        std::uint8_t state = 0;
        std::size_t run = 0;
        bool first = true;
        for (std::size_t j = 0; j < m; ++j) {
            if (mask.inside[row + j] != state) {
                out << (first ? "" : " ") << run;
                first = false;
                state = mask.inside[row + j];
                run = 0;
            }
            ++run;
        }
        out << (first ? "" : " ") << run << '\n';
    }
}

inline LevelSetMask read_mask_rle(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "levelplug-mask") throw IoError("not a levelplug mask file");
    if (version != 1) throw IoError("unsupported mask format version " + std::to_string(version));
    std::string kd, kt, km;
    std::size_t dim = 0, m = 0;
    double T = 0.0;
    if (!(in >> kd >> dim >> kt >> T >> km >> m) || kd != "dim" || kt != "T" || km != "cells")
        throw IoError("malformed mask header");
    GridSpec grid;
    try {
        grid = GridSpec(dim, T, m);
    } catch (const ParameterError& e) {
        throw IoError(std::string("mask header: ") + e.what());
    }
    std::vector<std::uint8_t> inside;
    inside.reserve(grid.cell_count());
    std::string line;
    std::getline(in, line);
    for (std::size_t row = 0; row < grid.cell_count() / m; ++row) {
        if (!std::getline(in, line)) throw IoError("mask file truncated");
        std::istringstream runs(line);
        std::size_t run = 0, total = 0;
        std::uint8_t state = 0;
        while (runs >> run) {
            total += run;
            if (total > m) throw IoError("mask row longer than the grid");
            inside.insert(inside.end(), run, state);
            state ^= 1;
        }
        if (total != m) throw IoError("mask row length does not match the grid");
    }
    return LevelSetMask(grid, std::move(inside));
}

}  // namespace levelplug
