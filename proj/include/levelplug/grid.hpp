#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace levelplug {

/// Regular discretization of the box [0, T]^d with m cells per axis.
///
/// Vertex j on an axis sits at T*j/m (so vertex m is exactly T); cell j spans
/// [T*j/m, T*(j+1)/m] and has its center at T*(j+0.5)/m. Vertex and cell
/// arrays are row-major with axis 0 varying slowest, so ascending index order
/// is lexicographic order of coordinates.
struct GridSpec {
    std::size_t dim = 2;
    double T = 1.0;
    std::size_t cells = 2;

    GridSpec() = default;
    GridSpec(std::size_t dim_, double T_, std::size_t cells_) : dim(dim_), T(T_), cells(cells_) {
        detail::require(dim >= 1, "GridSpec: dimension must be >= 1");
        detail::require(T > 0.0 && std::isfinite(T), "GridSpec: T must be positive and finite");
        detail::require(cells >= 2, "GridSpec: need at least 2 cells per axis");
    }

    double h() const noexcept { return T / static_cast<double>(cells); }
    double cell_diameter() const noexcept { return h() * std::sqrt(static_cast<double>(dim)); }
    double cell_volume() const noexcept { return std::pow(h(), static_cast<double>(dim)); }

    std::size_t vertices_per_axis() const noexcept { return cells + 1; }
    std::size_t vertex_count() const noexcept { return ipow(cells + 1, dim); }
    std::size_t cell_count() const noexcept { return ipow(cells, dim); }

    double vertex_coord(std::size_t j) const noexcept {
        return T * static_cast<double>(j) / static_cast<double>(cells);
    }
    double center_coord(std::size_t j) const noexcept {
        return T * (static_cast<double>(j) + 0.5) / static_cast<double>(cells);
    }

    /// Same m, box scaled to [0, a*T]^d.
    GridSpec scaled(double a) const {
        detail::require(a > 0.0, "GridSpec::scaled: scale factor must be positive");
        return GridSpec(dim, a * T, cells);
    }

    bool operator==(const GridSpec&) const = default;

    static std::size_t ipow(std::size_t base, std::size_t e) noexcept {
        std::size_t r = 1;
        for (std::size_t i = 0; i < e; ++i) r *= base;
        return r;
    }
};

namespace detail {

/// Decompose a row-major linear index over a cube of side `extent`.
inline void unravel(std::size_t index, std::size_t extent, std::span<std::size_t> out) {
    for (std::size_t k = out.size(); k-- > 0;) {
        out[k] = index % extent;
        index /= extent;
    }
}

inline std::size_t ravel(std::span<const std::size_t> idx, std::size_t extent) {
    std::size_t r = 0;
    for (std::size_t v : idx) r = r * extent + v;
    return r;
}

inline void check_same_grid(const GridSpec& a, const GridSpec& b, const char* who) {
    if (!(a == b)) throw ParameterError(std::string(who) + ": fields live on different grids");
}

}  // namespace detail

/// One real value per grid vertex.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField(GridSpec g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        detail::require(values.size() == grid.vertex_count(),
                        "ScalarField: value count must equal the grid vertex count");
    }

    double at(std::span<const std::size_t> idx) const {
        return values[detail::ravel(idx, grid.vertices_per_axis())];
    }
};

/// Evaluates f at every vertex. f receives the vertex coordinates as a span.
template <typename F>
ScalarField sample_field(const GridSpec& grid, F&& f) {
    std::vector<double> values(grid.vertex_count());
    std::vector<std::size_t> idx(grid.dim);
    std::vector<double> x(grid.dim);
    for (std::size_t v = 0; v < values.size(); ++v) {
        detail::unravel(v, grid.vertices_per_axis(), idx);
        for (std::size_t k = 0; k < grid.dim; ++k) x[k] = grid.vertex_coord(idx[k]);
        values[v] = f(std::span<const double>(x));
    }
    return ScalarField(grid, std::move(values));
}

/// Multilinear interpolation of the vertex values at every cell center,
/// computed as successive midpoint averages along each axis. A constant field
/// stays bitwise constant. O(d * (m+1)^d).
inline std::vector<double> cell_center_values(const ScalarField& field) {
    const std::size_t d = field.grid.dim;
    const std::size_t m = field.grid.cells;
    std::vector<std::size_t> extents(d, m + 1);
    std::vector<double> cur = field.values;
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::size_t outer = 1, inner = 1;
        for (std::size_t k = 0; k < axis; ++k) outer *= extents[k];
        for (std::size_t k = axis + 1; k < d; ++k) inner *= extents[k];
        const std::size_t len = extents[axis];
        std::vector<double> next(outer * (len - 1) * inner);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t j = 0; j + 1 < len; ++j) {
                const double* lo = cur.data() + (o * len + j) * inner;
                const double* hi = lo + inner;
                double* dst = next.data() + (o * (len - 1) + j) * inner;
                for (std::size_t i = 0; i < inner; ++i) dst[i] = 0.5 * (lo[i] + hi[i]);
            }
        }
        extents[axis] = len - 1;
        cur = std::move(next);
    }
    return cur;
}

}  // namespace levelplug
