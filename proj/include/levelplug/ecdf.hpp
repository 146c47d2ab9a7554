#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distributions.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "sample.hpp"

namespace levelplug {

/// (1/n) #{i : X_i <= x componentwise}, closed comparison.
inline double ecdf_eval(const Sample& sample, std::span<const double> x) {
    if (x.size() != sample.dim()) throw ParameterError("ecdf_eval: point dimension does not match sample");
    std::size_t count = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto p = sample.point(i);
        bool dominated = true;
        for (std::size_t k = 0; k < p.size() && dominated; ++k) dominated = p[k] <= x[k];
        count += dominated;
    }
    return static_cast<double>(count) / static_cast<double>(sample.size());
}

/// Empirical CDF at every vertex of `grid`.
///
/// Each point is dropped into the lowest vertex that dominates it (points with
/// a coordinate beyond T dominate no vertex and are skipped), then a running
/// sum along each axis turns the bin counts into dominance counts.
/// Cost O(n*d + d*(m+1)^d) time, O((m+1)^d) memory. Values agree exactly with
/// ecdf_eval at the vertex coordinates.
inline ScalarField ecdf_eval_grid(const Sample& sample, const GridSpec& grid) {
    if (grid.dim != sample.dim()) throw ParameterError("ecdf_eval_grid: grid dimension does not match sample");
    const std::size_t d = grid.dim;
    const std::size_t m = grid.cells;
    const std::size_t extent = m + 1;
    const double inv_h = static_cast<double>(m) / grid.T;

    std::vector<std::uint64_t> counts(grid.vertex_count(), 0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto p = sample.point(i);
        std::size_t lin = 0;
        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
            const double x = p[k];
            if (x > grid.T) {
                inside = false;
                break;
            }
            // Guess from the cell width, then settle against the exact vertex coordinates.
            auto j = static_cast<std::size_t>(std::min<double>(std::ceil(x * inv_h), static_cast<double>(m)));
            while (j > 0 && grid.vertex_coord(j - 1) >= x) --j;
            while (grid.vertex_coord(j) < x) ++j;
            lin = lin * extent + j;
        }
        if (inside) ++counts[lin];
    }

    std::size_t inner = 1;
    for (std::size_t axis = d; axis-- > 0;) {
        const std::size_t stride = inner;
        const std::size_t block = stride * extent;
        for (std::size_t base = 0; base < counts.size(); base += block)
            for (std::size_t j = 1; j < extent; ++j)
                for (std::size_t t = 0; t < stride; ++t)
                    counts[base + j * stride + t] += counts[base + (j - 1) * stride + t];
        inner *= extent;
    }

    std::vector<double> values(counts.size());
    const auto n = static_cast<double>(sample.size());
    for (std::size_t v = 0; v < counts.size(); ++v) values[v] = static_cast<double>(counts[v]) / n;
    return ScalarField(grid, std::move(values));
}

inline ScalarField analytic_field(const AnalyticModel& model, const GridSpec& grid) {
    if (grid.dim != model.dim()) throw ParameterError("analytic_field: grid dimension does not match model");
    return sample_field(grid, [&](std::span<const double> x) { return model.cdf(x); });
}

/// max over vertices of |A - B|; a lower bound of the continuous sup norm on
/// [0, T]^d, with gap at most the fields' modulus of continuity over one cell.
inline double sup_distance(const ScalarField& a, const ScalarField& b) {
    detail::check_same_grid(a.grid, b.grid, "sup_distance");
    double s = 0.0;
    for (std::size_t v = 0; v < a.values.size(); ++v) s = std::max(s, std::abs(a.values[v] - b.values[v]));
    return s;
}

/// Midpoint rule for the integral of |A - B|^p over [0, T]^d, with the
/// difference interpolated to cell centers.
inline double lp_distance(const ScalarField& a, const ScalarField& b, double p) {
    detail::check_same_grid(a.grid, b.grid, "lp_distance");
    detail::require(p >= 1.0, "lp_distance: p must be >= 1");
    std::vector<double> diff(a.values.size());
    for (std::size_t v = 0; v < diff.size(); ++v) diff[v] = a.values[v] - b.values[v];
    const auto centers = cell_center_values(ScalarField(a.grid, std::move(diff)));
    double sum = 0.0;
    for (double c : centers) sum += std::pow(std::abs(c), p);
    return sum * a.grid.cell_volume();
}

}  // namespace levelplug
