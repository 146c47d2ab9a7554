#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "levelset.hpp"

namespace levelplug {

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

inline void check_hausdorff_inputs(const BoundaryPoints& a, const BoundaryPoints& b) {
    if (a.empty() || b.empty()) throw EmptySetError("hausdorff: both point sets must be nonempty");
    if (a.dim != b.dim) throw ParameterError("hausdorff: point sets have different dimensions");
}

/// Uniform bucket grid over the points of one set, for nearest-neighbour
/// queries by expanding Chebyshev shells.
class BucketGrid {
public:
    BucketGrid(const BoundaryPoints& pts, std::span<const double> lo, std::span<const double> hi) : pts_(pts) {
        const std::size_t d = pts.dim;
        lo_.assign(lo.begin(), lo.end());
        double extent = 0.0;
        for (std::size_t k = 0; k < d; ++k) extent = std::max(extent, hi[k] - lo[k]);
        const double per_axis = std::ceil(std::pow(static_cast<double>(pts.size()), 1.0 / static_cast<double>(d)));
        const double max_axis = std::floor(std::pow(2.0, 62.0 / static_cast<double>(d)));
        const double buckets = std::clamp(per_axis, 1.0, max_axis - 1.0);
        size_ = extent > 0.0 ? extent / buckets : 1.0;
        span_ = static_cast<std::int64_t>(buckets) + 1;
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(cell_of(pts.point(i)))].push_back(i);
    }

    /// Squared distance from x to the nearest stored point; stops early and
    /// returns a value below `enough` once one is found below it.
    double nearest_sq(std::span<const double> x, double enough) const {
        const std::size_t d = pts_.dim;
        const auto q = cell_of(x);
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::int64_t> lo(d), hi(d), c(d);
        for (std::int64_t r = 0; r <= span_; ++r) {
            for (std::size_t k = 0; k < d; ++k) {
                lo[k] = std::max<std::int64_t>(0, q[k] - r);
                hi[k] = std::min<std::int64_t>(span_ - 1, q[k] + r);
            }
            c = lo;
            for (;;) {
                std::int64_t cheb = 0;
                for (std::size_t k = 0; k < d; ++k) cheb = std::max(cheb, std::abs(c[k] - q[k]));
                if (cheb == r) {
                    if (auto it = cells_.find(key(c)); it != cells_.end())
                        for (std::size_t i : it->second) best = std::min(best, squared_distance(x, pts_.point(i)));
                }
                std::size_t k = d;
                while (k-- > 0) {
                    if (++c[k] <= hi[k]) break;
                    c[k] = lo[k];
                }
                if (k == static_cast<std::size_t>(-1)) break;
            }
            if (best < enough) return best;
            // Anything not yet visited is at least r bucket widths away.
            const double reach = static_cast<double>(r) * size_;
            if (best < reach * reach * (1.0 - 1e-9)) return best;
        }
        return best;
    }

private:
    std::vector<std::int64_t> cell_of(std::span<const double> x) const {
        std::vector<std::int64_t> c(x.size());
        for (std::size_t k = 0; k < x.size(); ++k)
            c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((x[k] - lo_[k]) / size_)), 0,
                                            span_ - 1);
        return c;
    }

    std::uint64_t key(const std::vector<std::int64_t>& c) const {
        std::uint64_t k = 0;
        for (auto v : c) k = k * static_cast<std::uint64_t>(span_) + static_cast<std::uint64_t>(v);
        return k;
    }

    const BoundaryPoints& pts_;
    std::vector<double> lo_;
    double size_ = 1.0;
    std::int64_t span_ = 1;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Directed distance sup_{x in from} d(x, to), brute force.
inline double directed_hausdorff_bruteforce(const BoundaryPoints& from, const BoundaryPoints& to) {
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < to.size(); ++j) {
            best = std::min(best, detail::squared_distance(from.point(i), to.point(j)));
            if (best <= worst) break;  // cannot raise the max
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

/// Reference O(|A||B|) Hausdorff distance between finite point sets.
inline double hausdorff_bruteforce(const BoundaryPoints& a, const BoundaryPoints& b) {
    detail::check_hausdorff_inputs(a, b);
    return std::max(directed_hausdorff_bruteforce(a, b), directed_hausdorff_bruteforce(b, a));
}

/// Hausdorff distance between finite point sets, using bucket grids for the
/// nearest-neighbour searches. Returns the same value as the brute force.
inline double hausdorff(const BoundaryPoints& a, const BoundaryPoints& b) {
    detail::check_hausdorff_inputs(a, b);
    const std::size_t d = a.dim;
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (const BoundaryPoints* s : {&a, &b})
        for (std::size_t i = 0; i < s->size(); ++i)
            for (std::size_t k = 0; k < d; ++k) {
                lo[k] = std::min(lo[k], s->point(i)[k]);
                hi[k] = std::max(hi[k], s->point(i)[k]);
            }

    auto directed = [&](const BoundaryPoints& from, const BoundaryPoints& to) {
        detail::BucketGrid index(to, lo, hi);
        double worst = 0.0;
        for (std::size_t i = 0; i < from.size(); ++i) {
            // Stopping below `worst` is safe: such a point cannot raise the max.
            const double best = index.nearest_sq(from.point(i), worst);
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

/// Lebesgue measure of the symmetric difference: differing cells times h^d.
inline double sym_diff_volume(const LevelSetMask& a, const LevelSetMask& b) {
    detail::check_same_grid(a.grid, b.grid, "sym_diff_volume");
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.inside.size(); ++i) differ += a.inside[i] != b.inside[i];
    return static_cast<double>(differ) * a.grid.cell_volume();
}

/// Volume of {c - eps <= F < c + eps} within the box, with F read at cell
/// centers.
inline double band_volume(const ScalarField& field, double c, double eps) {
    detail::require(eps >= 0.0, "band_volume: eps must be nonnegative");
    const auto centers = cell_center_values(field);
    std::size_t in_band = 0;
    for (double v : centers) in_band += (c - eps <= v && v < c + eps);
    return static_cast<double>(in_band) * field.grid.cell_volume();
}

}  // namespace levelplug
