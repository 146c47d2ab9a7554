#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace levelplug {

/// Gradient norms (in units of the scan box side) below this count as vanishing.
inline constexpr double kGradientFloor = 1e-6;

/// Largest singular value of a symmetric d x d matrix (row-major), i.e. the
/// operator norm induced by the Euclidean norm.
inline double spectral_norm(std::span<const double> matrix, std::size_t d) {
    detail::require(matrix.size() == d * d, "spectral_norm: expected a d x d matrix");
    Eigen::MatrixXd m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = matrix[i * d + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Extremes of |grad F| and |Hess F| over a grid sample of the tube
/// E = B({|F - c| <= r}, zeta).
struct TubeScan {
    double scan_T = 0.0;
    std::size_t cells = 0;
    std::size_t tube_points = 0;
    double min_gradient = 0.0;
    double max_hessian = 0.0;
};

namespace detail {

/// Squared Euclidean distance transform along one line (lower envelope of
/// parabolas). Entries that are +inf are not sites.
inline void edt_line(std::span<double> f) {
    const std::size_t n = f.size();
    std::vector<double> src(f.begin(), f.end());
    std::vector<std::size_t> v;
    std::vector<double> z;
    v.reserve(n);
    z.reserve(n + 1);
    auto cross = [&](std::size_t q, std::size_t p) {
        const double dq = static_cast<double>(q), dp = static_cast<double>(p);
        return ((src[q] + dq * dq) - (src[p] + dp * dp)) / (2.0 * dq - 2.0 * dp);
    };
    for (std::size_t q = 0; q < n; ++q) {
        if (!std::isfinite(src[q])) continue;
        while (!v.empty()) {
            const double s = cross(q, v.back());
            if (s <= z.back()) {
                v.pop_back();
                z.pop_back();
            } else {
                break;
            }
        }
        z.push_back(v.empty() ? -std::numeric_limits<double>::infinity() : cross(q, v.back()));
        v.push_back(q);
    }
    if (v.empty()) return;
    z.push_back(std::numeric_limits<double>::infinity());
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        const double t = static_cast<double>(q) - static_cast<double>(v[k]);
        f[q] = t * t + src[v[k]];
    }
}

/// Solves F(t, ..., t) = target on the diagonal by bracketing and bisection.
inline double diagonal_level(const AnalyticModel& model, double target) {
    std::vector<double> x(model.dim());
    auto f = [&](double t) {
        std::fill(x.begin(), x.end(), t);
        return model.cdf(x);
    };
    double hi = 1.0 / *std::max_element(model.rates().begin(), model.rates().end());
    while (f(hi) < target) {
        hi *= 2.0;
        if (hi > 1e12) throw ConfigError("tube scan: level not reached along the diagonal");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace detail

/// One pass over [0, scan_T]^d, sampled at the centers of `cells`^d cells.
///
/// scan_T = 2 t* + 2 zeta, with t* the diagonal point where F reaches c + r
/// (or 1 - 1e-9 when c + r >= 1, where the tube runs off to infinity and the
/// gradient decays to zero). Points within zeta of the sampled band
/// {|F - c| <= r} form the tube; distance comes from an exact Euclidean
/// distance transform of the band mask.
inline TubeScan scan_tube(const AnalyticModel& model, double c, double r, double zeta, std::size_t cells) {
    detail::require(c > 0.0 && c < 1.0, "tube scan: level must lie in (0, 1)");
    detail::require(r > 0.0 && zeta > 0.0, "tube scan: r and zeta must be positive");
    detail::require(cells >= 2, "tube scan: need at least 2 cells per axis");
    const std::size_t d = model.dim();

    const double target = c + r < 1.0 ? c + r : 1.0 - 1e-9;
    TubeScan out;
    out.scan_T = 2.0 * detail::diagonal_level(model, target) + 2.0 * zeta;
    out.cells = cells;
    const GridSpec grid(d, out.scan_T, cells);
    const double h = grid.h();
    const std::size_t total = grid.cell_count();

    std::vector<double> dist(total);
    std::vector<std::size_t> idx(d);
    std::vector<double> x(d);
    auto locate = [&](std::size_t p) {
        detail::unravel(p, cells, idx);
        for (std::size_t k = 0; k < d; ++k) x[k] = grid.center_coord(idx[k]);
    };
    bool any_core = false;
    for (std::size_t p = 0; p < total; ++p) {
        locate(p);
        const bool core = std::abs(model.cdf(x) - c) <= r;
        any_core |= core;
        dist[p] = core ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (!any_core) throw ConfigError("tube scan: no scan point satisfies |F - c| <= r; refine the scan");

    std::vector<double> line(cells);
    std::size_t stride = 1;
    for (std::size_t axis = d; axis-- > 0;) {
        const std::size_t block = stride * cells;
        for (std::size_t base = 0; base < total; base += block)
            for (std::size_t t = 0; t < stride; ++t) {
                for (std::size_t j = 0; j < cells; ++j) line[j] = dist[base + j * stride + t];
                detail::edt_line(line);
                for (std::size_t j = 0; j < cells; ++j) dist[base + j * stride + t] = line[j];
            }
        stride *= cells;
    }

    const double reach = (zeta / h) * (zeta / h);
    out.min_gradient = std::numeric_limits<double>::infinity();
    out.max_hessian = 0.0;
    for (std::size_t p = 0; p < total; ++p) {
        if (!(dist[p] <= reach)) continue;
        locate(p);
        ++out.tube_points;
        const auto g = model.gradient(x);
        double n2 = 0.0;
        for (double v : g) n2 += v * v;
        out.min_gradient = std::min(out.min_gradient, std::sqrt(n2));
        out.max_hessian = std::max(out.max_hessian, spectral_norm(model.hessian(x), d));
    }
    return out;
}

/// A grid-scan estimate: `raw` from the requested resolution, `refined` after
/// doubling the resolution until the value moves by less than 1% (or the scan
/// would exceed ~4M points).
struct ScanEstimate {
    double raw = 0.0;
    double refined = 0.0;
    double scan_T = 0.0;
    std::size_t refined_cells = 0;
};

namespace detail {

inline constexpr std::size_t kMaxScanPoints = std::size_t{1} << 22;

template <typename Pick>
ScanEstimate refine_scan(const AnalyticModel& model, double c, double r, double zeta, std::size_t cells, Pick pick) {
    TubeScan first = scan_tube(model, c, r, zeta, cells);
    ScanEstimate est{pick(first), pick(first), first.scan_T, cells};
    double prev = est.raw;
    while (GridSpec::ipow(cells * 2, model.dim()) <= kMaxScanPoints && prev > 0.0) {
        cells *= 2;
        const double cur = pick(scan_tube(model, c, r, zeta, cells));
        est.refined = cur;
        est.refined_cells = cells;
        if (std::abs(cur - prev) < 0.01 * std::abs(prev)) break;
        prev = cur;
    }
    return est;
}

}  // namespace detail

/// inf of |grad F| over the tube. The scan minimum over a finite sample is an
/// upper estimate of the true infimum.
inline ScanEstimate estimate_m_grad(const AnalyticModel& model, double c, double r, double zeta,
                                    std::size_t scan_cells) {
    return detail::refine_scan(model, c, r, zeta, scan_cells, [](const TubeScan& s) { return s.min_gradient; });
}

/// sup of the Hessian spectral norm over the tube.
inline ScanEstimate estimate_M_H(const AnalyticModel& model, double c, double r, double zeta,
                                 std::size_t scan_cells) {
    return detail::refine_scan(model, c, r, zeta, scan_cells, [](const TubeScan& s) { return s.max_hessian; });
}

/// Constants of the level-set regularity condition at level c.
///
/// A = 2 / m_grad uses the scan at the requested resolution; the refined
/// infimum is carried alongside for reporting. gamma, the validity radius of
/// the level-stability condition, is set to r by convention.
struct TheoryConstants {
    double c = 0.0;
    double r = 0.0;
    double zeta = 0.0;
    double m_grad = 0.0;
    double m_grad_refined = 0.0;
    double M_H = 0.0;
    double A = 0.0;
    double gamma = 0.0;
    double scan_T = 0.0;

    /// Positive gradient infimum and finite Hessian supremum. The gradient is
    /// compared in units of the scan box, so the verdict does not depend on
    /// the scale of the data.
    bool hypotheses_hold() const { return m_grad * scan_T > kGradientFloor && std::isfinite(M_H); }
};

inline TheoryConstants compute_constants(const AnalyticModel& model, double c, double r, double zeta,
                                         std::size_t scan_cells) {
    const ScanEstimate g = estimate_m_grad(model, c, r, zeta, scan_cells);
    const ScanEstimate h = estimate_M_H(model, c, r, zeta, scan_cells);
    TheoryConstants k;
    k.c = c;
    k.r = r;
    k.zeta = zeta;
    k.m_grad = g.raw;
    k.m_grad_refined = g.refined;
    k.M_H = std::max(h.raw, h.refined);
    k.A = g.raw > 0.0 ? 2.0 / g.raw : std::numeric_limits<double>::infinity();
    k.gamma = r;
    k.scan_T = g.scan_T;
    return k;
}

inline double scaled_m_grad(double m_grad, double a) {
    detail::require(a > 0.0, "scaled_m_grad: scale factor must be positive");
    return m_grad / a;
}

/// Constants for the data a*X: gradient infimum / a, Hessian supremum / a^2,
/// tube radius * a, A * a.
inline TheoryConstants scale_constants(const TheoryConstants& k, double a) {
    detail::require(a > 0.0, "scale_constants: scale factor must be positive");
    TheoryConstants s = k;
    s.zeta = k.zeta * a;
    s.m_grad = scaled_m_grad(k.m_grad, a);
    s.m_grad_refined = scaled_m_grad(k.m_grad_refined, a);
    s.M_H = k.M_H / (a * a);
    s.A = 2.0 / s.m_grad;
    s.scan_T = k.scan_T * a;
    return s;
}

/// 6 A a |F - F_n|_inf: the Hausdorff-distance bound between the true and
/// plug-in level curves (a = 1 for unscaled data).
inline double hausdorff_bound(const TheoryConstants& k, double supnorm, double a = 1.0) {
    if (!k.hypotheses_hold()) throw GateError("hausdorff_bound: gradient infimum is ~0 or M_H is infinite");
    detail::require(a > 0.0, "hausdorff_bound: scale factor must be positive");
    return 6.0 * k.A * a * supnorm;
}

/// 2 eps A d T^(d-1): bound on the volume of {c - eps <= F < c + eps} in [0, T]^d.
inline double band_volume_bound(const TheoryConstants& k, double eps, std::size_t d, double T) {
    detail::require(eps >= 0.0, "band_volume_bound: eps must be nonnegative");
    return 2.0 * eps * k.A * static_cast<double>(d) * std::pow(T, static_cast<double>(d) - 1.0);
}

// ---------------------------------------------------------------------------
// Rate schedules

/// Which convergence statement the sequence v_n belongs to: `integral` means
/// v_n * int |F - F_n|^p -> 0, `supnorm` means v_n * |F - F_n|_inf -> 0.
enum class RateRoute { Integral, Supnorm };

/// Power-law sequences T_n = T0 n^tau and v_n = v_scale n^beta_v, plus the
/// slack delta standing in for a little-o (delta > 0 stays strictly below the
/// admissible ceiling; delta <= 0 is only meaningful as a negative control).
struct RateSchedule {
    std::size_t d = 2;
    double p = 2.0;
    double beta_v = 0.5;
    double tau = 0.0;
    double T0 = 1.0;
    double delta = 0.05;
    double v_scale = 1.0;
    RateRoute route = RateRoute::Supnorm;

    void validate() const {
        detail::require(d >= 1, "rate schedule: d must be >= 1");
        detail::require(p >= 1.0 && std::isfinite(p), "rate schedule: p must be >= 1");
        detail::require(beta_v > 0.0, "rate schedule: v_n must increase (beta_v > 0)");
        detail::require(tau >= 0.0, "rate schedule: T_n must be nondecreasing (tau >= 0)");
        detail::require(T0 > 0.0 && v_scale > 0.0, "rate schedule: scales must be positive");
        detail::require(std::isfinite(delta), "rate schedule: delta must be finite");
    }

    double T_n(double n) const { return T0 * std::pow(n, tau); }
    double v_n(double n) const { return v_scale * std::pow(n, beta_v); }

    /// The sequence that multiplies int |F - F_n|^p: v_n itself on the
    /// integral route, v_n^p / T_n^d on the supnorm route.
    double integral_rate(double n) const {
        if (route == RateRoute::Integral) return v_n(n);
        return std::pow(v_n(n), p) / std::pow(T_n(n), static_cast<double>(d));
    }
};

/// p_n = scale * n^(n_exponent - slack) / (T_n^T_exponent * a^a_exponent).
struct RateRule {
    double n_exponent = 0.0;
    double T_exponent = 0.0;
    double a_exponent = 0.0;
    double slack = 0.0;
    double scale = 1.0;
    double T0 = 1.0;
    double tau = 0.0;
    double a = 1.0;

    /// Net power of n once T_n = T0 n^tau is substituted.
    double effective_exponent() const { return n_exponent - slack - tau * T_exponent; }

    double operator()(double n) const {
        const double Tn = T0 * std::pow(n, tau);
        return scale * std::pow(n, n_exponent - slack) / (std::pow(Tn, T_exponent) * std::pow(a, a_exponent));
    }
};

namespace detail {

inline RateRule finish_rule(RateRule rule) {
    if (!(rule.effective_exponent() > 0.0))
        throw ParameterError("rate schedule admits no increasing p_n (net exponent " +
                             std::to_string(rule.effective_exponent()) + ")");
    return rule;
}

}  // namespace detail

/// Integral route: p_n = o(v_n^(1/(p+1)) / T_n^((d-1)p/(p+1))), and for data
/// scaled by a an extra divisor a^(dp/(p+1)). `schedule.beta_v` is read as the
/// exponent of the integral-convergence sequence regardless of its route tag.
inline RateRule rate_pn(const RateSchedule& s, double a = 1.0) {
    s.validate();
    detail::require(a > 0.0, "rate_pn: scale factor must be positive");
    const double d = static_cast<double>(s.d);
    RateRule rule;
    rule.n_exponent = s.beta_v / (s.p + 1.0);
    rule.T_exponent = (d - 1.0) * s.p / (s.p + 1.0);
    rule.a_exponent = d * s.p / (s.p + 1.0);
    rule.slack = s.delta;
    rule.scale = std::pow(s.v_scale, 1.0 / (s.p + 1.0));
    rule.T0 = s.T0;
    rule.tau = s.tau;
    rule.a = a;
    return detail::finish_rule(rule);
}

/// Sup-norm route: p_n = o(v_n^(p/(p+1)) / T_n^((d + (d-1)p)/(p+1))), the
/// integral route fed with w_n = v_n^p / T_n^d.
inline RateRule rate_pn_supnorm(const RateSchedule& s, double a = 1.0) {
    s.validate();
    detail::require(a > 0.0, "rate_pn_supnorm: scale factor must be positive");
    const double d = static_cast<double>(s.d);
    RateRule rule;
    rule.n_exponent = s.beta_v * s.p / (s.p + 1.0);
    rule.T_exponent = (d + (d - 1.0) * s.p) / (s.p + 1.0);
    rule.a_exponent = d * s.p / (s.p + 1.0);
    rule.slack = s.delta;
    rule.scale = std::pow(s.v_scale, s.p / (s.p + 1.0));
    rule.T0 = s.T0;
    rule.tau = s.tau;
    rule.a = a;
    return detail::finish_rule(rule);
}

inline RateRule rate_pn_supnorm(std::size_t d, double p, double beta_v, double tau, double delta, double a = 1.0) {
    RateSchedule s;
    s.d = d;
    s.p = p;
    s.beta_v = beta_v;
    s.tau = tau;
    s.delta = delta;
    return rate_pn_supnorm(s, a);
}

/// Dispatches on the schedule's route.
inline RateRule rate_rule(const RateSchedule& s, double a = 1.0) {
    return s.route == RateRoute::Supnorm ? rate_pn_supnorm(s, a) : rate_pn(s, a);
}

/// (p_n / v_n)^(1/p), with v_n the integral-convergence sequence.
inline double eps_n(double p_n_value, double v_n_value, double p) {
    detail::require(p_n_value > 0.0 && v_n_value > 0.0 && p > 0.0, "eps_n: arguments must be positive");
    return std::pow(p_n_value / v_n_value, 1.0 / p);
}

}  // namespace levelplug
