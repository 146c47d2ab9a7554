#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "sample.hpp"

namespace levelplug {

enum class Family { IndepExponential, ClaytonExponential };

inline std::string_view family_name(Family f) {
    return f == Family::IndepExponential ? "IndepExponential" : "ClaytonExponential";
}

inline Family parse_family(std::string_view name) {
    if (name == "IndepExponential") return Family::IndepExponential;
    if (name == "ClaytonExponential") return Family::ClaytonExponential;
    throw ParameterError("unknown distribution family: " + std::string(name));
}

/// Ground-truth d-variate distribution on R^d_+ with exponential margins
/// u_i = 1 - exp(-rate_i x_i), joined either independently or by a Clayton
/// copula C(u) = (sum u_i^-theta - d + 1)^(-1/theta). Immutable; safe to share
/// across threads.
class AnalyticModel {
public:
    AnalyticModel(Family family, std::size_t dim, std::vector<double> rates, double theta)
        : family_(family), rates_(std::move(rates)), theta_(theta) {
        detail::require(dim >= 2, "make_model: dimension must be >= 2");
        detail::require(rates_.size() == dim, "make_model: need one margin rate per dimension");
        for (double r : rates_)
            detail::require(r > 0.0 && std::isfinite(r), "make_model: margin rates must be positive");
        if (family_ == Family::ClaytonExponential)
            detail::require(theta_ > 0.0 && std::isfinite(theta_), "make_model: Clayton theta must be positive");
    }

    Family family() const noexcept { return family_; }
    std::size_t dim() const noexcept { return rates_.size(); }
    const std::vector<double>& rates() const noexcept { return rates_; }
    double theta() const noexcept { return theta_; }

    double cdf(std::span<const double> x) const {
        check_point(x, false);
        const std::size_t d = dim();
        if (family_ == Family::IndepExponential) {
            double p = 1.0;
            for (std::size_t i = 0; i < d; ++i) p *= margin(i, x[i]);
            return p;
        }
        double s = 1.0 - static_cast<double>(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double u = margin(i, x[i]);
            if (u == 0.0) return 0.0;
            s += std::pow(u, -theta_);
        }
        return std::pow(s, -1.0 / theta_);
    }

    std::vector<double> gradient(std::span<const double> x) const {
        check_point(x, family_ == Family::ClaytonExponential);
        const std::size_t d = dim();
        std::vector<double> g(d);
        if (family_ == Family::IndepExponential) {
            for (std::size_t i = 0; i < d; ++i) {
                double p = rates_[i] * std::exp(-rates_[i] * x[i]);
                for (std::size_t j = 0; j < d; ++j)
                    if (j != i) p *= margin(j, x[j]);
                g[i] = p;
            }
            return g;
        }
        const Clayton cl = clayton_terms(x);
        const double s_pow = std::pow(cl.s, -1.0 / theta_ - 1.0);
        for (std::size_t i = 0; i < d; ++i)
            g[i] = s_pow * std::pow(cl.u[i], -theta_ - 1.0) * cl.du[i];
        return g;
    }

    /// Row-major d x d Hessian.
    std::vector<double> hessian(std::span<const double> x) const {
        check_point(x, family_ == Family::ClaytonExponential);
        const std::size_t d = dim();
        std::vector<double> H(d * d);
        if (family_ == Family::IndepExponential) {
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    double p = 1.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        const double e = std::exp(-rates_[k] * x[k]);
                        if (k == i && k == j) p *= -rates_[k] * rates_[k] * e;
                        else if (k == i || k == j) p *= rates_[k] * e;
                        else p *= margin(k, x[k]);
                    }
                    H[i * d + j] = p;
                }
            }
            return H;
        }
        const Clayton cl = clayton_terms(x);
        const double s1 = std::pow(cl.s, -1.0 / theta_ - 1.0);
        const double s2 = (1.0 + theta_) * std::pow(cl.s, -1.0 / theta_ - 2.0);
        for (std::size_t i = 0; i < d; ++i) {
            const double ai = std::pow(cl.u[i], -theta_ - 1.0);
            for (std::size_t j = 0; j < d; ++j) {
                const double aj = std::pow(cl.u[j], -theta_ - 1.0);
                double v = s2 * ai * aj * cl.du[i] * cl.du[j];
                if (i == j) {
                    const double c_i = s1 * ai;
                    const double c_ii_extra = -(1.0 + theta_) * s1 * std::pow(cl.u[i], -theta_ - 2.0);
                    v += c_ii_extra * cl.du[i] * cl.du[i] + c_i * cl.d2u[i];
                }
                H[i * d + j] = v;
            }
        }
        return H;
    }

    /// n i.i.d. draws. IndepExponential inverts each margin; ClaytonExponential
    /// uses the gamma frailty W ~ Gamma(1/theta, 1), U_i = (1 + E_i/W)^(-1/theta),
    /// then inverts the exponential margins. Deterministic in (model, n, seed).
    Sample sample(std::size_t n, std::uint64_t seed) const {
        detail::require(n >= 1, "sample: n must be >= 1");
        const std::size_t d = dim();
        Rng rng = make_rng(seed);
        std::vector<double> coords(n * d);
        if (family_ == Family::IndepExponential) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < d; ++k) coords[i * d + k] = standard_exponential(rng) / rates_[k];
            return Sample(d, std::move(coords));
        }
        std::gamma_distribution<double> frailty(1.0 / theta_, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = frailty(rng);
            for (std::size_t k = 0; k < d; ++k) {
                double x;
                do {
                    // 1 - U = -expm1(-t) with t = log1p(E/W)/theta keeps precision as U -> 1.
                    const double t = std::log1p(standard_exponential(rng) / w) / theta_;
                    x = -std::log(-std::expm1(-t)) / rates_[k];
                } while (!std::isfinite(x));
                coords[i * d + k] = x < 0.0 ? 0.0 : x;
            }
        }
        return Sample(d, std::move(coords));
    }

    /// Distribution of a*X: same copula, margin rates divided by a.
    AnalyticModel scaled(double a) const {
        detail::require(a > 0.0, "scaled model: scale factor must be positive");
        std::vector<double> r = rates_;
        for (double& v : r) v /= a;
        return AnalyticModel(family_, dim(), std::move(r), theta_);
    }

private:
    struct Clayton {
        std::vector<double> u, du, d2u;
        double s;
    };

    double margin(std::size_t i, double xi) const { return -std::expm1(-rates_[i] * xi); }

    Clayton clayton_terms(std::span<const double> x) const {
        const std::size_t d = dim();
        Clayton cl{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d),
                   1.0 - static_cast<double>(d)};
        for (std::size_t i = 0; i < d; ++i) {
            const double e = std::exp(-rates_[i] * x[i]);
            cl.u[i] = margin(i, x[i]);
            cl.du[i] = rates_[i] * e;
            cl.d2u[i] = -rates_[i] * rates_[i] * e;
            cl.s += std::pow(cl.u[i], -theta_);
        }
        return cl;
    }

    void check_point(std::span<const double> x, bool strictly_positive) const {
        if (x.size() != dim()) throw ParameterError("point dimension does not match model dimension");
        for (double v : x) {
            if (std::isnan(v) || v < 0.0 || (strictly_positive && v == 0.0))
                throw DomainError(strictly_positive ? "Clayton derivatives need strictly positive coordinates"
                                                    : "point has a negative coordinate");
        }
    }

    Family family_;
    std::vector<double> rates_;
    double theta_;
};

inline AnalyticModel make_model(Family family, std::size_t dim, std::vector<double> rates, double theta = 1.0) {
    return AnalyticModel(family, dim, std::move(rates), theta);
}

}  // namespace levelplug
