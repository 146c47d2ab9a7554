#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <levelplug.hpp>

#include "test_support.hpp"

using namespace levelplug;
using Catch::Approx;

namespace {

const double kDiagonalGradient = 0.25 * std::numbers::sqrt2;

/// Independent oracle for the tube infimum of |grad F| under the unit-rate
/// independent exponential model: walk the level curves
/// y = -log(1 - t / (1 - e^-x)) for t in [c - r, c + r] and look at every
/// polar offset of length <= zeta around each curve point.
double tube_inf_oracle(double c, double r, double zeta) {
    const auto m = testing_support::indep2();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> p(2);
    for (int it = 0; it <= 20; ++it) {
        const double t = c - r + 2.0 * r * it / 20.0;
        const double x0 = -std::log1p(-t);
        for (int ix = 1; ix <= 600; ++ix) {
            const double x = x0 + 6.0 * std::pow(ix / 600.0, 2.0);
            const double y = -std::log1p(-t / -std::expm1(-x));
            for (int ir = 0; ir <= 6; ++ir)
                for (int ia = 0; ia < 32; ++ia) {
                    const double rho = zeta * ir / 6.0;
                    const double phi = 2.0 * std::numbers::pi * ia / 32.0;
                    p[0] = x + rho * std::cos(phi);
                    p[1] = y + rho * std::sin(phi);
                    if (p[0] < 0.0 || p[1] < 0.0) continue;
                    const auto g = m.gradient(p);
                    best = std::min(best, std::hypot(g[0], g[1]));
                }
        }
    }
    return best;
}

TheoryConstants anchor_constants() {
    TheoryConstants k;
    k.m_grad = kDiagonalGradient;
    k.A = 2.0 / k.m_grad;
    k.M_H = 1.0;
    k.scan_T = 3.0;
    return k;
}

}  // namespace

TEST_CASE("m_grad scan on the independent exponential model", "[theory]") {
    const auto est = estimate_m_grad(testing_support::indep2(), 0.25, 0.05, 0.05, 256);
    CHECK(est.raw <= kDiagonalGradient);
    CHECK(est.refined <= est.raw + 1e-12);
    CHECK(est.raw > 0.0);
    const double oracle = tube_inf_oracle(0.25, 0.05, 0.05);
    CHECK(est.raw == Approx(oracle).epsilon(0.02));
    CHECK(est.refined == Approx(oracle).epsilon(0.01));
}

TEST_CASE("m_grad collapses to the diagonal anchor for a thin tube", "[theory]") {
    const auto est = estimate_m_grad(testing_support::indep2(), 0.25, 1e-3, 1e-3, 1024);
    CHECK(est.raw == Approx(kDiagonalGradient).epsilon(0.02));
}

TEST_CASE("tube reaching the far corner fails the gate", "[theory]") {
    const auto k = compute_constants(testing_support::indep2(), 0.97, 0.05, 0.05, 128);
    CHECK(k.m_grad < kGradientFloor);
    CHECK_FALSE(k.hypotheses_hold());
    CHECK_THROWS_AS(hausdorff_bound(k, 0.01), GateError);
}

TEST_CASE("M_H is finite and bounded by 2", "[theory]") {
    const auto m = testing_support::indep2();
    const auto k = compute_constants(m, 0.25, 0.05, 0.05, 256);
    CHECK(std::isfinite(k.M_H));
    CHECK(k.M_H > 0.0);
    CHECK(k.M_H <= 2.0);
    CHECK(k.hypotheses_hold());
    CHECK(k.A == 2.0 / k.m_grad);
    CHECK(k.gamma == k.r);

    // Dense scan of the whole box [0, 3]^2.
    std::vector<double> x(2);
    double sup = 0.0;
    for (int i = 0; i <= 300; ++i)
        for (int j = 0; j <= 300; ++j) {
            x = {3.0 * i / 300.0, 3.0 * j / 300.0};
            sup = std::max(sup, spectral_norm(m.hessian(x), 2));
        }
    CHECK(sup <= 2.0);

    const auto clay = compute_constants(make_model(Family::ClaytonExponential, 2, {1.0, 1.0}, 1.0), 0.25, 0.05, 0.05, 256);
    CHECK(std::isfinite(clay.M_H));
    CHECK(clay.hypotheses_hold());
}

TEST_CASE("spectral norm", "[theory]") {
    CHECK(spectral_norm(std::vector<double>{2, 0, 0, 0}, 2) == Approx(2.0));
    CHECK(spectral_norm(std::vector<double>{0, 0, 0, -3}, 2) == Approx(3.0));
    CHECK(spectral_norm(std::vector<double>{1, 2, 2, 1}, 2) == Approx(3.0));
    CHECK(spectral_norm(std::vector<double>{2, 0, 0, 0, 5, 0, 0, 0, 1}, 3) == Approx(5.0));
    CHECK_THROWS_AS(spectral_norm(std::vector<double>{1, 2, 3}, 2), ParameterError);
}

TEST_CASE("hausdorff bound", "[theory]") {
    const auto k = anchor_constants();
    CHECK(k.A == Approx(5.6569).epsilon(1e-5));
    CHECK(hausdorff_bound(k, 0.01) == Approx(0.33941).epsilon(1e-5));
    CHECK(hausdorff_bound(k, 0.0) == 0.0);
    CHECK(hausdorff_bound(k, 0.01, 2.0) == 2.0 * hausdorff_bound(k, 0.01));
    CHECK_THROWS_AS(hausdorff_bound(k, 0.01, 0.0), ParameterError);
}

TEST_CASE("band volume bound", "[theory]") {
    const auto k = anchor_constants();
    CHECK(band_volume_bound(k, 0.01, 2, 3.0) == Approx(0.67882).epsilon(1e-5));
    CHECK(band_volume_bound(k, 0.0, 2, 3.0) == 0.0);
    CHECK(band_volume_bound(k, 0.01, 3, 3.0) == Approx(1.5 * 3.0 * band_volume_bound(k, 0.01, 2, 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(band_volume_bound(k, -0.01, 2, 3.0), ParameterError);
}

TEST_CASE("worked exponent examples", "[theory]") {
    const auto d3 = rate_pn_supnorm(3, 2.0, 0.5, 0.0, 0.05);
    CHECK(d3.n_exponent == 1.0 / 3.0);
    CHECK(d3.T_exponent == 7.0 / 3.0);
    const auto d4 = rate_pn_supnorm(4, 2.0, 0.5, 0.0, 0.05);
    CHECK(d4.n_exponent == 1.0 / 3.0);
    CHECK(d4.T_exponent == 10.0 / 3.0);
    CHECK(d3.a_exponent == 2.0);

    RateSchedule s;
    s.d = 2;
    s.p = 1.0;
    s.beta_v = 1.0;
    s.tau = 0.0;
    s.route = RateRoute::Integral;
    const auto rule = rate_pn(s);
    CHECK(rule.n_exponent == 0.5);
    CHECK(rule.T_exponent == 0.5);
    CHECK(rule.effective_exponent() == Approx(0.45));

    const auto same = rate_pn(s, 1.0);
    for (double n : {10.0, 1e4, 1e8}) CHECK(same(n) == rule(n));
}

TEST_CASE("schedules without an increasing rate are rejected", "[theory]") {
    RateSchedule s;
    s.d = 3;
    s.tau = 0.5;
    CHECK_THROWS_AS(rate_pn_supnorm(s), ParameterError);
    s.tau = 0.0;
    s.delta = 0.4;
    CHECK_THROWS_AS(rate_pn_supnorm(s), ParameterError);
    s.delta = 0.05;
    s.p = 0.5;
    CHECK_THROWS_AS(rate_pn_supnorm(s), ParameterError);
    s.p = 2.0;
    s.beta_v = 0.0;
    CHECK_THROWS_AS(rate_pn(s), ParameterError);
}

TEST_CASE("supnorm route equals the integral route fed with w_n = v_n^p / T_n^d", "[theory][property]") {
    std::mt19937_64 rng(314);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    std::uniform_real_distribution<double> pdist(1.0, 4.0), beta(0.2, 1.0), tau(0.0, 0.05), scale(0.5, 3.0);
    int checked = 0;
    while (checked < 20) {
        RateSchedule s;
        s.d = dim(rng);
        s.p = pdist(rng);
        s.beta_v = beta(rng);
        s.tau = tau(rng);
        s.T0 = scale(rng);
        s.v_scale = scale(rng);
        s.delta = 0.01;
        const double d = static_cast<double>(s.d);
        if (s.beta_v * s.p - s.tau * d <= 0.0) continue;
        RateRule sup;
        try {
            sup = rate_pn_supnorm(s, 1.7);
        } catch (const ParameterError&) {
            continue;
        }
        RateSchedule w = s;
        w.route = RateRoute::Integral;
        w.beta_v = s.beta_v * s.p - s.tau * d;
        w.v_scale = std::pow(s.v_scale, s.p) / std::pow(s.T0, d);
        const auto theorem = rate_pn(w, 1.7);
        CHECK(sup.effective_exponent() == Approx(theorem.effective_exponent()).epsilon(1e-12));
        for (double n : {1e2, 1e5, 1e9}) CHECK(sup(n) == Approx(theorem(n)).epsilon(1e-10));
        ++checked;
    }
}

TEST_CASE("integral-route exponents match hand algebra", "[theory][property]") {
    // d = 3, p = 1: n^(beta/2 - tau), T exponent 1, a exponent 3/2.
    const double betas[] = {0.3, 0.5, 0.6, 0.8, 1.0, 1.2, 0.45, 0.9, 0.7, 1.5};
    const double taus[] = {0.0, 0.01, 0.05, 0.1, 0.2, 0.0, 0.02, 0.3, 0.15, 0.6};
    for (int i = 0; i < 10; ++i) {
        RateSchedule s;
        s.d = 3;
        s.p = 1.0;
        s.beta_v = betas[i];
        s.tau = taus[i];
        s.delta = 0.01;
        s.route = RateRoute::Integral;
        const auto rule = rate_pn(s);
        CHECK(rule.n_exponent == Approx(betas[i] / 2.0).epsilon(1e-15));
        CHECK(rule.T_exponent == Approx(1.0).epsilon(1e-15));
        CHECK(rule.a_exponent == Approx(1.5).epsilon(1e-15));
        CHECK(rule.effective_exponent() == Approx(betas[i] / 2.0 - taus[i] - 0.01).epsilon(1e-13));
        s.p = 2.0;
        const double e2 = betas[i] / 3.0 - taus[i] * 4.0 / 3.0 - 0.01;
        if (e2 > 0.0) CHECK(rate_pn(s).effective_exponent() == Approx(e2).epsilon(1e-13));
        else CHECK_THROWS_AS(rate_pn(s), ParameterError);
    }
}

TEST_CASE("eps_n", "[theory]") {
    CHECK(eps_n(4.0, 100.0, 2.0) == Approx(0.2).epsilon(1e-15));
    for (double p : {1.0, 2.0, 3.5}) CHECK(eps_n(7.0, 7.0, p) == 1.0);
    CHECK_THROWS_AS(eps_n(0.0, 1.0, 2.0), ParameterError);

    // d = 3 worked schedule: eps_n * p_n * T^(d-1) decays like n^(-3 delta / 2).
    RateSchedule s;
    s.d = 3;
    s.p = 2.0;
    s.beta_v = 0.5;
    s.T0 = 3.0;
    const auto rule = rate_rule(s);
    double prev = std::numeric_limits<double>::infinity();
    for (double n = 10.0; n <= 1e9; n *= 10.0) {
        const double pn = rule(n);
        const double product = eps_n(pn, s.integral_rate(n), s.p) * pn * std::pow(s.T_n(n), 2.0);
        CHECK(product < prev);
        prev = product;
    }
    const double ratio = (eps_n(rule(1e9), s.integral_rate(1e9), 2.0) * rule(1e9)) /
                         (eps_n(rule(1e8), s.integral_rate(1e8), 2.0) * rule(1e8));
    CHECK(std::log10(ratio) == Approx(-1.5 * s.delta).epsilon(1e-9));
}

TEST_CASE("scaled m_grad", "[theory]") {
    CHECK(scaled_m_grad(0.3, 1.0) == 0.3);
    CHECK(std::abs(scaled_m_grad(0.353553, 2.0) - 0.176777) < 1e-6);
    CHECK_THROWS_AS(scaled_m_grad(0.3, 0.0), ParameterError);

    const auto m = testing_support::indep2();
    const double base = estimate_m_grad(m, 0.25, 0.05, 0.05, 256).raw;
    for (double a : {0.5, 2.0, 10.0}) {
        const double scanned = estimate_m_grad(m.scaled(a), 0.25, 0.05, 0.05 * a, 256).raw;
        CHECK(scanned == Approx(scaled_m_grad(base, a)).epsilon(0.02));
    }
}

TEST_CASE("gate is scale invariant", "[theory][property]") {
    const std::vector<AnalyticModel> models{testing_support::indep2(),
                                            make_model(Family::ClaytonExponential, 2, {1.0, 2.0}, 1.5)};
    for (const auto& m : models) {
        const auto k = compute_constants(m, 0.3, 0.05, 0.05, 128);
        REQUIRE(k.hypotheses_hold());
        for (double a : {0.1, 2.0, 100.0}) {
            const auto ka = compute_constants(m.scaled(a), 0.3, 0.05, 0.05 * a, 128);
            CHECK(ka.hypotheses_hold());
            CHECK(ka.m_grad == Approx(k.m_grad / a).epsilon(0.02));
            CHECK(ka.M_H == Approx(k.M_H / (a * a)).epsilon(0.05));
            const auto s = scale_constants(k, a);
            CHECK(s.hypotheses_hold() == k.hypotheses_hold());
            CHECK(s.A == Approx(k.A * a).epsilon(1e-14));
        }
    }
}

TEST_CASE("rate exponent shrinks with dimension", "[theory][property]") {
    for (RateRoute route : {RateRoute::Supnorm, RateRoute::Integral}) {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t d = 2; d <= 6; ++d) {
            RateSchedule s;
            s.d = d;
            s.p = 2.0;
            s.beta_v = 0.5;
            s.tau = 0.01;
            s.delta = 0.01;
            s.route = route;
            const double e = rate_rule(s).effective_exponent();
            CHECK(e < prev);
            prev = e;
        }
    }
}

TEST_CASE("edt_line matches brute force", "[theory]") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution seed_pt(0.1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 40;
        std::vector<double> f(n);
        for (auto& v : f) v = seed_pt(rng) ? 0.0 : std::numeric_limits<double>::infinity();
        std::vector<double> brute(n, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (f[j] == 0.0) brute[i] = std::min(brute[i], double((i - j) * (i - j)));
        detail::edt_line(f);
        REQUIRE(f == brute);
    }
}
