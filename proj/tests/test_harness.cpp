#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <levelplug.hpp>
#include <levelplug/harness/config.hpp>
#include <levelplug/harness/experiments.hpp>
#include <levelplug/harness/records.hpp>
#include <levelplug/harness/slope.hpp>

using namespace levelplug;
using namespace levelplug::harness;
using Catch::Approx;

namespace {

ExperimentConfig small_config(EstimatorKind est) {
    ExperimentConfig cfg;
    cfg.estimator = est;
    cfg.cells = 128;
    cfg.n_values = {200, 2000};
    cfg.replications = 6;
    cfg.scan_cells = 128;
    cfg.seed = 11;
    return cfg;
}

bool same_except_time(const ExperimentRecord& x, const ExperimentRecord& y) {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return x.n == y.n && x.a == y.a && x.T_n == y.T_n && x.h == y.h && x.supnorm == y.supnorm && same(x.d_H, y.d_H) &&
           x.d_H_bound == y.d_H_bound && x.violation == y.violation && x.d_lambda == y.d_lambda && x.p_n == y.p_n &&
           x.p_n_d_lambda == y.p_n_d_lambda && x.band_vol == y.band_vol && x.band_vol_bound == y.band_vol_bound &&
           x.seed == y.seed;
}

}  // namespace

TEST_CASE("config round trip", "[harness][io]") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Scaling;
    cfg.model = ModelSpec{Family::ClaytonExponential, 3, {1.0, 0.5, 2.0}, 1.75};
    cfg.c = 0.3;
    cfg.r = 0.04;
    cfg.zeta = 0.1 / 3.0;
    cfg.T0 = 4.0;
    cfg.cells = 96;
    cfg.tau = 0.1;
    cfg.T1 = 2.5;
    cfg.n_values = {10, 1000, 123456};
    cfg.replications = 7;
    cfg.seed = 18446744073709551557ull;
    cfg.estimator = EstimatorKind::Perturbed;
    cfg.amplitude = 0.003;
    cfg.p = 3.0;
    cfg.beta_v = 0.45;
    cfg.delta = -0.05;
    cfg.v_scale = 1.5;
    cfg.route = RateRoute::Integral;
    cfg.scale_factors = {0.5, 1.0, 2.0, 10.0};
    cfg.scan_cells = 200;
    cfg.output = "out dir/x";
    CHECK(parse_config(format_config(cfg)) == cfg);
    CHECK(parse_config(format_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("shipped configs load", "[harness][io]") {
    for (const char* name : {"hausdorff", "volume_tau0", "volume_tau01", "scaling"}) {
        const auto cfg = load_config(std::string(LEVELPLUG_SOURCE_DIR "/configs/") + name + ".yaml");
        CHECK(parse_config(format_config(cfg)) == cfg);
    }
    CHECK(load_config(LEVELPLUG_SOURCE_DIR "/configs/volume_tau01.yaml").tau == 0.1);
    CHECK_THROWS_AS(load_config(LEVELPLUG_SOURCE_DIR "/configs/degenerate.yaml"), GateError);
}

TEST_CASE("geometric n schedule", "[harness][io]") {
    const auto cfg = parse_config("spec_version: 1\nsamples:\n  geometric: {start: 100, factor: 10, count: 4}\n");
    CHECK(cfg.n_values == std::vector<std::size_t>{100, 1000, 10000, 100000});
}

TEST_CASE("strict config parsing", "[harness][io]") {
    try {
        (void)parse_config("spec_version: 1\nmodel:\n  family: IndepExponential\n  colour: red\n");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("model.colour") != std::string::npos);
    }
    try {
        (void)parse_config("spec_version: 1\nbogus: 3\n");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("experiment: hausdorff\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("spec_version: 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("spec_version: 1\nlevel: {c: oops}\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), IoError);
}

TEST_CASE("config validation", "[harness]") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.c = 1.2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.T1 = 4.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.tau = 0.5;  // no increasing p_n
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.T1 = 0.5;  // level curves near c miss the box
    CHECK_THROWS_AS(cfg.validate(), GateError);
}

TEST_CASE("record CSV golden header and round trip", "[harness][io]") {
    CHECK(std::string(kRecordHeader) ==
          "n,a,T_n,h,supnorm,d_H,d_H_bound,violation,d_lambda,p_n,p_n_d_lambda,band_vol,band_vol_bound,seed,wall_ms");
    ExperimentRecord r;
    r.n = 1000;
    r.a = 2.0;
    r.T_n = 3.0;
    r.h = 0.1 / 3.0;
    r.supnorm = 0.012345678901234567;
    r.d_H = std::nan("");
    r.d_H_bound = 1.0 / 7.0;
    r.violation = true;
    r.d_lambda = 1e-300;
    r.p_n = 4.5;
    r.p_n_d_lambda = 4.5e-300;
    r.band_vol = 0.25;
    r.band_vol_bound = 0.75;
    r.seed = 18446744073709551615ull;
    r.wall_ms = 1.5;
    std::stringstream buf;
    write_records({r, r}, buf);
    const std::string text = buf.str();
    CHECK(text.substr(0, text.find('\n')) == kRecordHeader);
    CHECK(text.find(",nan,") != std::string::npos);
    CHECK(text.find("0.012345678901234567") != std::string::npos);
    const auto back = read_records(buf);
    REQUIRE(back.size() == 2);
    CHECK(same_except_time(back[0], r));
    CHECK(back[1].wall_ms == 1.5);

    std::stringstream bad("n,a\n1,2\n");
    CHECK_THROWS_AS(read_records(bad), IoError);
}

TEST_CASE("records are deterministic and independent of worker count", "[harness][property]") {
    const auto cfg = small_config(EstimatorKind::Ecdf);
    const auto one = run_hausdorff_experiment(cfg, 1);
    const auto two = run_hausdorff_experiment(cfg, 2);
    const auto three = run_hausdorff_experiment(cfg, 3);
    REQUIRE(one.size() == 12);
    for (std::size_t i = 0; i < one.size(); ++i) {
        REQUIRE(same_except_time(one[i], two[i]));
        REQUIRE(same_except_time(one[i], three[i]));
    }
    // Ordered by (n, replication); seeds are base + index.
    CHECK(one[0].n == 200);
    CHECK(one[6].n == 2000);
    for (std::size_t i = 0; i < 6; ++i) CHECK(one[i].seed == 11 + i);
    // Adding replications leaves earlier rows untouched.
    auto more = cfg;
    more.replications = 8;
    const auto longer = run_hausdorff_experiment(more, 1);
    for (std::size_t i = 0; i < 6; ++i) CHECK(same_except_time(one[i], longer[i]));
}

TEST_CASE("perfect estimator: only discretization remains", "[harness]") {
    auto cfg = small_config(EstimatorKind::Perfect);
    cfg.cells = 256;
    for (const auto& r : run_volume_experiment(cfg)) {
        CHECK(r.supnorm == 0.0);
        CHECK(r.d_lambda == 0.0);
        CHECK(r.d_H <= 2.0 * r.h * std::sqrt(2.0));
        CHECK_FALSE(r.violation);
    }
}

TEST_CASE("perturbed estimator stays inside the bound", "[harness]") {
    auto cfg = small_config(EstimatorKind::Perturbed);
    cfg.replications = 20;
    cfg.n_values = {1000};
    const ExperimentRunner runner(cfg);
    for (const auto& r : runner.run({1.0}, 1)) {
        CHECK(r.supnorm <= 0.004 + 1e-15);
        CHECK(r.supnorm > 0.003);
        CHECK(r.d_H <= 6.0 * runner.constants().A * 0.004 + 2.0 * r.h * std::sqrt(2.0));
        CHECK_FALSE(r.violation);
    }
}

TEST_CASE("bound columns reproduce from the constants", "[harness][property]") {
    auto cfg = small_config(EstimatorKind::Ecdf);
    cfg.scale_factors = {2.0};
    const ExperimentRunner runner(cfg);
    const auto k = runner.constants();
    for (const auto& r : run_scaling_experiment(cfg)) {
        CHECK(r.d_H_bound == 6.0 * k.A * r.a * r.supnorm);
        const auto rule = rate_rule(cfg.schedule(), r.a);
        CHECK(r.p_n == rule(double(r.n)));
        CHECK(r.p_n_d_lambda == r.p_n * r.d_lambda);
        const double eps = eps_n(r.p_n, cfg.schedule().integral_rate(double(r.n)), cfg.p);
        CHECK(r.band_vol_bound == Approx(2.0 * eps * k.A * r.a * 2.0 * r.a * r.T_n).epsilon(1e-13));
        if (!std::isnan(r.d_H)) CHECK(r.violation == (r.d_H > r.d_H_bound + 2.0 * r.h * std::sqrt(2.0)));
    }
}

TEST_CASE("scaling experiment", "[harness]") {
    auto cfg = small_config(EstimatorKind::Ecdf);
    cfg.scale_factors = {0.5, 2.0, 10.0};
    cfg.replications = 3;
    const auto records = run_scaling_experiment(cfg);
    REQUIRE(records.size() == 2 * 4 * 3);
    CHECK(records[0].a == 1.0);
    const double dp = 2.0 * cfg.p / (cfg.p + 1.0);
    for (const auto& r : records) {
        const auto base = std::find_if(records.begin(), records.end(),
                                       [&](const ExperimentRecord& b) { return b.a == 1.0 && b.n == r.n; });
        CHECK(r.p_n == Approx(base->p_n / std::pow(r.a, dp)).epsilon(1e-14));
        CHECK(r.h == Approx(base->h * r.a).epsilon(1e-14));
    }
    for (const auto& s : scaling_ratios(records)) {
        if (std::isnan(s.ratio)) continue;
        if (s.a == 1.0) CHECK(s.ratio == 1.0);
        else CHECK(s.ratio == Approx(s.a).epsilon(1e-6));
    }
}

TEST_CASE("log-log slope", "[harness]") {
    const std::vector<double> xs{1, 10, 100, 1000, 1e4};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::pow(x, -0.5));
    CHECK(std::abs(fit_loglog_slope(xs, ys) + 0.5) < 1e-12);
    const std::vector<double> flat(5, 3.0);
    CHECK(std::abs(fit_loglog_slope(xs, flat)) < 1e-15);
    CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ParameterError);
    CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{1, 2, 0}, std::vector<double>{1, 2, 3}), ParameterError);
    CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{1, 2, 3}, std::vector<double>{1, -2, 3}), ParameterError);

    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, std::nan(""), 2.0, 3.0}) == 2.5);
    CHECK(std::isnan(median({})));
}

TEST_CASE("ecdf supnorm medians fall at a root-n rate", "[harness]") {
    auto cfg = small_config(EstimatorKind::Ecdf);
    cfg.n_values = {100, 1000, 10000};
    cfg.replications = 20;
    const auto summary = summarize(run_hausdorff_experiment(cfg));
    std::vector<double> ns, sups;
    for (const auto& row : summary) {
        ns.push_back(double(row.n));
        sups.push_back(row.median_supnorm);
    }
    const double slope = fit_loglog_slope(ns, sups);
    CHECK(slope >= -0.7);
    CHECK(slope <= -0.3);
}
