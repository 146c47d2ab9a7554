#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../distributions.hpp"
#include "../error.hpp"
#include "../levelset.hpp"
#include "../theory.hpp"

namespace levelplug::harness {

enum class ExperimentKind { Hausdorff, Volume, Scaling, Bounds };
enum class EstimatorKind { Ecdf, Perfect, Perturbed };

inline std::string_view kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Hausdorff: return "hausdorff";
        case ExperimentKind::Volume: return "volume";
        case ExperimentKind::Scaling: return "scaling";
        case ExperimentKind::Bounds: return "bounds";
    }
    return "?";
}

inline std::string_view estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Ecdf: return "ecdf";
        case EstimatorKind::Perfect: return "perfect";
        case EstimatorKind::Perturbed: return "perturbed";
    }
    return "?";
}

struct ModelSpec {
    Family family = Family::IndepExponential;
    std::size_t dim = 2;
    std::vector<double> rates{1.0, 1.0};
    double theta = 1.0;

    AnalyticModel build() const { return make_model(family, dim, rates, theta); }
    bool operator==(const ModelSpec&) const = default;
};

/// Everything an experiment run depends on. Identical configs produce
/// identical records (apart from wall-clock times).
struct ExperimentConfig {
    int spec_version = 1;
    ExperimentKind kind = ExperimentKind::Hausdorff;
    ModelSpec model;

    double c = 0.25;
    double r = 0.05;
    double zeta = 0.05;

    double T0 = 3.0;  ///< T_n = T0 * n^tau
    std::size_t cells = 512;
    double tau = 0.0;
    double T1 = 3.0;  ///< box in which every level within r of c must cross

    std::vector<std::size_t> n_values{100000};
    std::size_t replications = 100;
    std::uint64_t seed = 1;

    EstimatorKind estimator = EstimatorKind::Ecdf;
    double amplitude = 0.004;  ///< perturbed estimator: F + amplitude * sin(...)

    double p = 2.0;
    double beta_v = 0.5;
    double delta = 0.05;
    double v_scale = 1.0;
    RateRoute route = RateRoute::Supnorm;

    std::vector<double> scale_factors{1.0};
    std::size_t scan_cells = 256;

    std::string output = "results";

    RateSchedule schedule() const {
        RateSchedule s;
        s.d = model.dim;
        s.p = p;
        s.beta_v = beta_v;
        s.tau = tau;
        s.T0 = T0;
        s.delta = delta;
        s.v_scale = v_scale;
        s.route = route;
        return s;
    }

    double T_n(std::size_t n) const { return T0 * std::pow(static_cast<double>(n), tau); }

    /// Cross-module checks. Throws ConfigError for bad values and GateError
    /// when the level curves near c do not cross [0, T1]^d.
    void validate() const {
        auto fail = [](const std::string& msg) { throw ConfigError(msg); };
        if (spec_version != 1) fail("spec_version must be 1");
        try {
            (void)model.build();
            if (!(c > 0.0 && c < 1.0)) fail("level.c must lie in (0, 1)");
            if (!(r > 0.0) || !(zeta > 0.0)) fail("level.r and level.zeta must be positive");
            (void)GridSpec(model.dim, T0, cells);
            if (!(T1 > 0.0)) fail("grid.T1 must be positive");
            if (T1 > T0) fail("grid.T1 must not exceed grid.T0 (T_n >= T0 for all n)");
            if (n_values.empty()) fail("samples.n must list at least one sample size");
            for (auto n : n_values)
                if (n < 1) fail("samples.n entries must be >= 1");
            if (replications < 1) fail("samples.replications must be >= 1");
            if (!(amplitude >= 0.0)) fail("estimator.amplitude must be nonnegative");
            if (scale_factors.empty()) fail("scaling.factors must not be empty");
            for (double a : scale_factors)
                if (!(a > 0.0)) fail("scaling.factors entries must be positive");
            if (scan_cells < 2) fail("theory.scan_cells must be >= 2");
            (void)rate_rule(schedule());
        } catch (const ParameterError& e) {
            fail(e.what());
        }
        // Nonempty level curves are a hypothesis of the theorems, reported as a gate failure.
        if (!level_curves_cross_box(model.build(), c, r, T1))
            throw GateError("level curves {F = t}, |t - c| <= r, do not all cross [0, T1]^d: need "
                            "F(T1,...,T1) > c + r and c - r > 0");
    }

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, const std::string& where, T& out) {
    if (const auto v = node[key]) {
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError("bad value for '" + where + "." + key + "'");
        }
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    using detail::read;
    detail::check_keys(root, "",
                       {"spec_version", "experiment", "output", "model", "level", "grid", "samples", "estimator",
                        "schedule", "scaling", "theory"});
    ExperimentConfig cfg;
    if (!root["spec_version"]) throw ConfigError("missing required key 'spec_version'");
    read(root, "spec_version", "", cfg.spec_version);
    if (cfg.spec_version != 1) throw ConfigError("unsupported spec_version " + std::to_string(cfg.spec_version));

    std::string s;
    if (root["experiment"]) {
        read(root, "experiment", "", s);
        if (s == "hausdorff") cfg.kind = ExperimentKind::Hausdorff;
        else if (s == "volume") cfg.kind = ExperimentKind::Volume;
        else if (s == "scaling") cfg.kind = ExperimentKind::Scaling;
        else if (s == "bounds") cfg.kind = ExperimentKind::Bounds;
        else throw ConfigError("unknown experiment kind '" + s + "'");
    }
    read(root, "output", "", cfg.output);

    if (const auto m = root["model"]) {
        detail::check_keys(m, "model", {"family", "dim", "rates", "theta"});
        if (m["family"]) {
            read(m, "family", "model", s);
            try {
                cfg.model.family = parse_family(s);
            } catch (const ParameterError& e) {
                throw ConfigError(e.what());
            }
        }
        read(m, "dim", "model", cfg.model.dim);
        if (m["rates"]) read(m, "rates", "model", cfg.model.rates);
        else cfg.model.rates.assign(cfg.model.dim, 1.0);
        read(m, "theta", "model", cfg.model.theta);
    }
    if (const auto l = root["level"]) {
        detail::check_keys(l, "level", {"c", "r", "zeta"});
        read(l, "c", "level", cfg.c);
        read(l, "r", "level", cfg.r);
        read(l, "zeta", "level", cfg.zeta);
    }
    if (const auto g = root["grid"]) {
        detail::check_keys(g, "grid", {"T0", "cells", "tau", "T1"});
        read(g, "T0", "grid", cfg.T0);
        cfg.T1 = cfg.T0;
        read(g, "cells", "grid", cfg.cells);
        read(g, "tau", "grid", cfg.tau);
        read(g, "T1", "grid", cfg.T1);
    }
    if (const auto sm = root["samples"]) {
        detail::check_keys(sm, "samples", {"n", "geometric", "replications", "seed"});
        if (sm["n"] && sm["geometric"]) throw ConfigError("samples: give either 'n' or 'geometric', not both");
        read(sm, "n", "samples", cfg.n_values);
        if (const auto geo = sm["geometric"]) {
            detail::check_keys(geo, "samples.geometric", {"start", "factor", "count"});
            double start = 0, factor = 0;
            std::size_t count = 0;
            read(geo, "start", "samples.geometric", start);
            read(geo, "factor", "samples.geometric", factor);
            read(geo, "count", "samples.geometric", count);
            if (!(start >= 1) || !(factor > 1) || count < 1)
                throw ConfigError("samples.geometric needs start >= 1, factor > 1, count >= 1");
            cfg.n_values.clear();
            for (std::size_t i = 0; i < count; ++i)
                cfg.n_values.push_back(static_cast<std::size_t>(std::llround(start * std::pow(factor, double(i)))));
        }
        read(sm, "replications", "samples", cfg.replications);
        read(sm, "seed", "samples", cfg.seed);
    }
    if (const auto e = root["estimator"]) {
        detail::check_keys(e, "estimator", {"kind", "amplitude"});
        if (e["kind"]) {
            read(e, "kind", "estimator", s);
            if (s == "ecdf") cfg.estimator = EstimatorKind::Ecdf;
            else if (s == "perfect") cfg.estimator = EstimatorKind::Perfect;
            else if (s == "perturbed") cfg.estimator = EstimatorKind::Perturbed;
            else throw ConfigError("unknown estimator kind '" + s + "'");
        }
        read(e, "amplitude", "estimator", cfg.amplitude);
    }
    if (const auto sc = root["schedule"]) {
        detail::check_keys(sc, "schedule", {"p", "beta_v", "delta", "v_scale", "route"});
        read(sc, "p", "schedule", cfg.p);
        read(sc, "beta_v", "schedule", cfg.beta_v);
        read(sc, "delta", "schedule", cfg.delta);
        read(sc, "v_scale", "schedule", cfg.v_scale);
        if (sc["route"]) {
            read(sc, "route", "schedule", s);
            if (s == "supnorm") cfg.route = RateRoute::Supnorm;
            else if (s == "integral") cfg.route = RateRoute::Integral;
            else throw ConfigError("unknown schedule route '" + s + "'");
        }
    }
    if (const auto a = root["scaling"]) {
        detail::check_keys(a, "scaling", {"factors"});
        read(a, "factors", "scaling", cfg.scale_factors);
    }
    if (const auto t = root["theory"]) {
        detail::check_keys(t, "theory", {"scan_cells"});
        read(t, "scan_cells", "theory", cfg.scan_cells);
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline std::string format_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "spec_version" << YAML::Value << cfg.spec_version;
    out << YAML::Key << "experiment" << YAML::Value << std::string(kind_name(cfg.kind));
    out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << cfg.output;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "family" << YAML::Value << std::string(family_name(cfg.model.family));
    out << YAML::Key << "dim" << YAML::Value << cfg.model.dim;
    out << YAML::Key << "rates" << YAML::Value << YAML::Flow << cfg.model.rates;
    out << YAML::Key << "theta" << YAML::Value << cfg.model.theta;
    out << YAML::EndMap;

    out << YAML::Key << "level" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "c" << YAML::Value << cfg.c;
    out << YAML::Key << "r" << YAML::Value << cfg.r;
    out << YAML::Key << "zeta" << YAML::Value << cfg.zeta;
    out << YAML::EndMap;

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "T0" << YAML::Value << cfg.T0;
    out << YAML::Key << "cells" << YAML::Value << cfg.cells;
    out << YAML::Key << "tau" << YAML::Value << cfg.tau;
    out << YAML::Key << "T1" << YAML::Value << cfg.T1;
    out << YAML::EndMap;

    out << YAML::Key << "samples" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << YAML::Flow << cfg.n_values;
    out << YAML::Key << "replications" << YAML::Value << cfg.replications;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;
    out << YAML::EndMap;

    out << YAML::Key << "estimator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(estimator_name(cfg.estimator));
    out << YAML::Key << "amplitude" << YAML::Value << cfg.amplitude;
    out << YAML::EndMap;

    out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "p" << YAML::Value << cfg.p;
    out << YAML::Key << "beta_v" << YAML::Value << cfg.beta_v;
    out << YAML::Key << "delta" << YAML::Value << cfg.delta;
    out << YAML::Key << "v_scale" << YAML::Value << cfg.v_scale;
    out << YAML::Key << "route" << YAML::Value << (cfg.route == RateRoute::Supnorm ? "supnorm" : "integral");
    out << YAML::EndMap;

    out << YAML::Key << "scaling" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "factors" << YAML::Value << YAML::Flow << cfg.scale_factors;
    out << YAML::EndMap;

    out << YAML::Key << "theory" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "scan_cells" << YAML::Value << cfg.scan_cells;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

inline void write_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    out << format_config(cfg);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace levelplug::harness
