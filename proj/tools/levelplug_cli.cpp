// levelplug: plug-in level-set estimation and convergence experiments.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 hypothesis gate
// failure, 4 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <levelplug.hpp>
#include <levelplug/harness/config.hpp>
#include <levelplug/harness/experiments.hpp>
#include <levelplug/harness/records.hpp>
#include <levelplug/harness/slope.hpp>

namespace fs = std::filesystem;
using namespace levelplug;
using namespace levelplug::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGate = 3;
constexpr int kExitIo = 4;

void print_constants(const ExperimentConfig& cfg, const TheoryConstants& k) {
    std::printf("model           %s d=%zu\n", std::string(family_name(cfg.model.family)).c_str(), cfg.model.dim);
    std::printf("c               %.17g\n", k.c);
    std::printf("r               %.17g\n", k.r);
    std::printf("zeta            %.17g\n", k.zeta);
    std::printf("m_grad          %.17g\n", k.m_grad);
    std::printf("m_grad_refined  %.17g\n", k.m_grad_refined);
    std::printf("M_H             %.17g\n", k.M_H);
    std::printf("A               %.17g\n", k.A);
    std::printf("gamma           %.17g\n", k.gamma);
    std::printf("scan_T          %.17g\n", k.scan_T);
    std::printf("hypotheses      %s\n", k.hypotheses_hold() ? "hold" : "FAIL");
}

void print_summary(const std::vector<ExperimentRecord>& records) {
    std::printf("%10s %8s %5s %14s %14s %9s %14s %14s\n", "n", "a", "reps", "med_supnorm", "med_d_H", "viol_rate",
                "med_d_lambda", "med_pn_dlam");
    for (const auto& s : summarize(records))
        std::printf("%10zu %8.4g %5zu %14.6g %14.6g %9.4f %14.6g %14.6g\n", s.n, s.a, s.count, s.median_supnorm,
                    s.median_d_H, s.violation_rate, s.median_d_lambda, s.median_p_n_d_lambda);
}

int run_experiment(ExperimentKind kind, const std::string& config_path, std::string out_dir, std::size_t jobs) {
    ExperimentConfig cfg = load_config(config_path);
    cfg.kind = kind;
    if (out_dir.empty()) out_dir = cfg.output;
    cfg.output = out_dir;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    ExperimentRunner runner(cfg);
    std::vector<ExperimentRecord> records;
    if (kind == ExperimentKind::Scaling) {
        std::vector<double> factors = cfg.scale_factors;
        if (std::find(factors.begin(), factors.end(), 1.0) == factors.end()) factors.insert(factors.begin(), 1.0);
        records = runner.run(factors, jobs);
    } else {
        records = runner.run({1.0}, jobs);
    }

    write_records(records, (fs::path(out_dir) / "records.csv").string());
    write_config(cfg, (fs::path(out_dir) / "config.yaml").string());

    print_constants(cfg, runner.constants());
    print_summary(records);
    if (kind == ExperimentKind::Scaling) {
        std::map<double, std::vector<double>> by_a;
        for (const auto& r : scaling_ratios(records)) by_a[r.a].push_back(r.ratio);
        for (const auto& [a, ratios] : by_a)
            std::printf("scale a=%-8.4g median d_H(a)/d_H(1) = %.12g\n", a, median(ratios));
    }
    std::printf("records written to %s\n", (fs::path(out_dir) / "records.csv").string().c_str());
    return 0;
}

int run_estimate(const std::string& input, double level, double T, std::size_t cells, const std::string& output,
                 const std::string& mask_path) {
    const Sample sample = load_sample_csv(input);
    const GridSpec grid(sample.dim(), T, cells);
    const LevelSetMask mask = plug_in_levelset(ecdf_eval_grid(sample, grid), level);
    const BoundaryPoints boundary = extract_boundary(mask);
    write_boundary_csv(boundary, output);
    if (!mask_path.empty()) {
        std::ofstream out(mask_path);
        if (!out) throw IoError("cannot write mask file: " + mask_path);
        write_mask_rle(mask, out);
    }
    std::printf("n=%zu d=%zu cells_inside=%zu volume=%.17g boundary_points=%zu\n", sample.size(), sample.dim(),
                mask.count(), mask.volume(), boundary.size());
    return 0;
}

int run_slope(const std::string& path, const std::string& xcol, const std::string& ycol) {
    const auto records = read_records(path);
    auto pick = [](const ExperimentRecord& r, const std::string& col) -> double {
        if (col == "n") return static_cast<double>(r.n);
        if (col == "a") return r.a;
        if (col == "T_n") return r.T_n;
        if (col == "supnorm") return r.supnorm;
        if (col == "d_H") return r.d_H;
        if (col == "d_lambda") return r.d_lambda;
        if (col == "p_n_d_lambda") return r.p_n_d_lambda;
        if (col == "band_vol") return r.band_vol;
        throw ConfigError("unsupported column for slope: " + col);
    };
    std::map<double, std::vector<double>> groups;
    for (const auto& r : records) groups[pick(r, xcol)].push_back(pick(r, ycol));
    std::vector<double> xs, ys;
    for (const auto& [x, v] : groups) {
        xs.push_back(x);
        ys.push_back(median(v));
        std::printf("%-14.8g median %s = %.10g\n", x, ycol.c_str(), ys.back());
    }
    std::printf("log-log slope of median %s vs %s: %.6f\n", ycol.c_str(), xcol.c_str(), fit_loglog_slope(xs, ys));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plug-in level-set estimation for multivariate distribution functions"};
    app.require_subcommand(1);

    std::string input, output, mask_path, config_path, records_path;
    std::string xcol = "n", ycol = "supnorm";
    double level = 0.5, T = 1.0;
    std::size_t cells = 256, jobs = 1;

    auto* est = app.add_subcommand("estimate", "Plug-in level set and its boundary from a CSV sample");
    est->add_option("--input", input, "CSV sample, d columns, no header")->required();
    est->add_option("--level", level, "level c in (0, 1)")->required();
    est->add_option("--T", T, "box [0, T]^d")->required();
    est->add_option("--cells", cells, "cells per axis")->required();
    est->add_option("--output", output, "boundary CSV to write")->required();
    est->add_option("--mask", mask_path, "optional run-length mask file to write");

    auto* bounds = app.add_subcommand("bounds", "Print the theory constants for a config");
    bounds->add_option("--config", config_path, "experiment config (YAML)")->required();

    std::map<std::string, ExperimentKind> exp_kinds{{"hausdorff-exp", ExperimentKind::Hausdorff},
                                                    {"volume-exp", ExperimentKind::Volume},
                                                    {"scaling-exp", ExperimentKind::Scaling}};
    std::map<std::string, CLI::App*> exp_cmds;
    for (const auto& [name, kind] : exp_kinds) {
        auto* sub = app.add_subcommand(name, "Run the " + std::string(kind_name(kind)) + " experiment");
        sub->add_option("--config", config_path, "experiment config (YAML)")->required();
        sub->add_option("--output", output, "output directory (default: config 'output')");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        exp_cmds[name] = sub;
    }

    auto* slope = app.add_subcommand("slope", "Log-log slope of per-x medians in a records file");
    slope->add_option("--records", records_path, "records CSV")->required();
    slope->add_option("--x", xcol, "x column (n, a, T_n)");
    slope->add_option("--y", ycol, "y column (supnorm, d_H, d_lambda, p_n_d_lambda, band_vol)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*est) return run_estimate(input, level, T, cells, output, mask_path);
        if (*bounds) {
            const ExperimentConfig cfg = load_config(config_path);
            const TheoryConstants k = compute_constants(cfg.model.build(), cfg.c, cfg.r, cfg.zeta, cfg.scan_cells);
            print_constants(cfg, k);
            return k.hypotheses_hold() ? 0 : kExitGate;
        }
        for (const auto& [name, sub] : exp_cmds)
            if (*sub) return run_experiment(exp_kinds.at(name), config_path, output, jobs);
        if (*slope) return run_slope(records_path, xcol, ycol);
    } catch (const GateError& e) {
        std::fprintf(stderr, "hypothesis gate: %s\n", e.what());
        return kExitGate;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
