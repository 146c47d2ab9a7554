#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "../distributions.hpp"
#include "../ecdf.hpp"
#include "../levelset.hpp"
#include "../metrics.hpp"
#include "../rng.hpp"
#include "../theory.hpp"
#include "config.hpp"
#include "records.hpp"
#include "slope.hpp"

namespace levelplug::harness {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Rethrows the first
/// exception after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

/// Ground-truth objects for one (T_n, a): the analytic field, its plug-in
/// mask and the bisection-sampled level curve, all on [0, a T_n]^d.
struct Truth {
    AnalyticModel model;
    ScalarField field;
    LevelSetMask mask;
    BoundaryPoints boundary;
};

inline Truth make_truth(const AnalyticModel& base, double c, double a, const GridSpec& grid) {
    AnalyticModel model = base.scaled(a);
    ScalarField field = analytic_field(model, grid);
    LevelSetMask mask = plug_in_levelset(field, c);
    BoundaryPoints boundary = analytic_boundary(model, c, grid, 1e-10 * grid.T);
    return Truth{std::move(model), std::move(field), std::move(mask), std::move(boundary)};
}

/// Shared machinery behind the Hausdorff, volume and scaling experiments.
/// Construction computes the theory constants once and refuses (GateError)
/// models whose gradient vanishes on the tube.
class ExperimentRunner {
public:
    explicit ExperimentRunner(ExperimentConfig cfg)
        : cfg_((cfg.validate(), std::move(cfg))),
          model_(cfg_.model.build()),
          constants_(compute_constants(model_, cfg_.c, cfg_.r, cfg_.zeta, cfg_.scan_cells)),
          schedule_(cfg_.schedule()) {
        if (!constants_.hypotheses_hold())
            throw GateError("gradient infimum over the tube is ~0 (" + std::to_string(constants_.m_grad) +
                            "); bounds refused");
    }

    const ExperimentConfig& config() const noexcept { return cfg_; }
    const TheoryConstants& constants() const noexcept { return constants_; }
    const AnalyticModel& model() const noexcept { return model_; }

    /// Records ordered by (n, a, replication), independent of `jobs`.
    std::vector<ExperimentRecord> run(std::vector<double> factors, std::size_t jobs) const {
        struct Task {
            std::size_t n;
            double a;
            std::size_t rep;
        };
        std::vector<Task> tasks;
        for (std::size_t n : cfg_.n_values)
            for (double a : factors)
                for (std::size_t rep = 0; rep < cfg_.replications; ++rep) tasks.push_back({n, a, rep});

        std::map<std::pair<double, double>, Truth> truths;
        for (const auto& t : tasks) {
            const auto key = std::make_pair(cfg_.T_n(t.n), t.a);
            if (!truths.contains(key)) truths.emplace(key, make_truth(model_, cfg_.c, t.a, grid_for(t.n, t.a)));
        }

        std::vector<ExperimentRecord> out(tasks.size());
        parallel_for(tasks.size(), jobs, [&](std::size_t i) {
            const Task& t = tasks[i];
            out[i] = run_one(t.n, t.a, t.rep, truths.at({cfg_.T_n(t.n), t.a}));
        });
        return out;
    }

    GridSpec grid_for(std::size_t n, double a) const {
        return GridSpec(cfg_.model.dim, a * cfg_.T_n(n), cfg_.cells);
    }

    /// The estimated field F_n for one replication, on truth's grid.
    ScalarField estimate(std::size_t n, double a, std::uint64_t seed, const Truth& truth) const {
        const GridSpec& grid = truth.field.grid;
        switch (cfg_.estimator) {
            case EstimatorKind::Perfect:
                return truth.field;
            case EstimatorKind::Perturbed: {
                Rng rng = make_rng(seed);
                const double phase = 2.0 * std::numbers::pi * uniform01(rng);
                const double freq = 2.0 * std::numbers::pi * 3.0 / grid.T;
                return sample_field(grid, [&](std::span<const double> x) {
                    double s = 0.0;
                    for (double v : x) s += v;
                    return truth.model.cdf(x) + cfg_.amplitude * std::sin(freq * s + phase);
                });
            }
            case EstimatorKind::Ecdf:
            default: {
                Sample sample = model_.sample(n, seed);
                if (a != 1.0) sample = scale_sample(sample, a);
                return ecdf_eval_grid(sample, grid);
            }
        }
    }

    ExperimentRecord run_one(std::size_t n, double a, std::size_t rep, const Truth& truth) const {
        const auto start = std::chrono::steady_clock::now();
        const GridSpec& grid = truth.field.grid;
        ExperimentRecord rec;
        rec.n = n;
        rec.a = a;
        rec.T_n = cfg_.T_n(n);
        rec.h = grid.h();
        rec.seed = replication_seed(cfg_.seed, rep);

        const ScalarField est = estimate(n, a, rec.seed, truth);
        rec.supnorm = sup_distance(truth.field, est);
        const LevelSetMask mask = plug_in_levelset(est, cfg_.c);
        const BoundaryPoints boundary = extract_boundary(mask);

        rec.d_H_bound = hausdorff_bound(constants_, rec.supnorm, a);
        if (boundary.empty() || truth.boundary.empty()) {
            rec.d_H = std::nan("");
            rec.violation = true;
        } else {
            rec.d_H = hausdorff(truth.boundary, boundary);
            rec.violation = rec.d_H > rec.d_H_bound + 2.0 * grid.cell_diameter();
        }

        rec.d_lambda = sym_diff_volume(truth.mask, mask);
        const RateRule rule = rate_rule(schedule_, a);
        const auto nd = static_cast<double>(n);
        rec.p_n = rule(nd);
        rec.p_n_d_lambda = rec.p_n * rec.d_lambda;
        const double eps = eps_n(rec.p_n, schedule_.integral_rate(nd), schedule_.p);
        rec.band_vol = band_volume(truth.field, cfg_.c, eps);
        rec.band_vol_bound = band_volume_bound(scale_constants(constants_, a), eps, cfg_.model.dim, grid.T);

        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return rec;
    }

private:
    ExperimentConfig cfg_;
    AnalyticModel model_;
    TheoryConstants constants_;
    RateSchedule schedule_;
};

inline std::vector<ExperimentRecord> run_hausdorff_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
    return ExperimentRunner(cfg).run({1.0}, jobs);
}

inline std::vector<ExperimentRecord> run_volume_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
    return ExperimentRunner(cfg).run({1.0}, jobs);
}

/// Runs every scale factor in the config (1 is added when missing) on the same
/// seeds, so each replication sees the same X at every scale.
inline std::vector<ExperimentRecord> run_scaling_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
    std::vector<double> factors = cfg.scale_factors;
    if (std::find(factors.begin(), factors.end(), 1.0) == factors.end()) factors.insert(factors.begin(), 1.0);
    return ExperimentRunner(cfg).run(factors, jobs);
}

/// d_H(a) / d_H(1) for each scaled record, matched on (n, seed).
struct ScalingRatio {
    std::size_t n;
    double a;
    std::uint64_t seed;
    double ratio;
};

inline std::vector<ScalingRatio> scaling_ratios(const std::vector<ExperimentRecord>& records) {
    std::map<std::pair<std::size_t, std::uint64_t>, double> base;
    for (const auto& r : records)
        if (r.a == 1.0) base[{r.n, r.seed}] = r.d_H;
    std::vector<ScalingRatio> out;
    for (const auto& r : records) {
        auto it = base.find({r.n, r.seed});
        if (it == base.end()) continue;
        out.push_back({r.n, r.a, r.seed, r.d_H / it->second});
    }
    return out;
}

struct SummaryRow {
    std::size_t n;
    double a;
    std::size_t count;
    double median_supnorm;
    double median_d_H;
    double violation_rate;
    double median_d_lambda;
    double median_p_n_d_lambda;
};

/// Medians per (n, a), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    std::vector<std::pair<std::size_t, double>> keys;
    for (const auto& r : records)
        if (std::find(keys.begin(), keys.end(), std::make_pair(r.n, r.a)) == keys.end()) keys.emplace_back(r.n, r.a);
    std::vector<SummaryRow> out;
    for (const auto& [n, a] : keys) {
        std::vector<double> sup, dh, dl, prod;
        std::size_t viol = 0;
        for (const auto& r : records) {
            if (r.n != n || r.a != a) continue;
            sup.push_back(r.supnorm);
            dh.push_back(r.d_H);
            dl.push_back(r.d_lambda);
            prod.push_back(r.p_n_d_lambda);
            viol += r.violation;
        }
        out.push_back({n, a, sup.size(), median(sup), median(dh), double(viol) / double(sup.size()), median(dl),
                       median(prod)});
    }
    return out;
}

}  // namespace levelplug::harness
