#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace rbai {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    return out;
}

void require_directory(const std::string& out_dir) {
    if (!fs::is_directory(out_dir)) {
        raise(ErrorCode::IoError, "output directory '" + out_dir + "' does not exist");
    }
}

ordered_json residuals_json(const OccupancyResiduals& r) {
    return ordered_json{{"flow", r.flow},
                        {"normalization", r.normalization},
                        {"negativity", r.negativity},
                        {"forced", r.forced}};
}

ordered_json instance_json(const ExperimentSpec& spec, const ConfigurationSet& configs) {
    const ProblemInstance& inst = spec.instance;
    ordered_json j;
    j["num_arms"] = inst.num_arms();
    j["state_space_size"] = inst.state_count();
    j["bank_means"] = inst.bank_means();
    j["true_assignment"] = inst.truth().perm;
    j["best_arm"] = configs.best_arm_of(configs.truth_index());
    j["num_configurations"] = configs.size();
    return j;
}

ordered_json policy_json(const ExperimentSpec& spec) {
    ordered_json j;
    j["L"] = spec.policy.confidence_scale;
    j["eta"] = spec.policy.mixture_weight;
    j["R"] = spec.policy.max_delay;
    j["max_horizon"] = spec.policy.max_horizon;
    j["threshold"] = stopping_threshold(spec.policy.confidence_scale,
                                        spec.instance.num_arms());
    return j;
}

// The deterministic numbers every report carries: the separation values of
// the true configuration, the stopping-time bound, the lower-bound proxy,
// and the feasibility/stationarity residuals behind them.
ordered_json theory_json(const ExperimentSpec& spec, const PolicyTables& tables) {
    const int truth = tables.configs.truth_index();
    const double t_star = tables.optimal_value[truth];
    const double t_unif = tables.uniform_value[truth];
    const double eta = spec.policy.mixture_weight;
    const double l = spec.policy.confidence_scale;
    ordered_json j;
    j["t_star"] = t_star;
    j["t_unif"] = t_unif;
    j["stop_time_bound"] = 1.0 / (eta * t_unif + (1.0 - eta) * t_star);
    j["lower_bound_proxy"] = bernoulli_kl(1.0 / l, 1.0 - 1.0 / l) / t_star;
    j["state_count"] = tables.space.size();
    j["mixture_drift"] = tables.mixture_objective[truth];
    j["residuals"] = ordered_json{
        {"stationary", tables.stationary_residual[truth]},
        {"uniform", residuals_json(tables.uniform_residuals[truth])},
        {"optimal", residuals_json(tables.optimal_residuals[truth])},
    };
    j["lp_iterations"] = tables.lp_iterations[truth];
    return j;
}

bool bank_has_identical_rows(const ProblemInstance& inst) {
    for (const auto& p : inst.bank()) {
        for (int i = 1; i < p.size(); ++i) {
            if ((p.matrix().row(i) - p.matrix().row(0)).lpNorm<Eigen::Infinity>() > 1e-12) {
                return false;
            }
        }
    }
    return true;
}

PolicyTables build_tables_for(const ExperimentSpec& spec, const std::string& out_dir) {
    if (spec.lp_dump) {
        auto dump = open_output(fs::path(out_dir) / "lp_listing.txt");
        return build_policy_tables(spec.instance, spec.policy.mixture_weight,
                                   spec.policy.max_delay, &dump);
    }
    return build_policy_tables(spec.instance, spec.policy.mixture_weight,
                               spec.policy.max_delay);
}

void write_trials_csv(const fs::path& path, const std::vector<TrialRecord>& records) {
    auto out = open_output(path);
    out << "seed,tau,declared,error,hit_horizon\n";
    for (const auto& r : records) {
        out << r.seed << ',' << r.stop_time << ',' << r.declared << ',' << (r.error ? 1 : 0)
            << ',' << (r.hit_horizon ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_output(path);
    out << "R,T_R_star,T_R_unif,n_states\n";
    for (const auto& r : rows) {
        out << r.max_delay << ',' << fmt(r.optimal_value) << ',' << fmt(r.uniform_value) << ','
            << r.state_count << '\n';
    }
}

void write_drift_csv(const fs::path& path, const DriftRecord& drift) {
    auto out = open_output(path);
    out << "n";
    for (int alt : drift.alternatives) out << ",slope_cfg" << alt;
    out << ",occupancy_gap,leader_glr_rate\n";
    for (const auto& cp : drift.checkpoints) {
        out << cp.observations;
        for (double s : cp.slope) out << ',' << fmt(s);
        out << ',' << fmt(cp.occupancy_gap) << ',' << fmt(cp.leader_glr_rate) << '\n';
    }
}

ordered_json run_monte_carlo(const ExperimentSpec& spec, const std::string& out_dir,
                             ordered_json report) {
    PolicyTables tables = build_tables_for(spec, out_dir);
    report["theory"] = theory_json(spec, tables);

    std::vector<TrialRecord> records =
        run_trials(spec.instance, tables, spec.policy, spec.seed, spec.trials, spec.workers);
    MonteCarloStats stats =
        summarize_trials(records, std::log(spec.policy.confidence_scale));

    ordered_json results;
    results["trials"] = stats.trials;
    results["errors"] = stats.errors;
    results["horizon_hits"] = stats.horizon_hits;
    results["error_rate"] = stats.error_rate;
    results["error_rate_ci99"] = {stats.ci_low, stats.ci_high};
    results["mean_tau"] = stats.mean_stop_time;
    results["median_tau"] = stats.median_stop_time;
    results["tau_per_log_L"] = stats.stop_time_per_log_l;
    results["trials_csv"] = "trials.csv";
    report["results"] = std::move(results);

    write_trials_csv(fs::path(out_dir) / "trials.csv", records);
    return report;
}

ordered_json run_drift(const ExperimentSpec& spec, const std::string& out_dir,
                       ordered_json report) {
    PolicyTables tables = build_tables_for(spec, out_dir);
    report["theory"] = theory_json(spec, tables);

    const int truth = tables.configs.truth_index();
    std::ofstream trajectory;
    if (spec.trajectory_log) {
        trajectory = open_output(fs::path(out_dir) / "trajectory.csv");
    }
    DriftRecord drift = run_nonstopping(spec.instance, tables, truth,
                                        spec.drift_track_estimate, spec.policy.max_horizon,
                                        200, spec.seed,
                                        spec.trajectory_log ? &trajectory : nullptr);
    write_drift_csv(fs::path(out_dir) / "drift.csv", drift);

    const auto& last = drift.checkpoints.back();
    const std::vector<double>& limits = tables.mixture_objective[truth];
    std::vector<double> relative_error(limits.size());
    for (std::size_t i = 0; i < limits.size(); ++i) {
        relative_error[i] = std::abs(last.slope[i] - limits[i]) / limits[i];
    }

    ordered_json results;
    results["horizon"] = spec.policy.max_horizon;
    results["track"] = spec.drift_track_estimate ? "estimate" : "fixed";
    results["reference_config"] = drift.reference_config;
    results["alternatives"] = drift.alternatives;
    results["observations"] = last.observations;
    results["final_slope"] = last.slope;
    results["drift_limit"] = limits;
    results["relative_error"] = relative_error;
    results["occupancy_sup_gap"] = last.occupancy_gap;
    results["last_leader_mismatch"] = drift.last_leader_mismatch;
    results["drift_csv"] = "drift.csv";
    report["results"] = std::move(results);
    return report;
}

ordered_json sweep_json(const ExperimentSpec& spec, std::vector<SweepRow>& rows) {
    ordered_json arr = ordered_json::array();
    rows.clear();
    for (int r : spec.sweep_delays) {
        rows.push_back(sweep_point(spec.instance, r));
        const SweepRow& row = rows.back();
        arr.push_back(ordered_json{{"R", row.max_delay},
                                   {"t_star", row.optimal_value},
                                   {"t_unif", row.uniform_value},
                                   {"n_states", row.state_count}});
    }
    return arr;
}

ordered_json run_sweep(const ExperimentSpec& spec, const std::string& out_dir,
                       ordered_json report) {
    std::vector<SweepRow> rows;
    report["sweep"] = sweep_json(spec, rows);
    if (bank_has_identical_rows(spec.instance)) {
        ConfigurationSet configs(spec.instance);
        report["arm_weight_lp_value"] = solve_arm_weight_lp(
            configs.truth_index(), configs, bank_stationary_kl(spec.instance.bank()));
    }
    write_sweep_csv(fs::path(out_dir) / "lp_sweep.csv", rows);
    return report;
}

ordered_json report_skeleton(const ExperimentSpec& spec, ExperimentMode mode) {
    ordered_json report;
    report["schema"] = "rbai-report-v1";
    report["mode"] = mode_name(mode);
    report["config"] = spec.raw;
    report["instance"] = instance_json(spec, ConfigurationSet(spec.instance));
    report["policy"] = policy_json(spec);
    return report;
}

}  // namespace

std::pair<double, double> wilson_interval(long k, long n, double z) {
    if (n <= 0) return {0.0, 1.0};
    double p = static_cast<double>(k) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<TrialRecord> run_trials(const ProblemInstance& instance,
                                    const PolicyTables& tables,
                                    const PolicyConfig& config,
                                    std::uint64_t base_seed,
                                    long trials,
                                    int workers) {
    std::vector<TrialRecord> records(trials);
    workers = static_cast<int>(std::min<long>(workers, trials));
    if (workers <= 1) {
        for (long i = 0; i < trials; ++i) {
            records[i] = run_trial(instance, tables, config, mix_seed(base_seed, i));
        }
        return records;
    }

    std::atomic<long> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto work = [&]() {
        while (true) {
            long i = next.fetch_add(1);
            if (i >= trials) return;
            try {
                records[i] = run_trial(instance, tables, config, mix_seed(base_seed, i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

MonteCarloStats summarize_trials(const std::vector<TrialRecord>& records, double log_l) {
    MonteCarloStats stats;
    stats.trials = static_cast<long>(records.size());
    std::vector<long> taus;
    taus.reserve(records.size());
    double sum = 0.0;
    for (const auto& r : records) {
        if (r.error) ++stats.errors;
        if (r.hit_horizon) ++stats.horizon_hits;
        taus.push_back(r.stop_time);
        sum += static_cast<double>(r.stop_time);
    }
    stats.error_rate = static_cast<double>(stats.errors) / stats.trials;
    std::tie(stats.ci_low, stats.ci_high) =
        wilson_interval(stats.errors, stats.trials, 2.5758293035489004);
    stats.mean_stop_time = sum / stats.trials;
    std::sort(taus.begin(), taus.end());
    std::size_t mid = taus.size() / 2;
    stats.median_stop_time = taus.size() % 2 == 1
                                 ? static_cast<double>(taus[mid])
                                 : 0.5 * static_cast<double>(taus[mid - 1] + taus[mid]);
    stats.stop_time_per_log_l = stats.mean_stop_time / log_l;
    return stats;
}

SweepRow sweep_point(const ProblemInstance& instance, int max_delay) {
    KernelPowerCache powers(instance.bank(), max_delay);
    DelayStateSpace space(instance.num_arms(), max_delay, instance.state_count());
    ConfigurationSet configs(instance);
    KlCoefficientCache kl(powers);
    const int truth = configs.truth_index();
    DelayKernel kernel(configs.config(truth), space, powers);

    SweepRow row;
    row.max_delay = max_delay;
    row.state_count = space.size();
    Eigen::VectorXd mu = uniform_policy_stationary(kernel, space);
    row.uniform_value =
        worst_case_separation(uniform_occupancy(mu, space), truth, configs, kl, space);
    row.optimal_value = solve_separation_lp(truth, space, kernel, kl, configs).value;
    return row;
}

nlohmann::ordered_json describe_experiment(const ExperimentSpec& spec) {
    ordered_json report = report_skeleton(spec, spec.mode);
    SweepRow row = sweep_point(spec.instance, spec.policy.max_delay);
    const double eta = spec.policy.mixture_weight;
    ordered_json theory;
    theory["t_star"] = row.optimal_value;
    theory["t_unif"] = row.uniform_value;
    theory["stop_time_bound"] =
        1.0 / (eta * row.uniform_value + (1.0 - eta) * row.optimal_value);
    theory["lower_bound_proxy"] =
        bernoulli_kl(1.0 / spec.policy.confidence_scale,
                     1.0 - 1.0 / spec.policy.confidence_scale) /
        row.optimal_value;
    theory["state_count"] = row.state_count;
    report["theory"] = std::move(theory);
    return report;
}

nlohmann::ordered_json verify_experiment(const ExperimentSpec& spec,
                                         const std::string& out_dir) {
    require_directory(out_dir);
    const fs::path report_path = fs::path(out_dir) / "report.json";
    std::ifstream in(report_path);
    if (!in) raise(ErrorCode::IoError, "cannot read '" + report_path.string() + "'");
    ordered_json stored;
    try {
        stored = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ParseError, std::string("report.json: ") + e.what());
    }

    std::vector<std::string> failures;
    auto check_equal = [&](const char* what, const ordered_json& expect,
                           const ordered_json& got) {
        if (expect != got) {
            failures.push_back(std::string(what) + " differs: recomputed " + expect.dump() +
                               ", stored " + got.dump());
        }
    };

    ordered_json recomputed;
    std::string stored_mode = stored.value("mode", "");
    if (stored_mode == mode_name(ExperimentMode::LpSweep)) {
        std::vector<SweepRow> rows;
        recomputed["sweep"] = sweep_json(spec, rows);
        check_equal("sweep", recomputed["sweep"], stored.value("sweep", ordered_json()));
    } else {
        PolicyTables tables =
            build_policy_tables(spec.instance, spec.policy.mixture_weight,
                                spec.policy.max_delay);
        recomputed["theory"] = theory_json(spec, tables);
        check_equal("theory", recomputed["theory"], stored.value("theory", ordered_json()));

        const int truth = tables.configs.truth_index();
        if (tables.stationary_residual[truth] > 1e-10) {
            failures.push_back("stationary residual exceeds 1e-10");
        }
        if (tables.uniform_residuals[truth].worst() > 1e-8) {
            failures.push_back("uniform occupancy residuals exceed 1e-8");
        }
        if (tables.optimal_residuals[truth].worst() > 1e-8) {
            failures.push_back("optimal occupancy residuals exceed 1e-8");
        }
    }
    recomputed["policy"] = policy_json(spec);
    check_equal("policy", recomputed["policy"], stored.value("policy", ordered_json()));

    if (!failures.empty()) {
        std::string message;
        for (const auto& f : failures) {
            if (!message.empty()) message += "; ";
            message += f;
        }
        raise(ErrorCode::VerifyFailed, message);
    }

    ordered_json report;
    report["schema"] = "rbai-report-v1";
    report["mode"] = mode_name(ExperimentMode::Verify);
    report["verified"] = true;
    report["report"] = report_path.string();
    return report;
}

nlohmann::ordered_json run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
    require_directory(out_dir);
    if (spec.mode == ExperimentMode::Verify) {
        return verify_experiment(spec, out_dir);
    }

    ordered_json report = report_skeleton(spec, spec.mode);
    switch (spec.mode) {
    case ExperimentMode::MonteCarlo:
        report = run_monte_carlo(spec, out_dir, std::move(report));
        break;
    case ExperimentMode::Drift:
        report = run_drift(spec, out_dir, std::move(report));
        break;
    case ExperimentMode::LpSweep:
        report = run_sweep(spec, out_dir, std::move(report));
        break;
    case ExperimentMode::Verify:
        break;
    }

    auto out = open_output(fs::path(out_dir) / "report.json");
    out << report.dump(2) << '\n';
    return report;
}

}  // namespace rbai
