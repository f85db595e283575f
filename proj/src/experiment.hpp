#pragma once

#include "config.hpp"

namespace rbai {

/// Aggregate of one Monte Carlo run.
struct MonteCarloStats {
    long trials = 0;
    long errors = 0;
    long horizon_hits = 0;
    double error_rate = 0.0;
    double ci_low = 0.0;   // Wilson 99% interval for the error probability
    double ci_high = 0.0;
    double mean_stop_time = 0.0;
    double median_stop_time = 0.0;
    double stop_time_per_log_l = 0.0;
};

// Wilson score interval for k successes in n Bernoulli trials at the given
// normal quantile (2.5758... for 99%).
std::pair<double, double> wilson_interval(long k, long n, double z);

// Independent trials fanned out over a bounded worker pool. Trial i uses the
// seed mix_seed(base_seed, i); records come back indexed by trial, so the
// result is identical for every worker count.
std::vector<TrialRecord> run_trials(const ProblemInstance& instance,
                                    const PolicyTables& tables,
                                    const PolicyConfig& config,
                                    std::uint64_t base_seed,
                                    long trials,
                                    int workers);

MonteCarloStats summarize_trials(const std::vector<TrialRecord>& records, double log_l);

struct SweepRow {
    int max_delay = 0;
    double optimal_value = 0.0;
    double uniform_value = 0.0;
    int state_count = 0;
};

// T_R* and T_R^unif of the true configuration at one max delay.
SweepRow sweep_point(const ProblemInstance& instance, int max_delay);

// Runs the experiment in its configured mode and writes report.json plus the
// mode's CSV outputs into out_dir (which must exist). Returns the report.
nlohmann::ordered_json run_experiment(const ExperimentSpec& spec, const std::string& out_dir);

// Instance and theory summary without running anything stochastic.
nlohmann::ordered_json describe_experiment(const ExperimentSpec& spec);

// Recomputes the deterministic theory section and checks it against the
// report.json found in out_dir, together with the residual tolerances.
// Raises VerifyFailed on any mismatch.
nlohmann::ordered_json verify_experiment(const ExperimentSpec& spec, const std::string& out_dir);

}  // namespace rbai
