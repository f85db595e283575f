#pragma once

#include <cstdint>
#include <iosfwd>

#include "llr.hpp"
#include "occupancy.hpp"

namespace rbai {

/// Policy parameters: confidence scale L > 1, mixture weight eta in (0, 1],
/// max delay R > K, and a safety cap on the number of selections.
struct PolicyConfig {
    double confidence_scale = 100.0;
    double mixture_weight = 0.2;
    int max_delay = 0;
    long max_horizon = 10'000'000;
};

// Stopping threshold log(L (K-1) (K-1)!).
double stopping_threshold(double confidence_scale, int num_arms);

/// The restless environment: every arm's chain advances once per time step
/// whether or not it is selected. Each arm consumes its own RNG stream, so
/// trajectories are unaffected by how the policy draws its own randomness.
class Environment {
  public:
    Environment(const ProblemInstance& instance, std::uint64_t seed);

    // Current (time = clock()) state of an arm; only time 0 observations may
    // be read without stepping.
    int current_state(int arm) const { return chain_states_[arm]; }

    // Advances every chain one step and returns the selected arm's new state.
    int step_and_observe(int arm);

    long clock() const { return clock_; }
    std::uint64_t seed() const { return seed_; }
    Rng& policy_rng() { return policy_rng_; }
    Rng& tie_break_rng() { return tie_break_rng_; }

  private:
    const ProblemInstance* instance_;
    std::vector<int> chain_states_;
    std::vector<Rng> arm_rng_;
    Rng policy_rng_;
    Rng tie_break_rng_;
    long clock_ = 0;
    std::uint64_t seed_;
};

/// Everything the policy needs that does not depend on the trial: the delay
/// state space, the per-configuration sampling rules (one LP and one
/// stationary solve each), and the likelihood caches. Immutable; shared
/// across concurrent trials.
struct PolicyTables {
    DelayStateSpace space;
    ConfigurationSet configs;
    ObservationLogLik loglik;
    Distribution initial_dist;
    std::vector<SamplingRule> rules;       // per configuration
    std::vector<OccupancyMeasure> mixtures;
    std::vector<double> optimal_value;     // LP value per configuration
    std::vector<double> uniform_value;     // worst-case separation of the uniform occupancy
    // Mixture separation against each alternative, aligned with configs.alt(c);
    // these are the asymptotic LLR drifts under the fixed rule of c.
    std::vector<std::vector<double>> mixture_objective;
    std::vector<OccupancyResiduals> uniform_residuals;
    std::vector<OccupancyResiduals> optimal_residuals;
    std::vector<double> stationary_residual;
    std::vector<long> lp_iterations;
    double mixture_weight;
    int max_delay;
};

// Runs all per-configuration solves. With lp_dump set, each configuration's
// LP is written in plain text before solving.
PolicyTables build_policy_tables(const ProblemInstance& instance,
                                 double mixture_weight,
                                 int max_delay,
                                 std::ostream* lp_dump = nullptr);

struct TrialRecord {
    std::uint64_t seed = 0;
    long stop_time = 0;     // selections made when the stopping rule fired
    int declared = -1;      // declared best arm
    bool error = false;     // declared != true best arm
    double final_glr = 0.0;
    bool hit_horizon = false;
};

// One full run of the track-and-stop policy: round-robin start, then sample
// by the leading configuration's rule until its GLR clears the threshold.
TrialRecord run_trial(const ProblemInstance& instance,
                      const PolicyTables& tables,
                      const PolicyConfig& config,
                      std::uint64_t seed);

struct DriftCheckpoint {
    long observations = 0;
    std::vector<double> slope;    // llr(reference, alt) / observations, per alternative
    double occupancy_gap = 0.0;   // sup-norm | counts/observations - mixture |
    double leader_glr_rate = 0.0;
    bool leader_is_reference = false;
};

struct DriftRecord {
    int reference_config = -1;
    std::vector<int> alternatives;
    std::vector<DriftCheckpoint> checkpoints;
    long last_leader_mismatch = -1;  // last observation count with leader != reference
};

// Never-stopping run to a fixed horizon. With track_estimate false the
// sampling rule of the (true) reference configuration is used throughout;
// with it true the rule follows the running leading configuration. The
// trajectory stream, when given, receives one CSV line per selection.
DriftRecord run_nonstopping(const ProblemInstance& instance,
                            const PolicyTables& tables,
                            int reference_config,
                            bool track_estimate,
                            long horizon,
                            int checkpoint_count,
                            std::uint64_t seed,
                            std::ostream* trajectory = nullptr);

}  // namespace rbai
