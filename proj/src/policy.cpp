#include "policy.hpp"

#include <cmath>
#include <ostream>

namespace rbai {

double stopping_threshold(double confidence_scale, int num_arms) {
    if (!(confidence_scale > 1.0)) {
        raise(ErrorCode::ValidationError, "confidence scale must exceed 1");
    }
    if (num_arms < 2) raise(ErrorCode::InvalidArgument, "need at least 2 arms");
    double factorial = 1.0;
    for (int i = 2; i < num_arms; ++i) factorial *= i;
    return std::log(confidence_scale * (num_arms - 1) * factorial);
}

Environment::Environment(const ProblemInstance& instance, std::uint64_t seed)
    : instance_(&instance),
      policy_rng_(derive_stream(seed, stream::kPolicy)),
      tie_break_rng_(derive_stream(seed, stream::kTieBreak)),
      seed_(seed) {
    const int k = instance.num_arms();
    arm_rng_.reserve(k);
    chain_states_.resize(k);
    for (int a = 0; a < k; ++a) {
        arm_rng_.push_back(derive_stream(seed, static_cast<std::uint64_t>(a)));
        chain_states_[a] = arm_rng_[a].sample(instance.initial_dist().probs());
    }
}

int Environment::step_and_observe(int arm) {
    const int k = instance_->num_arms();
    for (int b = 0; b < k; ++b) {
        chain_states_[b] = arm_rng_[b].sample(instance_->true_kernel(b).matrix().row(chain_states_[b]));
    }
    ++clock_;
    return chain_states_[arm];
}

PolicyTables build_policy_tables(const ProblemInstance& instance,
                                 double mixture_weight,
                                 int max_delay,
                                 std::ostream* lp_dump) {
    if (!(mixture_weight > 0.0 && mixture_weight <= 1.0)) {
        raise(ErrorCode::ValidationError, "mixture weight must lie in (0, 1]");
    }
    if (max_delay <= instance.num_arms()) {
        raise(ErrorCode::ValidationError, "max delay must exceed the number of arms");
    }

    KernelPowerCache powers(instance.bank(), max_delay);
    PolicyTables tables{
        DelayStateSpace(instance.num_arms(), max_delay, instance.state_count()),
        ConfigurationSet(instance),
        ObservationLogLik(powers),
        instance.initial_dist(),
        {}, {}, {}, {}, {}, {}, {}, {}, {},
        mixture_weight,
        max_delay,
    };
    KlCoefficientCache kl(powers);

    const int n_configs = tables.configs.size();
    tables.rules.reserve(n_configs);
    tables.mixtures.reserve(n_configs);
    for (int c = 0; c < n_configs; ++c) {
        DelayKernel kernel(tables.configs.config(c), tables.space, powers);
        Eigen::VectorXd mu = uniform_policy_stationary(kernel, tables.space);
        Eigen::MatrixXd unif_policy = Eigen::MatrixXd::Constant(
            tables.space.size(), instance.num_arms(), 1.0 / instance.num_arms());
        tables.stationary_residual.push_back(
            (kernel.induced_chain(unif_policy, tables.space).transpose() * mu - mu)
                .lpNorm<Eigen::Infinity>());

        OccupancyMeasure unif = uniform_occupancy(mu, tables.space);
        tables.uniform_residuals.push_back(check_occupancy(unif, kernel, tables.space));
        tables.uniform_value.push_back(
            worst_case_separation(unif, c, tables.configs, kl, tables.space));

        if (lp_dump) *lp_dump << "\\ configuration " << c << "\n";
        SeparationSolution opt =
            solve_separation_lp(c, tables.space, kernel, kl, tables.configs, lp_dump);
        tables.optimal_value.push_back(opt.value);
        tables.optimal_residuals.push_back(opt.residuals);
        tables.lp_iterations.push_back(opt.lp_iterations);

        OccupancyMeasure mix = mixture_occupancy(unif, opt.measure, mixture_weight);
        tables.rules.push_back(sampling_rule(mix, tables.space));
        std::vector<double> drifts;
        for (int alt : tables.configs.alt(c)) {
            drifts.push_back(kl_weighted_objective(mix, c, alt, tables.configs, kl, tables.space));
        }
        tables.mixture_objective.push_back(std::move(drifts));
        tables.mixtures.push_back(std::move(mix));
    }
    return tables;
}

namespace {

// Shared trial prologue: round-robin over the arms, initial delay state, and
// a ledger seeded with the round-robin observations.
struct TrialState {
    Environment env;
    LlrLedger ledger;
    int state_index;
    long selections;  // selections made so far (round-robin included)
};

TrialState start_trial(const ProblemInstance& instance,
                       const PolicyTables& tables,
                       std::uint64_t seed) {
    Environment env(instance, seed);
    const int k = instance.num_arms();
    std::vector<int> first_obs(k);
    first_obs[0] = env.current_state(0);
    for (int a = 1; a < k; ++a) first_obs[a] = env.step_and_observe(a);
    DelayState initial = initial_delay_state(first_obs);
    LlrLedger ledger(first_obs, tables.initial_dist, tables.configs, tables.loglik,
                     tables.space);
    int index = tables.space.index_of(initial);
    return TrialState{std::move(env), std::move(ledger), index, k};
}

}  // namespace

TrialRecord run_trial(const ProblemInstance& instance,
                      const PolicyTables& tables,
                      const PolicyConfig& config,
                      std::uint64_t seed) {
    if (config.max_delay != tables.max_delay) {
        raise(ErrorCode::InvalidArgument, "policy tables built for a different max delay");
    }
    const double threshold = stopping_threshold(config.confidence_scale, instance.num_arms());
    TrialState ts = start_trial(instance, tables, seed);

    TrialRecord record;
    record.seed = seed;
    const int true_best = tables.configs.best_arm_of(tables.configs.truth_index());
    while (true) {
        LlrLedger::Estimate est = ts.ledger.argmax_estimate(ts.env.tie_break_rng());
        if (est.glr >= threshold) {
            record.stop_time = ts.selections;
            record.declared = tables.configs.best_arm_of(est.config);
            record.error = record.declared != true_best;
            record.final_glr = est.glr;
            return record;
        }
        if (ts.selections >= config.max_horizon) {
            record.stop_time = ts.selections;
            record.declared = tables.configs.best_arm_of(est.config);
            record.error = record.declared != true_best;
            record.final_glr = est.glr;
            record.hit_horizon = true;
            return record;
        }
        int arm = ts.env.policy_rng().sample(tables.rules[est.config].probs.row(ts.state_index));
        int obs = ts.env.step_and_observe(arm);
        ts.ledger.record(ts.state_index, arm, obs);
        ts.state_index = tables.space.successor(ts.state_index, arm, obs);
        ++ts.selections;
    }
}

DriftRecord run_nonstopping(const ProblemInstance& instance,
                            const PolicyTables& tables,
                            int reference_config,
                            bool track_estimate,
                            long horizon,
                            int checkpoint_count,
                            std::uint64_t seed,
                            std::ostream* trajectory) {
    if (horizon < 1) raise(ErrorCode::InvalidArgument, "horizon must be positive");
    TrialState ts = start_trial(instance, tables, seed);

    DriftRecord record;
    record.reference_config = reference_config;
    record.alternatives = tables.configs.alt(reference_config);
    const OccupancyMeasure& target = tables.mixtures[reference_config];
    const long stride = std::max<long>(1, horizon / std::max(checkpoint_count, 1));

    if (trajectory) *trajectory << "n,arm,obs,state_index,leader_glr\n";

    bool leader_is_reference = false;
    auto checkpoint = [&]() {
        const long n = ts.ledger.observations();
        DriftCheckpoint cp;
        cp.observations = n;
        cp.slope.reserve(record.alternatives.size());
        for (int alt : record.alternatives) {
            cp.slope.push_back(ts.ledger.llr(reference_config, alt) / static_cast<double>(n));
        }
        double gap = 0.0;
        for (int s = 0; s < tables.space.size(); ++s) {
            for (int a = 0; a < tables.space.num_arms(); ++a) {
                double empirical =
                    static_cast<double>(ts.ledger.counts().arm_marginal(s, a)) / n;
                gap = std::max(gap, std::abs(empirical - target.mass(s, a)));
            }
        }
        cp.occupancy_gap = gap;
        cp.leader_glr_rate = ts.ledger.glr(reference_config) / static_cast<double>(n);
        cp.leader_is_reference = leader_is_reference;
        record.checkpoints.push_back(std::move(cp));
    };

    for (long step = 0; step < horizon; ++step) {
        LlrLedger::Estimate est = ts.ledger.argmax_estimate(ts.env.tie_break_rng());
        leader_is_reference = est.config == reference_config;
        if (!leader_is_reference) {
            record.last_leader_mismatch = ts.ledger.observations();
        }
        int rule_config = track_estimate ? est.config : reference_config;
        int arm = ts.env.policy_rng().sample(tables.rules[rule_config].probs.row(ts.state_index));
        int obs = ts.env.step_and_observe(arm);
        ts.ledger.record(ts.state_index, arm, obs);
        if (trajectory) {
            *trajectory << ts.ledger.observations() << ',' << arm << ',' << obs << ','
                        << ts.state_index << ',' << est.glr << '\n';
        }
        ts.state_index = tables.space.successor(ts.state_index, arm, obs);
        ++ts.selections;
        if (ts.ledger.observations() % stride == 0 || step + 1 == horizon) checkpoint();
    }
    return record;
}

}  // namespace rbai
