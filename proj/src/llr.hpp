#pragma once

#include "delay_mdp.hpp"
#include "rng.hpp"

namespace rbai {

/// log (P_k)^d (j | i) for every bank kernel and delay, the per-observation
/// increments of the likelihood ledger. Zero transition probabilities are
/// stored as -inf; mutual absolute continuity makes them unreachable under
/// any configuration if they are unreachable under one.
class ObservationLogLik {
  public:
    explicit ObservationLogLik(const KernelPowerCache& powers);

    double log_prob(int bank_index, int d, int from, int to) const {
        return table_[((static_cast<std::size_t>(bank_index) * max_power_ + d - 1) * states_ +
                       from) *
                          states_ +
                      to];
    }

  private:
    std::vector<double> table_;
    int max_power_;
    int states_;
};

/// Visit counts per (delay state, arm, observed state). Together with the
/// initial terms these determine every log-likelihood ratio exactly.
class CountTable {
  public:
    CountTable(int n_states, int num_arms, int chain_states);

    void add(int state_index, int arm, int observed) {
        ++counts_[cell(state_index, arm, observed)];
        ++total_;
    }

    std::int64_t count(int state_index, int arm, int observed) const {
        return counts_[cell(state_index, arm, observed)];
    }
    std::int64_t arm_marginal(int state_index, int arm) const;
    std::int64_t state_marginal(int state_index) const;
    std::int64_t total() const { return total_; }

    int num_arms() const { return num_arms_; }
    int chain_states() const { return chain_states_; }

  private:
    std::size_t cell(int s, int a, int j) const {
        return (static_cast<std::size_t>(s) * num_arms_ + a) * chain_states_ + j;
    }
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
    int num_arms_;
    int chain_states_;
};

/// Running log-likelihood per configuration: the initial round-robin term
/// plus the accumulated observation terms. Control terms are identical across
/// configurations and cancel from every ratio, so they are never computed.
class LlrLedger {
  public:
    // first_obs[a] is the state observed on arm a during the round-robin
    // (arm a selected at time a, so its chain has evolved a steps from phi).
    LlrLedger(const std::vector<int>& first_obs,
              const Distribution& initial_dist,
              const ConfigurationSet& configs,
              const ObservationLogLik& loglik,
              const DelayStateSpace& space);

    // Record one observation: the process sat at `state_index`, `arm` was
    // selected, and `observed` was seen. O(K + |configs|).
    void record(int state_index, int arm, int observed);

    double value(int config) const { return z_[config]; }
    double initial_term(int config) const { return z0_[config]; }

    // Z_C - Z_C'; antisymmetric by construction.
    double llr(int config, int other) const { return z_[config] - z_[other]; }

    // min over Alt(config) of llr(config, .) = z[config] - max over the
    // alternatives.
    double glr(int config) const;

    // Every configuration attaining max_C glr(C).
    std::vector<int> leaders() const;

    struct Estimate {
        int config;
        double glr;
    };
    // Leading configuration with ties broken uniformly at random.
    Estimate argmax_estimate(Rng& tie_break) const;

    // Recomputes llr(config, other) from the count table and initial terms;
    // the incremental values must agree with this to accumulation precision.
    double batch_llr(int config, int other) const;

    const CountTable& counts() const { return counts_; }
    std::int64_t observations() const { return counts_.total(); }

  private:
    const ConfigurationSet* configs_;
    const ObservationLogLik* loglik_;
    const DelayStateSpace* space_;
    std::vector<double> z_;
    std::vector<double> z0_;
    CountTable counts_;
    std::vector<double> increments_;  // scratch, one slot per bank kernel
};

}  // namespace rbai
