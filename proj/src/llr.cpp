#include "llr.hpp"

#include <cmath>
#include <limits>

namespace rbai {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ObservationLogLik::ObservationLogLik(const KernelPowerCache& powers)
    : max_power_(powers.max_power()), states_(powers.state_count()) {
    const int bank = powers.bank_size();
    table_.assign(static_cast<std::size_t>(bank) * max_power_ * states_ * states_, 0.0);
    for (int k = 0; k < bank; ++k) {
        for (int d = 1; d <= max_power_; ++d) {
            const Eigen::MatrixXd& p = powers.power(k, d);
            for (int i = 0; i < states_; ++i) {
                for (int j = 0; j < states_; ++j) {
                    double v = p(i, j);
                    table_[((static_cast<std::size_t>(k) * max_power_ + d - 1) * states_ + i) *
                               states_ +
                           j] = v > 0.0 ? std::log(v) : kNegInf;
                }
            }
        }
    }
}

CountTable::CountTable(int n_states, int num_arms, int chain_states)
    : counts_(static_cast<std::size_t>(n_states) * num_arms * chain_states, 0),
      num_arms_(num_arms),
      chain_states_(chain_states) {}

std::int64_t CountTable::arm_marginal(int state_index, int arm) const {
    std::int64_t sum = 0;
    for (int j = 0; j < chain_states_; ++j) sum += count(state_index, arm, j);
    return sum;
}

std::int64_t CountTable::state_marginal(int state_index) const {
    std::int64_t sum = 0;
    for (int a = 0; a < num_arms_; ++a) sum += arm_marginal(state_index, a);
    return sum;
}

LlrLedger::LlrLedger(const std::vector<int>& first_obs,
                     const Distribution& initial_dist,
                     const ConfigurationSet& configs,
                     const ObservationLogLik& loglik,
                     const DelayStateSpace& space)
    : configs_(&configs),
      loglik_(&loglik),
      space_(&space),
      counts_(space.size(), space.num_arms(), space.state_count()),
      increments_(space.num_arms(), 0.0) {
    const int arms = configs.num_arms();
    if (static_cast<int>(first_obs.size()) != arms) {
        raise(ErrorCode::InvalidArgument, "one first observation per arm required");
    }
    // Arm a is first selected at time a, after its chain took a steps from
    // the initial distribution; its contribution is log of the evolved mass
    // at the observed state. Arm 0 contributes log phi(j) for every
    // configuration, so the initial terms differ only through arms >= 1.
    z0_.assign(configs.size(), 0.0);
    for (int c = 0; c < configs.size(); ++c) {
        const auto& perm = configs.config(c).perm;
        double sum = 0.0;
        for (int a = 0; a < arms; ++a) {
            double prob;
            if (a == 0) {
                prob = initial_dist[first_obs[0]];
            } else {
                // (phi^T P^a) at the observed state
                prob = 0.0;
                for (int i = 0; i < initial_dist.size(); ++i) {
                    double step = std::exp(loglik.log_prob(perm[a], a, i, first_obs[a]));
                    prob += initial_dist[i] * step;
                }
            }
            if (prob <= 0.0) {
                raise(ErrorCode::ImpossibleObservation,
                      "round-robin observation has zero probability");
            }
            sum += std::log(prob);
        }
        z0_[c] = sum;
    }
    z_ = z0_;
}

void LlrLedger::record(int state_index, int arm, int observed) {
    const DelayState& st = space_->state(state_index);
    const int d = st.delay[arm];
    const int from = st.last[arm];
    const int banks = static_cast<int>(increments_.size());
    for (int k = 0; k < banks; ++k) {
        double inc = loglik_->log_prob(k, d, from, observed);
        if (inc == kNegInf) {
            raise(ErrorCode::ZeroLikelihood,
                  "observed a transition with zero probability; the kernels are not "
                  "mutually absolutely continuous");
        }
        increments_[k] = inc;
    }
    counts_.add(state_index, arm, observed);
    for (int c = 0; c < configs_->size(); ++c) {
        z_[c] += increments_[configs_->config(c).perm[arm]];
    }
}

double LlrLedger::glr(int config) const {
    double best_alt = -std::numeric_limits<double>::infinity();
    for (int alt : configs_->alt(config)) {
        best_alt = std::max(best_alt, z_[alt]);
    }
    return z_[config] - best_alt;
}

std::vector<int> LlrLedger::leaders() const {
    // max over Alt(C) of z only depends on C through its best-arm class, so
    // the leading GLR comes from per-class maxima of z.
    const int arms = configs_->num_arms();
    std::vector<double> class_max(arms, -std::numeric_limits<double>::infinity());
    for (int c = 0; c < configs_->size(); ++c) {
        int cls = configs_->best_arm_of(c);
        class_max[cls] = std::max(class_max[cls], z_[c]);
    }
    int top_class = 0;
    for (int b = 1; b < arms; ++b) {
        if (class_max[b] > class_max[top_class]) top_class = b;
    }
    double top = class_max[top_class];
    double second = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < arms; ++b) {
        if (b != top_class) second = std::max(second, class_max[b]);
    }

    double best_glr = -std::numeric_limits<double>::infinity();
    std::vector<int> out;
    for (int c = 0; c < configs_->size(); ++c) {
        double opponent = configs_->best_arm_of(c) == top_class ? second : top;
        double m = z_[c] - opponent;
        if (m > best_glr) {
            best_glr = m;
            out.clear();
        }
        if (m == best_glr) out.push_back(c);
    }
    return out;
}

LlrLedger::Estimate LlrLedger::argmax_estimate(Rng& tie_break) const {
    std::vector<int> best = leaders();
    int pick = best.size() == 1 ? best[0] : best[tie_break.uniform_index(
                                                static_cast<int>(best.size()))];
    return Estimate{pick, glr(pick)};
}

double LlrLedger::batch_llr(int config, int other) const {
    const auto& perm = configs_->config(config).perm;
    const auto& other_perm = configs_->config(other).perm;
    double sum = z0_[config] - z0_[other];
    for (int s = 0; s < space_->size(); ++s) {
        const DelayState& st = space_->state(s);
        for (int a = 0; a < space_->num_arms(); ++a) {
            if (perm[a] == other_perm[a]) continue;  // identical kernels cancel
            for (int j = 0; j < space_->state_count(); ++j) {
                std::int64_t n = counts_.count(s, a, j);
                if (n == 0) continue;
                sum += static_cast<double>(n) *
                       (loglik_->log_prob(perm[a], st.delay[a], st.last[a], j) -
                        loglik_->log_prob(other_perm[a], st.delay[a], st.last[a], j));
            }
        }
    }
    return sum;
}

}  // namespace rbai
