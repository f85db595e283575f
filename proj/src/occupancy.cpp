#include "occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rbai {

double OccupancyResiduals::worst() const {
    return std::max(std::max(flow, normalization), std::max(negativity, forced));
}

KlCoefficientCache::KlCoefficientCache(const KernelPowerCache& powers)
    : bank_(powers.bank_size()), max_power_(powers.max_power()), states_(powers.state_count()) {
    table_.assign(static_cast<std::size_t>(bank_) * bank_ * max_power_ * states_, 0.0);
    for (int k = 0; k < bank_; ++k) {
        for (int l = 0; l < bank_; ++l) {
            if (k == l) continue;
            for (int d = 1; d <= max_power_; ++d) {
                const Eigen::MatrixXd& pk = powers.power(k, d);
                const Eigen::MatrixXd& pl = powers.power(l, d);
                for (int i = 0; i < states_; ++i) {
                    table_[((static_cast<std::size_t>(k) * bank_ + l) * max_power_ + d - 1) *
                               states_ +
                           i] = kl_divergence(pk.row(i).transpose(), pl.row(i).transpose());
                }
            }
        }
    }
}

Eigen::VectorXd uniform_policy_stationary(const DelayKernel& kernel,
                                          const DelayStateSpace& space) {
    Eigen::MatrixXd policy =
        Eigen::MatrixXd::Constant(space.size(), space.num_arms(), 1.0 / space.num_arms());
    Eigen::MatrixXd chain = kernel.induced_chain(policy, space);
    Eigen::VectorXd mu = stationary_of_kernel(chain);
    for (int i = 0; i < mu.size(); ++i) {
        if (mu[i] <= 0.0) {
            raise(ErrorCode::SingularSystem,
                  "uniform-policy stationary distribution is not strictly positive");
        }
    }
    return mu;
}

OccupancyMeasure uniform_occupancy(const Eigen::VectorXd& stationary,
                                   const DelayStateSpace& space) {
    OccupancyMeasure out;
    out.mass = Eigen::MatrixXd::Zero(space.size(), space.num_arms());
    for (int s = 0; s < space.size(); ++s) {
        int forced = space.forced_arm_at(s);
        if (forced >= 0) {
            out.mass(s, forced) = stationary[s];
        } else {
            out.mass.row(s).setConstant(stationary[s] / space.num_arms());
        }
    }
    return out;
}

double kl_weighted_objective(const OccupancyMeasure& measure,
                             int config,
                             int alt_config,
                             const ConfigurationSet& configs,
                             const KlCoefficientCache& kl,
                             const DelayStateSpace& space) {
    const auto& perm = configs.config(config).perm;
    const auto& alt_perm = configs.config(alt_config).perm;
    double sum = 0.0;
    for (int s = 0; s < space.size(); ++s) {
        const DelayState& st = space.state(s);
        for (int a = 0; a < space.num_arms(); ++a) {
            double mass = measure.mass(s, a);
            if (mass == 0.0) continue;
            sum += mass * kl.coeff(perm[a], alt_perm[a], st.delay[a], st.last[a]);
        }
    }
    return sum;
}

double worst_case_separation(const OccupancyMeasure& measure,
                             int config,
                             const ConfigurationSet& configs,
                             const KlCoefficientCache& kl,
                             const DelayStateSpace& space) {
    double worst = std::numeric_limits<double>::infinity();
    for (int alt : configs.alt(config)) {
        worst = std::min(worst, kl_weighted_objective(measure, config, alt, configs, kl, space));
    }
    return worst;
}

SeparationSolution solve_separation_lp(int config,
                                       const DelayStateSpace& space,
                                       const DelayKernel& kernel,
                                       const KlCoefficientCache& kl,
                                       const ConfigurationSet& configs,
                                       std::ostream* lp_dump) {
    const int arms = space.num_arms();
    const int n_states = space.size();

    // One variable per legal (state, arm) pair plus the epigraph variable.
    std::vector<int> var_of(static_cast<std::size_t>(n_states) * arms, -1);
    std::vector<std::pair<int, int>> pair_of;
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < arms; ++a) {
            if (!kernel.legal(s, a)) continue;
            var_of[static_cast<std::size_t>(s) * arms + a] = static_cast<int>(pair_of.size());
            pair_of.emplace_back(s, a);
        }
    }
    const int n_pairs = static_cast<int>(pair_of.size());
    const int t_var = n_pairs;
    const auto& alts = configs.alt(config);

    // Rows: flow for every state but the first (one is redundant given
    // normalization), the normalization, and one epigraph row per alternative.
    const int m = (n_states - 1) + 1 + static_cast<int>(alts.size());
    LpProblem lp;
    lp.a = Eigen::MatrixXd::Zero(m, n_pairs + 1);
    lp.b = Eigen::VectorXd::Zero(m);
    lp.rel.assign(m, '=');
    lp.c = Eigen::VectorXd::Zero(n_pairs + 1);
    lp.c[t_var] = 1.0;

    auto flow_row = [](int state) { return state - 1; };  // state 0 dropped
    for (int v = 0; v < n_pairs; ++v) {
        auto [s, a] = pair_of[v];
        if (s > 0) lp.a(flow_row(s), v) += 1.0;
        for (const auto& e : kernel.row(s, a)) {
            if (e.successor > 0) lp.a(flow_row(e.successor), v) -= e.prob;
        }
    }
    const int norm_row = n_states - 1;
    lp.a.row(norm_row).head(n_pairs).setOnes();
    lp.b[norm_row] = 1.0;

    const auto& perm = configs.config(config).perm;
    for (int idx = 0; idx < static_cast<int>(alts.size()); ++idx) {
        const auto& alt_perm = configs.config(alts[idx]).perm;
        int row = norm_row + 1 + idx;
        for (int v = 0; v < n_pairs; ++v) {
            auto [s, a] = pair_of[v];
            const DelayState& st = space.state(s);
            lp.a(row, v) = kl.coeff(perm[a], alt_perm[a], st.delay[a], st.last[a]);
        }
        lp.a(row, t_var) = -1.0;
        lp.rel[row] = '>';
    }

    // Starting vertex: the occupancy of the deterministic policy "select the
    // arm after the most recently selected one (by index), unless an arm is
    // forced". Every state funnels into the one canonical round-robin cycle,
    // so the induced chain is unichain and the policy columns plus the
    // epigraph surpluses form a primal-feasible basis: the solver skips
    // phase one. (Selecting the most-delayed arm instead would preserve the
    // arms' cyclic order and split the chain into (K-1)! closed classes.)
    lp.basis_hint.assign(m, -1);
    for (int s = 0; s < n_states; ++s) {
        const DelayState& st = space.state(s);
        int forced = space.forced_arm_at(s);
        int arm;
        if (forced >= 0) {
            arm = forced;
        } else {
            int last_selected = 0;
            for (int a = 0; a < arms; ++a) {
                if (st.delay[a] == 1) last_selected = a;
            }
            arm = (last_selected + 1) % arms;
        }
        int row = s == 0 ? norm_row : flow_row(s);
        lp.basis_hint[row] = var_of[static_cast<std::size_t>(s) * arms + arm];
    }

    if (lp_dump) write_lp_listing(*lp_dump, lp);

    LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Infeasible) {
        raise(ErrorCode::Infeasible,
              "separation LP reported infeasible; the uniform occupancy is feasible, "
              "so this is a solver failure");
    }
    if (res.status != LpStatus::Optimal) {
        std::ostringstream oss;
        oss << "separation LP did not converge (" << lp_status_name(res.status) << " after "
            << res.iterations << " iterations)";
        raise(ErrorCode::NumericalBreakdown, oss.str());
    }

    SeparationSolution out;
    out.value = res.objective;
    out.lp_iterations = res.iterations;
    out.measure.mass = Eigen::MatrixXd::Zero(n_states, arms);
    for (int v = 0; v < n_pairs; ++v) {
        auto [s, a] = pair_of[v];
        out.measure.mass(s, a) = res.x[v];
    }
    out.residuals = check_occupancy(out.measure, kernel, space);
    return out;
}

OccupancyMeasure mixture_occupancy(const OccupancyMeasure& uniform,
                                   const OccupancyMeasure& optimal,
                                   double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        raise(ErrorCode::InvalidArgument, "mixture weight must lie in (0, 1]");
    }
    OccupancyMeasure out;
    out.mass = eta * uniform.mass + (1.0 - eta) * optimal.mass;
    return out;
}

SamplingRule sampling_rule(const OccupancyMeasure& mixture, const DelayStateSpace& space) {
    SamplingRule rule;
    rule.probs = Eigen::MatrixXd::Zero(space.size(), space.num_arms());
    Eigen::VectorXd marginal = mixture.marginal();
    for (int s = 0; s < space.size(); ++s) {
        int forced = space.forced_arm_at(s);
        if (forced >= 0) {
            rule.probs(s, forced) = 1.0;
            continue;
        }
        if (marginal[s] <= 0.0) {
            raise(ErrorCode::ZeroMarginal, "mixture puts no mass on a reachable state");
        }
        rule.probs.row(s) = mixture.mass.row(s) / marginal[s];
    }
    return rule;
}

OccupancyResiduals check_occupancy(const OccupancyMeasure& measure,
                                   const DelayKernel& kernel,
                                   const DelayStateSpace& space) {
    OccupancyResiduals r;
    r.normalization = std::abs(measure.total() - 1.0);
    r.negativity = std::max(0.0, -measure.mass.minCoeff());

    Eigen::VectorXd inflow = Eigen::VectorXd::Zero(space.size());
    for (int s = 0; s < space.size(); ++s) {
        for (int a = 0; a < space.num_arms(); ++a) {
            double mass = measure.mass(s, a);
            if (!kernel.legal(s, a)) {
                r.forced = std::max(r.forced, std::abs(mass));
                continue;
            }
            if (mass == 0.0) continue;
            for (const auto& e : kernel.row(s, a)) {
                inflow[e.successor] += mass * e.prob;
            }
        }
    }
    Eigen::VectorXd outflow = measure.marginal();
    r.flow = (outflow - inflow).lpNorm<Eigen::Infinity>();
    return r;
}

Eigen::MatrixXd bank_stationary_kl(const std::vector<TransitionMatrix>& bank) {
    const int k = static_cast<int>(bank.size());
    std::vector<Distribution> mus;
    mus.reserve(k);
    for (const auto& p : bank) mus.push_back(stationary_distribution(p));
    Eigen::MatrixXd kl = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i != j) kl(i, j) = kl_divergence(mus[i], mus[j]);
        }
    }
    return kl;
}

double solve_arm_weight_lp(int config,
                           const ConfigurationSet& configs,
                           const Eigen::MatrixXd& bank_kl) {
    const int arms = configs.num_arms();
    const auto& alts = configs.alt(config);
    const auto& perm = configs.config(config).perm;

    const int t_var = arms;
    LpProblem lp;
    lp.a = Eigen::MatrixXd::Zero(1 + static_cast<int>(alts.size()), arms + 1);
    lp.b = Eigen::VectorXd::Zero(lp.a.rows());
    lp.rel.assign(lp.a.rows(), '>');
    lp.c = Eigen::VectorXd::Zero(arms + 1);
    lp.c[t_var] = 1.0;

    lp.a.row(0).head(arms).setOnes();
    lp.b[0] = 1.0;
    lp.rel[0] = '=';
    for (int idx = 0; idx < static_cast<int>(alts.size()); ++idx) {
        const auto& alt_perm = configs.config(alts[idx]).perm;
        for (int a = 0; a < arms; ++a) {
            lp.a(1 + idx, a) = bank_kl(perm[a], alt_perm[a]);
        }
        lp.a(1 + idx, t_var) = -1.0;
    }

    LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) {
        raise(ErrorCode::NumericalBreakdown, "arm-weight LP did not converge");
    }
    return res.objective;
}

}  // namespace rbai
