#pragma once

#include <iosfwd>

#include "delay_mdp.hpp"
#include "simplex.hpp"

namespace rbai {

/// Mass over (delay state, arm). Dense; entries at (forced state, other arm)
/// are structurally zero for every measure produced by this module.
struct OccupancyMeasure {
    Eigen::MatrixXd mass;  // space.size() x num_arms

    double total() const { return mass.sum(); }
    Eigen::VectorXd marginal() const { return mass.rowwise().sum(); }
};

struct OccupancyResiduals {
    double flow = 0.0;           // worst global-balance violation
    double normalization = 0.0;  // |total mass - 1|
    double negativity = 0.0;     // magnitude of the most negative entry
    double forced = 0.0;         // worst mass on a disallowed (state, arm)

    double worst() const;
};

/// Per-state arm-selection probabilities; rows at forced states are point
/// masses on the forced arm.
struct SamplingRule {
    Eigen::MatrixXd probs;  // space.size() x num_arms
};

/// KL divergences between matching d-step kernel rows of every ordered bank
/// pair, the coefficients of the separation objective. The coefficient of a
/// configuration pair at (state, arm) depends only on (bank pair, delay,
/// last state), which keeps this cache small.
class KlCoefficientCache {
  public:
    explicit KlCoefficientCache(const KernelPowerCache& powers);

    // KL( P_k^d(.|i) || P_l^d(.|i) )
    double coeff(int bank_k, int bank_l, int d, int i) const {
        return table_[((static_cast<std::size_t>(bank_k) * bank_ + bank_l) * max_power_ + d - 1) *
                          states_ +
                      i];
    }

  private:
    std::vector<double> table_;
    int bank_;
    int max_power_;
    int states_;
};

// Stationary distribution (strictly positive) of the delay-state chain
// induced by selecting uniformly at non-forced states.
Eigen::VectorXd uniform_policy_stationary(const DelayKernel& kernel,
                                          const DelayStateSpace& space);

// Ergodic occupancy of the uniform-with-forcing policy: mu/K at non-forced
// states, the full mass on the forced arm otherwise.
OccupancyMeasure uniform_occupancy(const Eigen::VectorXd& stationary,
                                   const DelayStateSpace& space);

// Separation objective of `measure` between `config` and one alternative:
// the KL-weighted sum over (state, arm).
double kl_weighted_objective(const OccupancyMeasure& measure,
                             int config,
                             int alt_config,
                             const ConfigurationSet& configs,
                             const KlCoefficientCache& kl,
                             const DelayStateSpace& space);

// min over Alt(config) of kl_weighted_objective; the value a policy with this
// occupancy separates the worst alternative at.
double worst_case_separation(const OccupancyMeasure& measure,
                             int config,
                             const ConfigurationSet& configs,
                             const KlCoefficientCache& kl,
                             const DelayStateSpace& space);

struct SeparationSolution {
    double value = 0.0;
    OccupancyMeasure measure;
    long lp_iterations = 0;
    OccupancyResiduals residuals;
};

// The finite occupancy LP: maximize the worst-case KL separation over all
// measures satisfying flow, normalization, nonnegativity, and forced
// selection. Solved as an epigraph LP by the deterministic simplex. Throws
// Infeasible / NumericalBreakdown on solver failure (the uniform occupancy
// is always feasible, so neither should occur).
SeparationSolution solve_separation_lp(int config,
                                       const DelayStateSpace& space,
                                       const DelayKernel& kernel,
                                       const KlCoefficientCache& kl,
                                       const ConfigurationSet& configs,
                                       std::ostream* lp_dump = nullptr);

// Convex mixture eta * uniform + (1 - eta) * optimal. The resulting marginal
// is strictly positive for eta > 0, which the sampling rule relies on.
OccupancyMeasure mixture_occupancy(const OccupancyMeasure& uniform,
                                   const OccupancyMeasure& optimal,
                                   double eta);

// Conditional arm distribution per state: mixture mass over its marginal.
// Throws ZeroMarginal when some state carries no mass.
SamplingRule sampling_rule(const OccupancyMeasure& mixture, const DelayStateSpace& space);

// Flow / normalization / negativity / forced-selection residuals of an
// arbitrary measure against the kernel.
OccupancyResiduals check_occupancy(const OccupancyMeasure& measure,
                                   const DelayKernel& kernel,
                                   const DelayStateSpace& space);

// The K-variable reference LP over arm-weight vectors: maximize the worst-case
// sum_a kappa(a) * bank_kl(perm_C(a), perm_C'(a)). For banks whose kernels
// have identical rows this equals the full LP value for every max delay.
double solve_arm_weight_lp(int config,
                           const ConfigurationSet& configs,
                           const Eigen::MatrixXd& bank_stationary_kl);

// KL(mu_k || mu_l) for all ordered bank pairs (the coefficients of the
// arm-weight LP).
Eigen::MatrixXd bank_stationary_kl(const std::vector<TransitionMatrix>& bank);

}  // namespace rbai
