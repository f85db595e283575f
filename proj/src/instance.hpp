#pragma once

#include <Eigen/Dense>
#include <vector>

#include "markov.hpp"

namespace rbai {

/// One assignment of the kernel bank to the arm positions: perm[arm] is the
/// bank index of the kernel driving that arm.
struct ArmAssignment {
    std::vector<int> perm;

    int arms() const { return static_cast<int>(perm.size()); }
    bool operator==(const ArmAssignment& other) const { return perm == other.perm; }
};

// All K! assignments in lexicographic order of perm. This order defines the
// configuration indices used by the likelihood ledger and the tie-break
// streams, so it must never change.
std::vector<ArmAssignment> enumerate_configurations(int num_arms);

/// Problem instance: the kernel bank (bank[0] is the best-arm kernel), the
/// state reward, the true assignment, and the initial state distribution.
class ProblemInstance {
  public:
    // Validates: at least two arms, all kernels ergodic and of equal size,
    // pairwise mutual absolute continuity, non-constant reward, strictly
    // positive initial distribution, bank[0] the strict best by ergodic mean,
    // and a bijective truth assignment.
    static ProblemInstance validated(std::vector<TransitionMatrix> bank,
                                     Eigen::VectorXd reward,
                                     ArmAssignment truth,
                                     Distribution initial_dist);

    int num_arms() const { return static_cast<int>(bank_.size()); }
    int state_count() const { return bank_.front().size(); }
    const std::vector<TransitionMatrix>& bank() const { return bank_; }
    const TransitionMatrix& bank_kernel(int k) const { return bank_[k]; }
    const Eigen::VectorXd& reward() const { return reward_; }
    const ArmAssignment& truth() const { return truth_; }
    const Distribution& initial_dist() const { return initial_dist_; }

    // Ergodic mean of each bank kernel, index-aligned with the bank.
    const std::vector<double>& bank_means() const { return bank_means_; }

    // Kernel driving the given arm under the true assignment.
    const TransitionMatrix& true_kernel(int arm) const { return bank_[truth_.perm[arm]]; }

  private:
    ProblemInstance() = default;
    std::vector<TransitionMatrix> bank_;
    Eigen::VectorXd reward_;
    ArmAssignment truth_;
    Distribution initial_dist_ = Distribution::unchecked(Eigen::VectorXd());
    std::vector<double> bank_means_;
};

// Long-run average of f under the stationary distribution of p.
double ergodic_mean(const TransitionMatrix& p, const Eigen::VectorXd& reward);

// Position of the best arm under the given assignment. With bank[0] the
// best-arm kernel this is the arm holding bank index 0; the gap to the
// runner-up must exceed 1e-10 or the instance is rejected (TiedBestArm).
int best_arm(const ArmAssignment& assignment, const std::vector<double>& bank_means);

/// The configuration set for an instance: all assignments, their best arms,
/// the per-arm classes, and the alternative sets.
class ConfigurationSet {
  public:
    explicit ConfigurationSet(const ProblemInstance& instance);

    // From explicit bank means, without an instance; truth_index() is -1.
    ConfigurationSet(int num_arms, const std::vector<double>& bank_means);

    int size() const { return static_cast<int>(configs_.size()); }
    int num_arms() const { return num_arms_; }
    const ArmAssignment& config(int index) const { return configs_[index]; }
    const std::vector<ArmAssignment>& configs() const { return configs_; }

    int best_arm_of(int index) const { return best_arm_[index]; }

    // Configuration indices whose best-arm position differs from config(index).
    const std::vector<int>& alt(int index) const { return alt_[index]; }

    // Indices of the configurations whose best arm is `arm` (the class C_a).
    const std::vector<int>& class_of_arm(int arm) const { return classes_[arm]; }

    // Index of the instance's true assignment.
    int truth_index() const { return truth_index_; }

    int index_of(const ArmAssignment& assignment) const;

  private:
    std::vector<ArmAssignment> configs_;
    std::vector<int> best_arm_;
    std::vector<std::vector<int>> alt_;
    std::vector<std::vector<int>> classes_;
    int num_arms_ = 0;
    int truth_index_ = -1;
};

}  // namespace rbai
