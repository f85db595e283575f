#include "instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rbai {

namespace {
constexpr double kBestArmGapTol = 1e-10;
}

std::vector<ArmAssignment> enumerate_configurations(int num_arms) {
    if (num_arms < 2) raise(ErrorCode::InvalidArgument, "need at least 2 arms");
    std::vector<int> perm(num_arms);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<ArmAssignment> out;
    do {
        out.push_back(ArmAssignment{perm});
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

double ergodic_mean(const TransitionMatrix& p, const Eigen::VectorXd& reward) {
    return stationary_distribution(p).probs().dot(reward);
}

int best_arm(const ArmAssignment& assignment, const std::vector<double>& bank_means) {
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    double second_val = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < assignment.arms(); ++a) {
        double v = bank_means.at(assignment.perm[a]);
        if (v > best_val) {
            second_val = best_val;
            best_val = v;
            best = a;
        } else if (v > second_val) {
            second_val = v;
        }
    }
    if (best_val - second_val < kBestArmGapTol) {
        raise(ErrorCode::TiedBestArm, "ergodic-mean gap below 1e-10");
    }
    return best;
}

ProblemInstance ProblemInstance::validated(std::vector<TransitionMatrix> bank,
                                           Eigen::VectorXd reward,
                                           ArmAssignment truth,
                                           Distribution initial_dist) {
    const int k = static_cast<int>(bank.size());
    if (k < 2) raise(ErrorCode::ValidationError, "need at least 2 arms");
    const int n = bank.front().size();
    for (const auto& p : bank) {
        if (p.size() != n) raise(ErrorCode::ValidationError, "bank kernels differ in size");
    }
    if (reward.size() != n) raise(ErrorCode::ValidationError, "reward length != state count");
    if (!reward.allFinite()) raise(ErrorCode::ValidationError, "reward has non-finite values");
    if ((reward.array() == reward[0]).all()) {
        raise(ErrorCode::ValidationError, "reward is constant; every arm ties");
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            if (!mutually_abs_continuous(bank[i], bank[j])) {
                std::ostringstream oss;
                oss << "bank kernels " << i << " and " << j
                    << " are not mutually absolutely continuous";
                raise(ErrorCode::ValidationError, oss.str());
            }
        }
    }
    if (truth.arms() != k) raise(ErrorCode::ValidationError, "assignment length != arm count");
    std::vector<bool> seen(k, false);
    for (int v : truth.perm) {
        if (v < 0 || v >= k || seen[v]) {
            raise(ErrorCode::ValidationError, "assignment is not a bijection");
        }
        seen[v] = true;
    }
    if (initial_dist.size() != n) {
        raise(ErrorCode::ValidationError, "initial distribution length != state count");
    }
    for (int i = 0; i < n; ++i) {
        if (initial_dist[i] <= 0.0) {
            raise(ErrorCode::ValidationError, "initial distribution must be strictly positive");
        }
    }

    ProblemInstance inst;
    inst.bank_ = std::move(bank);
    inst.reward_ = std::move(reward);
    inst.truth_ = std::move(truth);
    inst.initial_dist_ = std::move(initial_dist);
    inst.bank_means_.reserve(k);
    for (const auto& p : inst.bank_) {
        inst.bank_means_.push_back(ergodic_mean(p, inst.reward_));
    }
    // bank[0] is the best-arm kernel by convention; uniqueness of the best arm
    // under every assignment reduces to a strict gap between bank mean 0 and
    // the rest.
    for (int i = 1; i < k; ++i) {
        if (inst.bank_means_[0] - inst.bank_means_[i] < kBestArmGapTol) {
            raise(ErrorCode::TiedBestArm,
                  "bank kernel 0 must have the strictly largest ergodic mean");
        }
    }
    return inst;
}

ConfigurationSet::ConfigurationSet(int num_arms, const std::vector<double>& bank_means)
    : num_arms_(num_arms) {
    configs_ = enumerate_configurations(num_arms_);
    best_arm_.reserve(configs_.size());
    classes_.assign(num_arms_, {});
    for (int c = 0; c < static_cast<int>(configs_.size()); ++c) {
        int a = best_arm(configs_[c], bank_means);
        best_arm_.push_back(a);
        classes_[a].push_back(c);
    }
    alt_.resize(configs_.size());
    for (int c = 0; c < static_cast<int>(configs_.size()); ++c) {
        for (int c2 = 0; c2 < static_cast<int>(configs_.size()); ++c2) {
            if (best_arm_[c2] != best_arm_[c]) alt_[c].push_back(c2);
        }
    }
}

ConfigurationSet::ConfigurationSet(const ProblemInstance& instance)
    : ConfigurationSet(instance.num_arms(), instance.bank_means()) {
    for (int c = 0; c < static_cast<int>(configs_.size()); ++c) {
        if (configs_[c] == instance.truth()) truth_index_ = c;
    }
}

int ConfigurationSet::index_of(const ArmAssignment& assignment) const {
    for (int c = 0; c < size(); ++c) {
        if (configs_[c] == assignment) return c;
    }
    raise(ErrorCode::InvalidArgument, "assignment not in configuration set");
}

}  // namespace rbai
