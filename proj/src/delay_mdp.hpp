#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "instance.hpp"

namespace rbai {

// Packing limits for the delay-state key; enforced at enumeration time.
inline constexpr int kMaxDelayBound = 60;
inline constexpr int kMaxPackedStates = 16;

/// Joint record of every arm's delay (time since last selection, resets to 1)
/// and last observed state. Exactly one delay equals 1 and all delays are
/// distinct; both follow from the round-robin start and are asserted here.
struct DelayState {
    std::vector<int> delay;
    std::vector<int> last;

    int arms() const { return static_cast<int>(delay.size()); }
    bool operator==(const DelayState& other) const {
        return delay == other.delay && last == other.last;
    }
};

// State right after the opening round-robin: arm a (0-based) was selected at
// time a, so its delay is K - a and its last observed state is first_obs[a].
DelayState initial_delay_state(const std::vector<int>& first_obs);

// Arm forced by the max-delay bound in this state, if any. Delays are
// distinct, so at most one arm can sit at the bound.
std::optional<int> forced_arm(const DelayState& s, int max_delay);

// True iff arm may be selected in s under the max-delay bound.
bool action_allowed(const DelayState& s, int arm, int max_delay);

// Delay/last-state update rule: the selected arm's delay resets to 1 and its
// last state becomes the fresh observation; every other delay increments.
// Throws IllegalAction when another arm sits at the bound, and DelayOverflow
// if the update would push any delay past it (impossible for legal actions).
DelayState apply_selection(const DelayState& s, int arm, int observed, int max_delay);

/// Reachable delay states under the max-delay bound, enumerated breadth-first
/// from every possible round-robin outcome. Indices are assigned in discovery
/// order and are frozen thereafter; LP columns and count tables rely on them.
class DelayStateSpace {
  public:
    DelayStateSpace(int num_arms, int max_delay, int state_count);

    int size() const { return static_cast<int>(states_.size()); }
    int num_arms() const { return num_arms_; }
    int max_delay() const { return max_delay_; }
    int state_count() const { return state_count_; }

    const DelayState& state(int index) const { return states_[index]; }
    int index_of(const DelayState& s) const;

    // -1 when no arm is forced in the state with this index.
    int forced_arm_at(int index) const { return forced_[index]; }

    // Indices of the states where the given arm sits at the max delay.
    const std::vector<int>& forced_states_of(int arm) const { return forced_sets_[arm]; }

    // Successor index after selecting `arm` in `index` and observing `obs`.
    int successor(int index, int arm, int obs) const {
        return successors_[(static_cast<std::size_t>(index) * num_arms_ + arm) * state_count_ +
                           obs];
    }

  private:
    std::uint64_t pack(const DelayState& s) const;

    int num_arms_;
    int max_delay_;
    int state_count_;
    std::vector<DelayState> states_;
    std::vector<int> forced_;
    std::vector<std::vector<int>> forced_sets_;
    std::vector<int> successors_;  // (index, arm, obs) -> index, -1 if illegal
    std::unordered_map<std::uint64_t, int> index_;
};

// A deterministic arm per state whose induced chain has a single recurrent
// class: the canonical round-robin cycle (delays K..1 in arm order). Every
// other delay vector is steered into that cycle's basin, action chosen
// greedily over the deterministic delay dynamics. Selecting by a fixed local
// rule instead (most-delayed arm, next arm by index, ...) can leave extra
// closed cycles at tight delay bounds, which makes the induced chain
// multichain; this construction cannot.
std::vector<int> single_cycle_policy(const DelayStateSpace& space);

/// Transition kernel of the delay-state MDP under one assignment: for each
/// (state, legal arm), the successor distribution obtained by drawing the
/// selected arm's new state from its delay-step kernel. Rows for (forced
/// state, other arm) are absent.
class DelayKernel {
  public:
    struct Entry {
        int successor;
        double prob;
    };

    DelayKernel(const ArmAssignment& assignment,
                const DelayStateSpace& space,
                const KernelPowerCache& cache);

    // Empty span for illegal (state, arm) pairs.
    const std::vector<Entry>& row(int state_index, int arm) const {
        return rows_[static_cast<std::size_t>(state_index) * num_arms_ + arm];
    }

    bool legal(int state_index, int arm) const { return !row(state_index, arm).empty(); }

    // Dense one-step kernel of the chain induced by a stationary arm-selection
    // rule (rows of `policy` indexed by state, columns by arm; forced states
    // may carry any row, the forced arm is used regardless).
    Eigen::MatrixXd induced_chain(const Eigen::MatrixXd& policy,
                                  const DelayStateSpace& space) const;

  private:
    int num_arms_;
    std::vector<std::vector<Entry>> rows_;
};

}  // namespace rbai
