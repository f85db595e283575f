#include "delay_mdp.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace rbai {

namespace {

void check_delay_invariants(const DelayState& s, int max_delay) {
    int ones = 0;
    for (int a = 0; a < s.arms(); ++a) {
        int d = s.delay[a];
        if (d == 1) ++ones;
        if (d < 1) raise(ErrorCode::ValidationError, "delay below 1");
        if (d > max_delay) raise(ErrorCode::DelayOverflow, "delay exceeds the bound");
        for (int b = a + 1; b < s.arms(); ++b) {
            if (s.delay[b] == d) {
                raise(ErrorCode::ValidationError, "delays must be pairwise distinct");
            }
        }
    }
    if (ones != 1) raise(ErrorCode::ValidationError, "exactly one delay must equal 1");
}

}  // namespace

DelayState initial_delay_state(const std::vector<int>& first_obs) {
    const int k = static_cast<int>(first_obs.size());
    if (k < 2) raise(ErrorCode::InvalidArgument, "need at least 2 arms");
    DelayState s;
    s.delay.resize(k);
    s.last = first_obs;
    for (int a = 0; a < k; ++a) s.delay[a] = k - a;
    return s;
}

std::optional<int> forced_arm(const DelayState& s, int max_delay) {
    for (int a = 0; a < s.arms(); ++a) {
        if (s.delay[a] == max_delay) return a;
    }
    return std::nullopt;
}

bool action_allowed(const DelayState& s, int arm, int max_delay) {
    auto forced = forced_arm(s, max_delay);
    return !forced || *forced == arm;
}

DelayState apply_selection(const DelayState& s, int arm, int observed, int max_delay) {
    if (arm < 0 || arm >= s.arms()) raise(ErrorCode::InvalidArgument, "arm out of range");
    if (!action_allowed(s, arm, max_delay)) {
        std::ostringstream oss;
        oss << "arm " << arm << " selected while arm " << *forced_arm(s, max_delay)
            << " is at the max delay";
        raise(ErrorCode::IllegalAction, oss.str());
    }
    DelayState next = s;
    next.delay[arm] = 1;
    next.last[arm] = observed;
    for (int b = 0; b < s.arms(); ++b) {
        if (b == arm) continue;
        next.delay[b] = s.delay[b] + 1;
        if (next.delay[b] > max_delay) {
            raise(ErrorCode::DelayOverflow, "legal action pushed a delay past the bound");
        }
    }
    return next;
}

DelayStateSpace::DelayStateSpace(int num_arms, int max_delay, int state_count)
    : num_arms_(num_arms), max_delay_(max_delay), state_count_(state_count) {
    if (num_arms < 2) raise(ErrorCode::InvalidArgument, "need at least 2 arms");
    if (state_count < 2) raise(ErrorCode::InvalidArgument, "need at least 2 chain states");
    if (max_delay <= num_arms) {
        raise(ErrorCode::ValidationError, "max delay must exceed the number of arms");
    }
    if (max_delay > kMaxDelayBound || state_count > kMaxPackedStates) {
        raise(ErrorCode::ValidationError, "state space exceeds supported packing bounds");
    }

    // Seed the BFS with every round-robin outcome: delays (K, ..., 1) crossed
    // with all last-state vectors.
    std::queue<int> pending;
    auto intern = [&](const DelayState& s) {
        auto key = pack(s);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(states_.size());
        index_.emplace(key, id);
        states_.push_back(s);
        pending.push(id);
        return id;
    };

    std::vector<int> obs(num_arms, 0);
    while (true) {
        DelayState s = initial_delay_state(obs);
        intern(s);
        int pos = num_arms - 1;
        while (pos >= 0 && ++obs[pos] == state_count) obs[pos--] = 0;
        if (pos < 0) break;
    }

    while (!pending.empty()) {
        int id = pending.front();
        pending.pop();
        DelayState s = states_[id];  // copy: states_ may reallocate below
        check_delay_invariants(s, max_delay);
        for (int arm = 0; arm < num_arms; ++arm) {
            if (!action_allowed(s, arm, max_delay)) continue;
            for (int j = 0; j < state_count; ++j) {
                intern(apply_selection(s, arm, j, max_delay));
            }
        }
    }

    forced_.reserve(states_.size());
    forced_sets_.assign(num_arms, {});
    for (int id = 0; id < static_cast<int>(states_.size()); ++id) {
        auto f = forced_arm(states_[id], max_delay);
        forced_.push_back(f ? *f : -1);
        if (f) forced_sets_[*f].push_back(id);
    }

    successors_.assign(static_cast<std::size_t>(states_.size()) * num_arms * state_count, -1);
    for (int id = 0; id < static_cast<int>(states_.size()); ++id) {
        for (int arm = 0; arm < num_arms; ++arm) {
            if (!action_allowed(states_[id], arm, max_delay)) continue;
            for (int j = 0; j < state_count; ++j) {
                DelayState next = apply_selection(states_[id], arm, j, max_delay);
                auto it = index_.find(pack(next));
                if (it == index_.end()) {
                    raise(ErrorCode::ValidationError, "BFS closure violated");
                }
                successors_[(static_cast<std::size_t>(id) * num_arms + arm) * state_count + j] =
                    it->second;
            }
        }
    }
}

std::uint64_t DelayStateSpace::pack(const DelayState& s) const {
    // 6 bits of delay plus 4 bits of last state per arm.
    std::uint64_t key = 0;
    for (int a = 0; a < s.arms(); ++a) {
        key = (key << 10) | (static_cast<std::uint64_t>(s.delay[a] - 1) << 4) |
              static_cast<std::uint64_t>(s.last[a]);
    }
    return key;
}

int DelayStateSpace::index_of(const DelayState& s) const {
    auto it = index_.find(pack(s));
    if (it == index_.end()) {
        raise(ErrorCode::InvalidArgument, "delay state not in the enumerated space");
    }
    return it->second;
}

DelayKernel::DelayKernel(const ArmAssignment& assignment,
                         const DelayStateSpace& space,
                         const KernelPowerCache& cache)
    : num_arms_(space.num_arms()) {
    rows_.resize(static_cast<std::size_t>(space.size()) * num_arms_);
    for (int id = 0; id < space.size(); ++id) {
        const DelayState& s = space.state(id);
        for (int arm = 0; arm < num_arms_; ++arm) {
            if (!action_allowed(s, arm, space.max_delay())) continue;
            const Eigen::MatrixXd& step = cache.power(assignment.perm[arm], s.delay[arm]);
            auto& row = rows_[static_cast<std::size_t>(id) * num_arms_ + arm];
            row.reserve(space.state_count());
            for (int j = 0; j < space.state_count(); ++j) {
                row.push_back({space.successor(id, arm, j), step(s.last[arm], j)});
            }
        }
    }
}

Eigen::MatrixXd DelayKernel::induced_chain(const Eigen::MatrixXd& policy,
                                           const DelayStateSpace& space) const {
    const int n = space.size();
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
    for (int id = 0; id < n; ++id) {
        int forced = space.forced_arm_at(id);
        for (int arm = 0; arm < num_arms_; ++arm) {
            double w = forced >= 0 ? (arm == forced ? 1.0 : 0.0) : policy(id, arm);
            if (w == 0.0) continue;
            for (const Entry& e : row(id, arm)) {
                chain(id, e.successor) += w * e.prob;
            }
        }
    }
    return chain;
}

}  // namespace rbai
