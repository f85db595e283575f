#include <doctest.h>

#include <map>
#include <set>

#include "delay_mdp.hpp"
#include "oracles.hpp"

using namespace rbai;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

// Independent closure oracle: expands the reachable (delays, last states)
// graph with the update rule written out directly.
std::set<std::pair<std::vector<int>, std::vector<int>>> closure_oracle(int k, int r,
                                                                       int states) {
    using State = std::pair<std::vector<int>, std::vector<int>>;
    std::set<State> seen;
    std::vector<State> frontier;
    std::vector<int> obs(k, 0);
    while (true) {
        std::vector<int> d(k);
        for (int a = 0; a < k; ++a) d[a] = k - a;
        State s{d, obs};
        if (seen.insert(s).second) frontier.push_back(s);
        int pos = k - 1;
        while (pos >= 0 && ++obs[pos] == states) obs[pos--] = 0;
        if (pos < 0) break;
    }
    while (!frontier.empty()) {
        State s = frontier.back();
        frontier.pop_back();
        int forced = -1;
        for (int a = 0; a < k; ++a) {
            if (s.first[a] == r) forced = a;
        }
        for (int a = 0; a < k; ++a) {
            if (forced >= 0 && a != forced) continue;
            for (int j = 0; j < states; ++j) {
                State next = s;
                for (int b = 0; b < k; ++b) next.first[b] = s.first[b] + 1;
                next.first[a] = 1;
                next.second[a] = j;
                if (seen.insert(next).second) frontier.push_back(next);
            }
        }
    }
    return seen;
}

}  // namespace

TEST_SUITE_BEGIN("delay_mdp");

TEST_CASE("initial delay state after the round-robin") {
    DelayState s2 = initial_delay_state({0, 1});
    CHECK(s2.delay == std::vector<int>{2, 1});
    CHECK(s2.last == std::vector<int>{0, 1});

    DelayState s3 = initial_delay_state({1, 0, 1});
    CHECK(s3.delay == std::vector<int>{3, 2, 1});
    // the arm selected last (arm K-1) is the one at delay 1
    CHECK(s3.delay.back() == 1);
}

TEST_CASE("selection update rule") {
    DelayState s{{2, 1}, {0, 1}};
    DelayState next = apply_selection(s, 0, 1, 3);
    CHECK(next.delay == std::vector<int>{1, 2});
    CHECK(next.last == std::vector<int>{1, 1});

    // reselecting the delay-1 arm keeps it at 1 and increments the other
    DelayState again = apply_selection(next, 0, 0, 3);
    CHECK(again.delay == std::vector<int>{1, 3});
    CHECK(again.last == std::vector<int>{0, 1});

    // with arm 1 at the bound, selecting arm 0 is illegal
    CHECK_THROWS_WITH_AS(apply_selection(again, 0, 0, 3), doctest::Contains("IllegalAction"),
                         Error);
    // the forced selection itself is fine
    CHECK_NOTHROW(apply_selection(again, 1, 0, 3));
}

TEST_CASE("allowed actions and forced arms") {
    DelayState free_state{{2, 1, 3}, {0, 0, 0}};
    CHECK_FALSE(forced_arm(free_state, 4).has_value());
    for (int a = 0; a < 3; ++a) CHECK(action_allowed(free_state, a, 4));

    DelayState forced_state{{2, 1, 4}, {0, 0, 0}};
    REQUIRE(forced_arm(forced_state, 4).has_value());
    CHECK(*forced_arm(forced_state, 4) == 2);
    CHECK(action_allowed(forced_state, 2, 4));
    CHECK_FALSE(action_allowed(forced_state, 0, 4));
}

TEST_CASE("state space enumeration matches the hand oracle") {
    DelayStateSpace space(2, 3, 2);
    CHECK(space.size() == 16);

    auto expect = closure_oracle(2, 3, 2);
    CHECK(expect.size() == 16);
    for (const auto& [d, i] : expect) {
        CHECK_NOTHROW(space.index_of(DelayState{d, i}));
    }

    // delay vectors are exactly {(2,1),(1,2),(3,1),(1,3)}
    std::set<std::vector<int>> delays;
    for (int s = 0; s < space.size(); ++s) delays.insert(space.state(s).delay);
    CHECK(delays == std::set<std::vector<int>>{{2, 1}, {1, 2}, {3, 1}, {1, 3}});
}

TEST_CASE("two-arm delay vector count grows as 2(R-1)") {
    for (int r = 3; r <= 6; ++r) {
        DelayStateSpace space(2, r, 2);
        std::set<std::vector<int>> delays;
        for (int s = 0; s < space.size(); ++s) delays.insert(space.state(s).delay);
        CHECK(static_cast<int>(delays.size()) == 2 * (r - 1));
        CHECK(space.size() == 2 * (r - 1) * 4);

        auto expect = closure_oracle(2, r, 2);
        CHECK(static_cast<int>(expect.size()) == space.size());
    }
}

TEST_CASE("three-arm space agrees with the closure oracle") {
    DelayStateSpace space(3, 5, 2);
    auto expect = closure_oracle(3, 5, 2);
    CHECK(space.size() == static_cast<int>(expect.size()));
    for (const auto& [d, i] : expect) {
        CHECK_NOTHROW(space.index_of(DelayState{d, i}));
    }
}

TEST_CASE("every enumerated state has exactly one delay equal to 1") {
    DelayStateSpace space(3, 6, 2);
    for (int s = 0; s < space.size(); ++s) {
        const DelayState& st = space.state(s);
        int ones = 0;
        std::set<int> distinct;
        for (int a = 0; a < 3; ++a) {
            if (st.delay[a] == 1) ++ones;
            distinct.insert(st.delay[a]);
            CHECK(st.delay[a] <= 6);
        }
        CHECK(ones == 1);
        CHECK(distinct.size() == 3);  // delays pairwise distinct
    }
}

TEST_CASE("closure: all legal successors stay inside the space") {
    DelayStateSpace space(2, 4, 2);
    for (int s = 0; s < space.size(); ++s) {
        for (int a = 0; a < 2; ++a) {
            bool legal = action_allowed(space.state(s), a, 4);
            for (int j = 0; j < 2; ++j) {
                if (legal) {
                    CHECK(space.successor(s, a, j) >= 0);
                } else {
                    CHECK(space.successor(s, a, j) == -1);
                }
            }
        }
    }
}

TEST_CASE("successor delays do not depend on the observation") {
    DelayStateSpace space(2, 4, 2);
    for (int s = 0; s < space.size(); ++s) {
        for (int a = 0; a < 2; ++a) {
            if (!action_allowed(space.state(s), a, 4)) continue;
            const auto& d0 = space.state(space.successor(s, a, 0)).delay;
            const auto& d1 = space.state(space.successor(s, a, 1)).delay;
            CHECK(d0 == d1);
        }
    }
}

TEST_CASE("forced subsets are disjoint and correctly labeled") {
    DelayStateSpace space(3, 4, 2);
    std::set<int> all_forced;
    for (int a = 0; a < 3; ++a) {
        for (int s : space.forced_states_of(a)) {
            CHECK(space.state(s).delay[a] == 4);
            CHECK(space.forced_arm_at(s) == a);
            CHECK(all_forced.insert(s).second);  // disjoint across arms
        }
    }
    for (int s = 0; s < space.size(); ++s) {
        if (!all_forced.count(s)) CHECK(space.forced_arm_at(s) == -1);
    }
}

TEST_CASE("kernel rows are stochastic with one successor per observation") {
    std::vector<TransitionMatrix> bank;
    bank.push_back(TransitionMatrix::validated(mat2(0.3, 0.7, 0.6, 0.4)));
    bank.push_back(TransitionMatrix::validated(mat2(0.7, 0.3, 0.6, 0.4)));
    KernelPowerCache cache(bank, 4);
    DelayStateSpace space(2, 4, 2);
    DelayKernel kernel(ArmAssignment{{0, 1}}, space, cache);

    for (int s = 0; s < space.size(); ++s) {
        for (int a = 0; a < 2; ++a) {
            if (!action_allowed(space.state(s), a, 4)) {
                CHECK_FALSE(kernel.legal(s, a));
                continue;
            }
            const auto& row = kernel.row(s, a);
            REQUIRE(row.size() == 2);  // one successor per observed state
            double sum = 0.0;
            for (const auto& e : row) sum += e.prob;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("forced rows use the R-step kernel") {
    std::vector<TransitionMatrix> bank;
    bank.push_back(TransitionMatrix::validated(mat2(0.3, 0.7, 0.6, 0.4)));
    bank.push_back(TransitionMatrix::validated(mat2(0.7, 0.3, 0.6, 0.4)));
    const int r = 4;
    KernelPowerCache cache(bank, r);
    DelayStateSpace space(2, r, 2);
    DelayKernel kernel(ArmAssignment{{0, 1}}, space, cache);

    Eigen::MatrixXd p0_r = matrix_power(bank[0], r).matrix();
    for (int s : space.forced_states_of(0)) {
        const DelayState& st = space.state(s);
        const auto& row = kernel.row(s, 0);
        for (int j = 0; j < 2; ++j) {
            CHECK(row[j].prob == doctest::Approx(p0_r(st.last[0], j)).epsilon(1e-14));
        }
    }
    // a non-forced reselection of a delay-1 arm uses the 1-step kernel
    int idx = space.index_of(DelayState{{1, 2}, {0, 1}});
    CHECK(kernel.row(idx, 0)[1].prob == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("uniform-with-forcing policy induces an ergodic chain") {
    std::vector<TransitionMatrix> bank;
    bank.push_back(TransitionMatrix::validated(mat2(0.3, 0.7, 0.6, 0.4)));
    bank.push_back(TransitionMatrix::validated(mat2(0.7, 0.3, 0.6, 0.4)));
    for (int r : {3, 4}) {
        KernelPowerCache cache(bank, r);
        DelayStateSpace space(2, r, 2);
        for (const auto& assignment : enumerate_configurations(2)) {
            DelayKernel kernel(assignment, space, cache);
            Eigen::MatrixXd policy = Eigen::MatrixXd::Constant(space.size(), 2, 0.5);
            Eigen::MatrixXd chain = kernel.induced_chain(policy, space);
            for (int s = 0; s < space.size(); ++s) {
                CHECK(chain.row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
            }
            CHECK(is_ergodic(TransitionMatrix::stochastic_only(chain)));
            CHECK(oracle::ergodic(chain));
        }
    }
}

TEST_SUITE_END();
