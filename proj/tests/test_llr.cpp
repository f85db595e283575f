#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "llr.hpp"

using namespace rbai;

namespace {

struct LedgerSetup {
    ProblemInstance instance;
    KernelPowerCache powers;
    DelayStateSpace space;
    ConfigurationSet configs;
    ObservationLogLik loglik;

    LedgerSetup(ProblemInstance inst, int max_delay)
        : instance(std::move(inst)),
          powers(instance.bank(), max_delay),
          space(instance.num_arms(), max_delay, instance.state_count()),
          configs(instance),
          loglik(powers) {}

    LlrLedger make_ledger(const std::vector<int>& first_obs) const {
        return LlrLedger(first_obs, instance.initial_dist(), configs, loglik, space);
    }
};

// Random legal walk through the delay MDP; observations drawn uniformly
// (legitimate for algebraic identities since all kernels are positive).
int random_walk(LlrLedger& ledger, const DelayStateSpace& space, int start_index, long steps,
                Rng& rng) {
    int index = start_index;
    for (long t = 0; t < steps; ++t) {
        int forced = space.forced_arm_at(index);
        int arm = forced >= 0 ? forced : rng.uniform_index(space.num_arms());
        int obs = rng.uniform_index(space.state_count());
        ledger.record(index, arm, obs);
        index = space.successor(index, arm, obs);
    }
    return index;
}

}  // namespace

TEST_SUITE_BEGIN("llr");

TEST_CASE("initial terms: arm 0 contributes identically to every configuration") {
    LedgerSetup s(fixtures::two_arm(), 4);
    for (int j0 : {0, 1}) {
        for (int j1 : {0, 1}) {
            LlrLedger ledger = s.make_ledger({j0, j1});
            // the difference of initial terms is independent of phi(j0)
            double diff = ledger.initial_term(0) - ledger.initial_term(1);
            // recompute excluding arm 0: one-step evolution of phi under each bank
            const auto& phi = s.instance.initial_dist().probs();
            double p_under_0 = (phi.transpose() * s.powers.power(s.configs.config(0).perm[1], 1))(j1);
            double p_under_1 = (phi.transpose() * s.powers.power(s.configs.config(1).perm[1], 1))(j1);
            CHECK(diff == doctest::Approx(std::log(p_under_0) - std::log(p_under_1))
                              .epsilon(1e-12));
            // and the arm-0 part itself is log phi(j0)
            CHECK(ledger.initial_term(0) ==
                  doctest::Approx(std::log(phi[j0]) + std::log(p_under_0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("initial terms: identical-rows bank reduces arm 1 to its stationary mass") {
    LedgerSetup s(fixtures::identical_rows_two_arm(), 3);
    Eigen::VectorXd mu0 = stationary_distribution(s.instance.bank_kernel(0)).probs();
    LlrLedger ledger = s.make_ledger({0, 1});
    const auto& phi = s.instance.initial_dist().probs();
    // configuration 0 assigns bank 0 to arm 1's position.. perm {0,1}: arm 1 gets bank 1
    Eigen::VectorXd mu1 = stationary_distribution(s.instance.bank_kernel(1)).probs();
    CHECK(ledger.initial_term(0) ==
          doctest::Approx(std::log(phi[0]) + std::log(mu1[1])).epsilon(1e-12));
    CHECK(ledger.initial_term(1) ==
          doctest::Approx(std::log(phi[0]) + std::log(mu0[1])).epsilon(1e-12));
}

TEST_CASE("initial terms: three-arm triple sum against direct evaluation") {
    Rng rng(55);
    LedgerSetup s(fixtures::random_instance(3, 2, rng), 5);
    std::vector<int> first_obs{1, 0, 1};
    LlrLedger ledger = s.make_ledger(first_obs);
    const auto& phi = s.instance.initial_dist().probs();
    for (int c = 0; c < s.configs.size(); ++c) {
        double expect = std::log(phi[first_obs[0]]);
        for (int a = 1; a < 3; ++a) {
            Eigen::MatrixXd step =
                matrix_power(s.instance.bank_kernel(s.configs.config(c).perm[a]), a).matrix();
            double prob = 0.0;
            for (int i = 0; i < 2; ++i) prob += phi[i] * step(i, first_obs[a]);
            expect += std::log(prob);
        }
        CHECK(ledger.initial_term(c) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("impossible round-robin observation is rejected") {
    // bank 1 can never reach state 0, so observing 0 on arm 1 is impossible
    Eigen::MatrixXd never0(2, 2);
    never0 << 0.0, 1.0, 0.0, 1.0;
    std::vector<TransitionMatrix> bank{
        TransitionMatrix::stochastic_only(fixtures::mat2(0.5, 0.5, 0.5, 0.5)),
        TransitionMatrix::stochastic_only(never0)};
    KernelPowerCache powers(bank, 3);
    DelayStateSpace space(2, 3, 2);
    ConfigurationSet configs(2, {1.0, 0.0});
    ObservationLogLik loglik(powers);
    auto phi = Distribution::validated(Eigen::VectorXd::Constant(2, 0.5));
    CHECK_THROWS_WITH_AS(LlrLedger({0, 0}, phi, configs, loglik, space),
                         doctest::Contains("ImpossibleObservation"), Error);
}

TEST_CASE("zero-probability observations are rejected while recording") {
    // both kernels share the zero pattern (mutually absolutely continuous),
    // so the transition 0 -> 0 at delay 1 is impossible under every
    // configuration; recording it must fail loudly
    Eigen::MatrixXd hop1(2, 2), hop2(2, 2);
    hop1 << 0.0, 1.0, 0.5, 0.5;
    hop2 << 0.0, 1.0, 0.25, 0.75;
    std::vector<TransitionMatrix> bank{TransitionMatrix::stochastic_only(hop1),
                                       TransitionMatrix::stochastic_only(hop2)};
    KernelPowerCache powers(bank, 3);
    DelayStateSpace space(2, 3, 2);
    ConfigurationSet configs(2, {1.0, 0.0});
    ObservationLogLik loglik(powers);
    auto phi = Distribution::validated(Eigen::VectorXd::Constant(2, 0.5));
    LlrLedger ledger({1, 1}, phi, configs, loglik, space);
    // state (d=(1,2), i=(0,1)): selecting arm 0 cannot observe 0 again
    int index = space.index_of(DelayState{{1, 2}, {0, 1}});
    CHECK_THROWS_WITH_AS(ledger.record(index, 0, 0), doctest::Contains("ZeroLikelihood"),
                         Error);
    CHECK_NOTHROW(ledger.record(index, 0, 1));
}

TEST_CASE("ledger equals the batch recomputation at ten thousand steps") {
    LedgerSetup s(fixtures::two_arm(), 4);
    LlrLedger ledger = s.make_ledger({0, 1});
    int index = s.space.index_of(initial_delay_state({0, 1}));
    Rng rng(77);
    random_walk(ledger, s.space, index, 10000, rng);
    CHECK(ledger.observations() == 10000);
    CHECK(std::abs(ledger.llr(0, 1) - ledger.batch_llr(0, 1)) <= 1e-9);
    CHECK(std::abs(ledger.llr(1, 0) - ledger.batch_llr(1, 0)) <= 1e-9);
}

TEST_CASE("three-arm ledger matches batch for every pair") {
    Rng rng(57);
    LedgerSetup s(fixtures::random_instance(3, 2, rng), 4);
    LlrLedger ledger = s.make_ledger({0, 1, 0});
    int index = s.space.index_of(initial_delay_state({0, 1, 0}));
    random_walk(ledger, s.space, index, 3000, rng);
    for (int c = 0; c < 6; ++c) {
        for (int c2 = 0; c2 < 6; ++c2) {
            CHECK(std::abs(ledger.llr(c, c2) - ledger.batch_llr(c, c2)) <= 1e-9);
        }
    }
}

TEST_CASE("configurations sharing the selected arm's kernel move in lockstep") {
    Rng rng(59);
    LedgerSetup s(fixtures::random_instance(3, 2, rng), 4);
    LlrLedger ledger = s.make_ledger({0, 0, 0});
    int index = s.space.index_of(initial_delay_state({0, 0, 0}));

    std::vector<double> before(6);
    for (int c = 0; c < 6; ++c) before[c] = ledger.value(c);
    int arm = 1;
    ledger.record(index, arm, 1);
    for (int c = 0; c < 6; ++c) {
        for (int c2 = 0; c2 < 6; ++c2) {
            if (s.configs.config(c).perm[arm] == s.configs.config(c2).perm[arm]) {
                CHECK(ledger.value(c) - before[c] ==
                      doctest::Approx(ledger.value(c2) - before[c2]).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("scripted five-step trajectory against a hand-rolled log sum") {
    LedgerSetup s(fixtures::two_arm(), 3);
    std::vector<int> first_obs{1, 0};
    LlrLedger ledger = s.make_ledger(first_obs);

    // (arm, observation) script; delays evolve deterministically from (2,1)
    const std::vector<std::pair<int, int>> script{{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 1}};
    DelayState ds = initial_delay_state(first_obs);
    std::vector<double> expect{ledger.initial_term(0), ledger.initial_term(1)};
    for (auto [arm, obs] : script) {
        int index = s.space.index_of(ds);
        ledger.record(index, arm, obs);
        for (int c = 0; c < 2; ++c) {
            const Eigen::MatrixXd& step =
                s.powers.power(s.configs.config(c).perm[arm], ds.delay[arm]);
            expect[c] += std::log(step(ds.last[arm], obs));
        }
        ds = apply_selection(ds, arm, obs, 3);
    }
    CHECK(ledger.value(0) == doctest::Approx(expect[0]).epsilon(1e-12));
    CHECK(ledger.value(1) == doctest::Approx(expect[1]).epsilon(1e-12));
    CHECK(ledger.counts().total() == 5);
}

TEST_CASE("llr antisymmetry and zero diagonal") {
    LedgerSetup s(fixtures::two_arm(), 3);
    LlrLedger ledger = s.make_ledger({0, 1});
    int index = s.space.index_of(initial_delay_state({0, 1}));
    Rng rng(61);
    random_walk(ledger, s.space, index, 500, rng);
    CHECK(ledger.llr(0, 0) == 0.0);
    CHECK(ledger.llr(0, 1) == doctest::Approx(-ledger.llr(1, 0)).epsilon(1e-12));
}

TEST_CASE("glr against direct recomputation, two and three arms") {
    LedgerSetup s2(fixtures::two_arm(), 3);
    LlrLedger ledger2 = s2.make_ledger({1, 1});
    int index = s2.space.index_of(initial_delay_state({1, 1}));
    Rng rng(63);
    random_walk(ledger2, s2.space, index, 200, rng);
    CHECK(ledger2.glr(0) == doctest::Approx(ledger2.value(0) - ledger2.value(1)).epsilon(1e-12));
    CHECK(ledger2.glr(0) + ledger2.glr(1) <= 1e-12);

    Rng rng3(65);
    LedgerSetup s3(fixtures::random_instance(3, 2, rng3), 4);
    LlrLedger ledger3 = s3.make_ledger({0, 1, 1});
    int index3 = s3.space.index_of(initial_delay_state({0, 1, 1}));
    random_walk(ledger3, s3.space, index3, 500, rng3);
    for (int c = 0; c < 6; ++c) {
        double best_alt = -std::numeric_limits<double>::infinity();
        for (int alt : s3.configs.alt(c)) best_alt = std::max(best_alt, ledger3.value(alt));
        CHECK(ledger3.glr(c) == doctest::Approx(ledger3.value(c) - best_alt).epsilon(1e-12));
        for (int alt : s3.configs.alt(c)) {
            CHECK(ledger3.glr(c) + ledger3.glr(alt) <= 1e-12);
        }
    }
    // the leaders list is exactly the argmax set of the glr
    auto leaders = ledger3.leaders();
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < 6; ++c) best = std::max(best, ledger3.glr(c));
    for (int c = 0; c < 6; ++c) {
        bool in = std::find(leaders.begin(), leaders.end(), c) != leaders.end();
        CHECK(in == (ledger3.glr(c) == best));
    }
}

TEST_CASE("argmax is deterministic with a unique maximizer") {
    LedgerSetup s(fixtures::two_arm(), 3);
    LlrLedger ledger = s.make_ledger({0, 1});
    int index = s.space.index_of(initial_delay_state({0, 1}));
    Rng rng(67);
    random_walk(ledger, s.space, index, 100, rng);
    REQUIRE(ledger.leaders().size() == 1);
    Rng tie1(1), tie2(2);
    CHECK(ledger.argmax_estimate(tie1).config == ledger.argmax_estimate(tie2).config);
}

TEST_CASE("full tie breaks uniformly at random") {
    // identical kernels on every arm keep all configurations exactly tied
    Eigen::VectorXd mu(2);
    mu << 0.5, 0.5;
    std::vector<TransitionMatrix> bank{fixtures::identical_rows(mu), fixtures::identical_rows(mu),
                                       fixtures::identical_rows(mu)};
    KernelPowerCache powers(bank, 4);
    DelayStateSpace space(3, 4, 2);
    ConfigurationSet configs(3, {2.0, 1.0, 0.0});
    ObservationLogLik loglik(powers);
    auto phi = Distribution::validated(Eigen::VectorXd::Constant(2, 0.5));
    LlrLedger ledger({0, 1, 0}, phi, configs, loglik, space);
    REQUIRE(ledger.leaders().size() == 6);

    Rng tie(71);
    const int draws = 10000;
    std::vector<int> counts(6, 0);
    for (int t = 0; t < draws; ++t) ++counts[ledger.argmax_estimate(tie).config];
    // per-cell 3 sigma band plus a chi-square sanity bound
    double expect = draws / 6.0;
    double sigma = std::sqrt(draws * (1.0 / 6) * (5.0 / 6));
    double chi2 = 0.0;
    for (int c = 0; c < 6; ++c) {
        CHECK(std::abs(counts[c] - expect) <= 3 * sigma);
        chi2 += (counts[c] - expect) * (counts[c] - expect) / expect;
    }
    CHECK(chi2 <= 20.5);  // 99.9% quantile, 5 degrees of freedom
}

TEST_CASE("count conservation and marginals") {
    LedgerSetup s(fixtures::two_arm(), 4);
    LlrLedger ledger = s.make_ledger({0, 0});
    int index = s.space.index_of(initial_delay_state({0, 0}));
    Rng rng(73);
    random_walk(ledger, s.space, index, 1234, rng);
    CHECK(ledger.counts().total() == 1234);
    std::int64_t by_state = 0;
    for (int st = 0; st < s.space.size(); ++st) by_state += ledger.counts().state_marginal(st);
    CHECK(by_state == 1234);
}

TEST_SUITE_END();
