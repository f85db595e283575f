#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "experiment.hpp"

using namespace rbai;
namespace fs = std::filesystem;

namespace {

std::string i1_config(const std::string& policy = R"({"L": 20.0, "eta": 0.2, "R": 4})",
                      const std::string& experiment =
                          R"({"trials": 40, "seed": 3, "workers": 1, "mode": "montecarlo"})") {
    return std::string(R"({
      "state_space_size": 2,
      "reward": [0.0, 1.0],
      "tpms": [[[0.3, 0.7], [0.6, 0.4]], [[0.7, 0.3], [0.6, 0.4]]],
      "assignment": [0, 1],
      "policy": )") +
           policy + R"(, "experiment": )" + experiment + "}";
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("rbai_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("config parses and validates the instance") {
    ExperimentSpec spec = parse_experiment(i1_config());
    CHECK(spec.instance.num_arms() == 2);
    CHECK(spec.instance.state_count() == 2);
    CHECK(spec.policy.confidence_scale == 20.0);
    CHECK(spec.policy.max_delay == 4);
    CHECK(spec.trials == 40);
    CHECK(spec.mode == ExperimentMode::MonteCarlo);
    // the best arm is the one holding the first TPM
    ConfigurationSet configs(spec.instance);
    CHECK(configs.best_arm_of(configs.truth_index()) == 0);
    // default sweep delays K+1..K+5
    CHECK(spec.sweep_delays == std::vector<int>{3, 4, 5, 6, 7});
}

TEST_CASE("flat row-major tpms are accepted") {
    std::string text = R"({
      "state_space_size": 2,
      "reward": [0, 1],
      "tpms": [[0.3, 0.7, 0.6, 0.4], [0.7, 0.3, 0.6, 0.4]],
      "assignment": [0, 1],
      "policy": {"L": 10.0, "eta": 0.5, "R": 3}
    })";
    ExperimentSpec spec = parse_experiment(text);
    CHECK(spec.instance.bank_kernel(0)(0, 1) == 0.7);
}

TEST_CASE("config rejections name the violated invariant") {
    // non-stochastic row
    std::string bad_row = i1_config();
    bad_row.replace(bad_row.find("0.3"), 3, "0.4");
    CHECK_THROWS_WITH_AS(parse_experiment(bad_row), doctest::Contains("RowSumViolation"), Error);

    // constant reward ties all arms
    std::string tied = i1_config();
    tied.replace(tied.find("[0.0, 1.0]"), 10, "[1.0, 1.0]");
    CHECK_THROWS_WITH_AS(parse_experiment(tied), doctest::Contains("ValidationError"), Error);

    // invalid JSON
    CHECK_THROWS_WITH_AS(parse_experiment("{"), doctest::Contains("ParseError"), Error);

    // unknown keys are rejected
    std::string unknown = i1_config(R"({"L": 20.0, "eta": 0.2, "R": 4, "bogus": 1})");
    CHECK_THROWS_WITH_AS(parse_experiment(unknown), doctest::Contains("bogus"), Error);
}

TEST_CASE("exactly one of L and epsilon") {
    CHECK_THROWS_WITH_AS(parse_experiment(i1_config(R"({"eta": 0.2, "R": 4})")),
                         doctest::Contains("exactly one"), Error);
    CHECK_THROWS_WITH_AS(
        parse_experiment(i1_config(R"({"L": 10.0, "epsilon": 0.1, "eta": 0.2, "R": 4})")),
        doctest::Contains("ParseError"), Error);
    ExperimentSpec spec = parse_experiment(i1_config(R"({"epsilon": 0.01, "eta": 0.2, "R": 4})"));
    CHECK(spec.policy.confidence_scale == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("wilson interval width scales as the square root of the trials") {
    auto [lo1, hi1] = wilson_interval(200, 10000, 2.5758293035489004);
    auto [lo4, hi4] = wilson_interval(800, 40000, 2.5758293035489004);
    double ratio = (hi4 - lo4) / (hi1 - lo1);
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
    // degenerate corners stay inside [0, 1]
    auto [lo0, hi0] = wilson_interval(0, 100, 2.5758293035489004);
    CHECK(lo0 == 0.0);
    CHECK(hi0 < 0.1);
}

TEST_CASE("monte carlo mode writes a deterministic report") {
    ExperimentSpec spec = parse_experiment(i1_config());
    TempDir dir_a("mc_a"), dir_b("mc_b");
    auto report = run_experiment(spec, dir_a.str());
    run_experiment(spec, dir_b.str());

    CHECK(slurp(dir_a.path / "report.json") == slurp(dir_b.path / "report.json"));
    CHECK(slurp(dir_a.path / "trials.csv") == slurp(dir_b.path / "trials.csv"));

    // round trip: the emitted file parses back to the same values
    auto reparsed = nlohmann::ordered_json::parse(slurp(dir_a.path / "report.json"));
    CHECK(reparsed == report);
    CHECK(reparsed["theory"]["t_star"].get<double>() ==
          report["theory"]["t_star"].get<double>());

    // documented column order
    std::string csv = slurp(dir_a.path / "trials.csv");
    CHECK(csv.rfind("seed,tau,declared,error,hit_horizon\n", 0) == 0);

    // every trial stopped and the aggregate matches the csv line count
    CHECK(report["results"]["trials"].get<long>() == 40);
    CHECK(report["results"]["horizon_hits"].get<long>() == 0);
    long lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 41);  // header + one line per trial
}

TEST_CASE("worker count does not change the records") {
    ExperimentSpec spec = parse_experiment(i1_config());
    TempDir dir_a("w1"), dir_b("w4");
    spec.workers = 1;
    run_experiment(spec, dir_a.str());
    spec.workers = 4;
    run_experiment(spec, dir_b.str());
    CHECK(slurp(dir_a.path / "trials.csv") == slurp(dir_b.path / "trials.csv"));
}

TEST_CASE("missing output directory raises IoError with the path") {
    ExperimentSpec spec = parse_experiment(i1_config());
    CHECK_THROWS_WITH_AS(run_experiment(spec, "/nonexistent/rbai_out"),
                         doctest::Contains("/nonexistent/rbai_out"), Error);
}

TEST_CASE("lp sweep mode emits a non-decreasing table") {
    ExperimentSpec spec = parse_experiment(i1_config(
        R"({"L": 20.0, "eta": 0.2, "R": 4})",
        R"({"mode": "lp-sweep", "r_list": [3, 4, 5]})"));
    TempDir dir("sweep");
    auto report = run_experiment(spec, dir.str());
    const auto& sweep = report["sweep"];
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0]["n_states"].get<int>() == 16);  // K=2, R=3, |S|=2
    double last = 0.0;
    for (const auto& row : sweep) {
        double t_star = row["t_star"].get<double>();
        CHECK(t_star >= last - 1e-7);
        CHECK(row["t_unif"].get<double>() <= t_star + 1e-9);
        last = t_star;
    }
    std::string csv = slurp(dir.path / "lp_sweep.csv");
    CHECK(csv.rfind("R,T_R_star,T_R_unif,n_states\n", 0) == 0);
}

TEST_CASE("drift mode reports slopes and occupancy gaps") {
    ExperimentSpec spec = parse_experiment(i1_config(
        R"({"L": 20.0, "eta": 0.2, "R": 4, "max_horizon": 4000})",
        R"({"seed": 5, "mode": "drift", "trajectory_log": true})"));
    TempDir dir("drift");
    auto report = run_experiment(spec, dir.str());
    CHECK(report["results"]["observations"].get<long>() == 4000);
    CHECK(report["results"]["final_slope"].size() == 1);
    CHECK(report["results"]["drift_limit"][0].get<double>() > 0.0);
    CHECK(report["results"]["occupancy_sup_gap"].get<double>() < 0.05);
    CHECK(fs::exists(dir.path / "drift.csv"));
    std::string traj = slurp(dir.path / "trajectory.csv");
    CHECK(traj.rfind("n,arm,obs,state_index,leader_glr\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 4001);
}

TEST_CASE("verify mode accepts its own report and rejects a tampered one") {
    ExperimentSpec spec = parse_experiment(i1_config());
    TempDir dir("verify");
    run_experiment(spec, dir.str());

    auto verdict = verify_experiment(spec, dir.str());
    CHECK(verdict["verified"].get<bool>());

    // tamper with a theory constant
    auto report = nlohmann::ordered_json::parse(slurp(dir.path / "report.json"));
    report["theory"]["t_star"] = report["theory"]["t_star"].get<double>() + 1e-3;
    std::ofstream(dir.path / "report.json") << report.dump(2) << '\n';
    CHECK_THROWS_WITH_AS(verify_experiment(spec, dir.str()),
                         doctest::Contains("VerifyFailed"), Error);
}

TEST_CASE("describe summarizes instance and theory") {
    ExperimentSpec spec = parse_experiment(i1_config());
    auto summary = describe_experiment(spec);
    CHECK(summary["instance"]["num_arms"].get<int>() == 2);
    CHECK(summary["instance"]["best_arm"].get<int>() == 0);
    CHECK(summary["theory"]["t_star"].get<double>() > 0.0);
    CHECK(summary["policy"]["threshold"].get<double>() ==
          doctest::Approx(std::log(20.0)).epsilon(1e-12));
}

TEST_CASE("shipped example configs parse and validate") {
    // locate configs/ relative to this source file
    fs::path configs = fs::path(__FILE__).parent_path().parent_path() / "configs";
    REQUIRE(fs::is_directory(configs));
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(configs)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_experiment(entry.path().string()));
    }
    CHECK(seen >= 3);
}

TEST_CASE("lp dump writes the plain-text listing") {
    ExperimentSpec spec = parse_experiment(i1_config(
        R"({"L": 20.0, "eta": 0.2, "R": 3})",
        R"({"trials": 2, "lp_dump": true})"));
    TempDir dir("dump");
    run_experiment(spec, dir.str());
    std::string listing = slurp(dir.path / "lp_listing.txt");
    CHECK(listing.find("maximize") != std::string::npos);
    CHECK(listing.find("configuration 1") != std::string::npos);
}

TEST_SUITE_END();
