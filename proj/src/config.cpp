#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rbai {

namespace {

using nlohmann::ordered_json;

constexpr int kMaxArms = 5;       // |configurations| = K! drives per-step cost
constexpr int kMaxStates = 16;

[[noreturn]] void parse_fail(const std::string& what) { raise(ErrorCode::ParseError, what); }

const ordered_json& require(const ordered_json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail("missing key '" + key + "'");
    return *it;
}

void check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            parse_fail("unknown key '" + it.key() + "' in " + where);
        }
    }
}

double as_number(const ordered_json& v, const std::string& key) {
    if (!v.is_number()) parse_fail("'" + key + "' must be a number");
    return v.get<double>();
}

long as_integer(const ordered_json& v, const std::string& key) {
    if (!v.is_number_integer()) parse_fail("'" + key + "' must be an integer");
    return v.get<long>();
}

Eigen::VectorXd as_vector(const ordered_json& v, const std::string& key) {
    if (!v.is_array()) parse_fail("'" + key + "' must be an array");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = as_number(v[i], key);
    return out;
}

// A kernel is either nested rows [[..],[..]] or a flat row-major array.
Eigen::MatrixXd as_matrix(const ordered_json& v, int states, const std::string& key) {
    Eigen::MatrixXd m(states, states);
    if (!v.is_array() || v.empty()) parse_fail("'" + key + "' must be a non-empty array");
    if (v[0].is_array()) {
        if (static_cast<int>(v.size()) != states) {
            parse_fail("'" + key + "' must have one row per state");
        }
        for (int i = 0; i < states; ++i) {
            if (!v[i].is_array() || static_cast<int>(v[i].size()) != states) {
                parse_fail("'" + key + "' rows must have one entry per state");
            }
            for (int j = 0; j < states; ++j) m(i, j) = as_number(v[i][j], key);
        }
    } else {
        if (static_cast<int>(v.size()) != states * states) {
            parse_fail("'" + key + "' must have state_space_size^2 entries");
        }
        for (int i = 0; i < states; ++i) {
            for (int j = 0; j < states; ++j) m(i, j) = as_number(v[i * states + j], key);
        }
    }
    return m;
}

}  // namespace

const char* mode_name(ExperimentMode mode) {
    switch (mode) {
    case ExperimentMode::MonteCarlo: return "montecarlo";
    case ExperimentMode::Drift: return "drift";
    case ExperimentMode::LpSweep: return "lp-sweep";
    case ExperimentMode::Verify: return "verify";
    }
    return "unknown";
}

ExperimentMode mode_from_name(const std::string& name) {
    if (name == "montecarlo") return ExperimentMode::MonteCarlo;
    if (name == "drift") return ExperimentMode::Drift;
    if (name == "lp-sweep") return ExperimentMode::LpSweep;
    if (name == "verify") return ExperimentMode::Verify;
    parse_fail("unknown mode '" + name + "'");
}

ExperimentSpec parse_experiment(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        parse_fail(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) parse_fail("config must be a JSON object");
    check_keys(root,
               {"state_space_size", "reward", "tpms", "assignment", "phi", "policy",
                "experiment"},
               "config");

    const int states = static_cast<int>(as_integer(require(root, "state_space_size"),
                                                   "state_space_size"));
    if (states < 2 || states > kMaxStates) {
        raise(ErrorCode::ValidationError, "state_space_size must be between 2 and 16");
    }

    Eigen::VectorXd reward = as_vector(require(root, "reward"), "reward");
    if (reward.size() != states) {
        raise(ErrorCode::ValidationError, "reward length must equal state_space_size");
    }

    const ordered_json& tpms = require(root, "tpms");
    if (!tpms.is_array() || tpms.size() < 2) parse_fail("'tpms' must list at least 2 matrices");
    if (static_cast<int>(tpms.size()) > kMaxArms) {
        raise(ErrorCode::ValidationError, "at most 5 arms are supported");
    }
    std::vector<TransitionMatrix> bank;
    bank.reserve(tpms.size());
    for (std::size_t k = 0; k < tpms.size(); ++k) {
        std::ostringstream key;
        key << "tpms[" << k << "]";
        bank.push_back(TransitionMatrix::validated(as_matrix(tpms[k], states, key.str())));
    }
    const int arms = static_cast<int>(bank.size());

    const ordered_json& assignment_json = require(root, "assignment");
    if (!assignment_json.is_array() || static_cast<int>(assignment_json.size()) != arms) {
        parse_fail("'assignment' must list one TPM index per arm");
    }
    ArmAssignment truth;
    for (const auto& v : assignment_json) {
        truth.perm.push_back(static_cast<int>(as_integer(v, "assignment")));
    }

    Eigen::VectorXd phi;
    if (root.contains("phi")) {
        phi = as_vector(root["phi"], "phi");
        if (phi.size() != states) {
            raise(ErrorCode::ValidationError, "phi length must equal state_space_size");
        }
    } else {
        phi = Eigen::VectorXd::Constant(states, 1.0 / states);
    }

    ExperimentSpec spec{ProblemInstance::validated(std::move(bank), std::move(reward),
                                                   std::move(truth),
                                                   Distribution::validated(std::move(phi))),
                        PolicyConfig{}, 1000, 0, 1, ExperimentMode::MonteCarlo,
                        {}, false, false, false, {}};
    spec.raw = root;

    const ordered_json& policy = require(root, "policy");
    check_keys(policy, {"L", "epsilon", "eta", "R", "max_horizon"}, "policy");
    const bool has_l = policy.contains("L");
    const bool has_eps = policy.contains("epsilon");
    if (has_l == has_eps) {
        parse_fail("policy must set exactly one of 'L' and 'epsilon'");
    }
    if (has_l) {
        spec.policy.confidence_scale = as_number(policy["L"], "L");
    } else {
        double eps = as_number(policy["epsilon"], "epsilon");
        if (!(eps > 0.0 && eps < 1.0)) {
            raise(ErrorCode::ValidationError, "epsilon must lie in (0, 1)");
        }
        spec.policy.confidence_scale = 1.0 / eps;
    }
    if (!(spec.policy.confidence_scale > 1.0)) {
        raise(ErrorCode::ValidationError, "L must exceed 1");
    }
    spec.policy.mixture_weight = as_number(require(policy, "eta"), "eta");
    if (!(spec.policy.mixture_weight > 0.0 && spec.policy.mixture_weight <= 1.0)) {
        raise(ErrorCode::ValidationError, "eta must lie in (0, 1]");
    }
    spec.policy.max_delay = static_cast<int>(as_integer(require(policy, "R"), "R"));
    if (spec.policy.max_delay <= arms) {
        raise(ErrorCode::ValidationError, "R must exceed the number of arms");
    }
    if (spec.policy.max_delay > kMaxDelayBound) {
        raise(ErrorCode::ValidationError, "R exceeds the supported bound");
    }
    if (policy.contains("max_horizon")) {
        spec.policy.max_horizon = as_integer(policy["max_horizon"], "max_horizon");
        if (spec.policy.max_horizon < 1) {
            raise(ErrorCode::ValidationError, "max_horizon must be positive");
        }
    }

    if (root.contains("experiment")) {
        const ordered_json& exp = root["experiment"];
        check_keys(exp,
                   {"trials", "seed", "workers", "mode", "r_list", "drift_track",
                    "trajectory_log", "lp_dump"},
                   "experiment");
        if (exp.contains("trials")) {
            spec.trials = as_integer(exp["trials"], "trials");
            if (spec.trials < 1) raise(ErrorCode::ValidationError, "trials must be >= 1");
        }
        if (exp.contains("seed")) {
            spec.seed = static_cast<std::uint64_t>(as_integer(exp["seed"], "seed"));
        }
        if (exp.contains("workers")) {
            spec.workers = static_cast<int>(as_integer(exp["workers"], "workers"));
            if (spec.workers < 1) raise(ErrorCode::ValidationError, "workers must be >= 1");
        }
        if (exp.contains("mode")) {
            if (!exp["mode"].is_string()) parse_fail("'mode' must be a string");
            spec.mode = mode_from_name(exp["mode"].get<std::string>());
        }
        if (exp.contains("r_list")) {
            for (const auto& v : exp["r_list"]) {
                int r = static_cast<int>(as_integer(v, "r_list"));
                if (r <= arms || r > kMaxDelayBound) {
                    raise(ErrorCode::ValidationError, "r_list entries must satisfy K < R <= 60");
                }
                spec.sweep_delays.push_back(r);
            }
            if (spec.sweep_delays.empty()) parse_fail("'r_list' must be non-empty");
        }
        if (exp.contains("drift_track")) {
            if (!exp["drift_track"].is_string()) parse_fail("'drift_track' must be a string");
            std::string track = exp["drift_track"].get<std::string>();
            if (track == "estimate") {
                spec.drift_track_estimate = true;
            } else if (track != "fixed") {
                parse_fail("'drift_track' must be 'fixed' or 'estimate'");
            }
        }
        if (exp.contains("trajectory_log")) {
            if (!exp["trajectory_log"].is_boolean()) {
                parse_fail("'trajectory_log' must be a boolean");
            }
            spec.trajectory_log = exp["trajectory_log"].get<bool>();
        }
        if (exp.contains("lp_dump")) {
            if (!exp["lp_dump"].is_boolean()) parse_fail("'lp_dump' must be a boolean");
            spec.lp_dump = exp["lp_dump"].get<bool>();
        }
    }
    if (spec.sweep_delays.empty()) {
        for (int r = arms + 1; r <= std::min(arms + 5, kMaxDelayBound); ++r) {
            spec.sweep_delays.push_back(r);
        }
    }
    return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment(buffer.str());
}

}  // namespace rbai
