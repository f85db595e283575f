#pragma once

#include <json.hpp>
#include <string>

#include "policy.hpp"

namespace rbai {

enum class ExperimentMode { MonteCarlo, Drift, LpSweep, Verify };

const char* mode_name(ExperimentMode mode);
ExperimentMode mode_from_name(const std::string& name);

/// Parsed experiment file: the validated instance plus policy and run
/// parameters. One file pins a whole experiment.
struct ExperimentSpec {
    ProblemInstance instance;
    PolicyConfig policy;
    long trials = 1000;
    std::uint64_t seed = 0;
    int workers = 1;
    ExperimentMode mode = ExperimentMode::MonteCarlo;
    std::vector<int> sweep_delays;       // lp-sweep only; defaults to K+1 .. K+5
    bool drift_track_estimate = false;   // drift only: follow the running estimate
    bool trajectory_log = false;         // drift only: per-selection CSV
    bool lp_dump = false;                // write the LPs in plain text
    nlohmann::ordered_json raw;          // config echo for the report
};

// Parse and validate an experiment from JSON text. Schema errors raise
// ParseError; instance-level violations raise the matching validation error.
ExperimentSpec parse_experiment(const std::string& json_text);

// Same, reading the file at `path` (IoError when unreadable).
ExperimentSpec load_experiment(const std::string& path);

}  // namespace rbai
