// Command-line front end; drives the pipeline exclusively through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "rbai/rbai.h"

namespace {

int exit_code_for(rbai_status status) {
    switch (status) {
    case RBAI_OK:
        return 0;
    case RBAI_ERR_PARSE:
    case RBAI_ERR_VALIDATION:
        return 2;
    case RBAI_ERR_VERIFY_FAILED:
        return 3;
    default:
        return 1;
    }
}

int fail(rbai_status status) {
    std::fprintf(stderr, "rbai: %s: %s\n", rbai_status_name(status), rbai_last_error());
    return exit_code_for(status);
}

struct CommonArgs {
    std::string config;
    std::string out_dir;
    std::string log_level;
    std::uint64_t seed = 0;
    int workers = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
    cmd->add_option("--config", args.config, "experiment config file (JSON)")->required();
    if (needs_out) {
        cmd->add_option("--out", args.out_dir, "output directory (must exist)")->required();
    }
    cmd->add_option("--seed", args.seed, "override the base seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--workers", args.workers, "override the worker count");
    cmd->add_option("--log-level", args.log_level, "error|warn|info|debug");
}

int run_command(const CommonArgs& args, const char* mode, bool describe_only) {
    rbai_status st;
    if (!args.log_level.empty()) {
        st = rbai_set_log_level(args.log_level.c_str());
        if (st != RBAI_OK) return fail(st);
    }

    rbai_experiment* exp = nullptr;
    st = rbai_experiment_open(args.config.c_str(), &exp);
    if (st != RBAI_OK) return fail(st);

    if (args.seed_set) rbai_experiment_set_seed(exp, args.seed);
    if (args.workers > 0) rbai_experiment_set_workers(exp, args.workers);
    if (mode) {
        st = rbai_experiment_set_mode(exp, mode);
        if (st != RBAI_OK) {
            rbai_experiment_close(exp);
            return fail(st);
        }
    }

    if (describe_only) {
        char* json = nullptr;
        st = rbai_experiment_describe(exp, &json);
        if (st == RBAI_OK) {
            std::printf("%s\n", json);
            rbai_string_free(json);
        }
    } else {
        st = rbai_experiment_run(exp, args.out_dir.c_str());
    }
    rbai_experiment_close(exp);
    return st == RBAI_OK ? 0 : fail(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Best-arm identification for restless Markov bandits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rbai_version());

    CommonArgs run_args, drift_args, sweep_args, verify_args, describe_args;
    CLI::App* run = app.add_subcommand("run", "Monte Carlo trials of the stopping policy");
    add_common(run, run_args, true);
    CLI::App* drift = app.add_subcommand("drift", "never-stopping drift run");
    add_common(drift, drift_args, true);
    CLI::App* sweep = app.add_subcommand("sweep", "separation LP over a range of max delays");
    add_common(sweep, sweep_args, true);
    CLI::App* verify =
        app.add_subcommand("verify", "recompute and check a previous report's constants");
    add_common(verify, verify_args, true);
    CLI::App* describe = app.add_subcommand("describe", "summarize an experiment config");
    add_common(describe, describe_args, false);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(run_args, "montecarlo", false);
    if (drift->parsed()) return run_command(drift_args, "drift", false);
    if (sweep->parsed()) return run_command(sweep_args, "lp-sweep", false);
    if (verify->parsed()) return run_command(verify_args, "verify", false);
    if (describe->parsed()) return run_command(describe_args, nullptr, true);
    return 1;
}
