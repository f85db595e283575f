// extern-C surface over the experiment pipeline; see include/rbai/rbai.h.

#include "rbai/rbai.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "experiment.hpp"
#include "log.hpp"

struct rbai_experiment {
    rbai::ExperimentSpec spec;
};

namespace {

thread_local std::string t_last_error;

rbai_status status_of(rbai::ErrorCode code) {
    using rbai::ErrorCode;
    switch (code) {
    case ErrorCode::ParseError:
        return RBAI_ERR_PARSE;
    case ErrorCode::IoError:
        return RBAI_ERR_IO;
    case ErrorCode::VerifyFailed:
        return RBAI_ERR_VERIFY_FAILED;
    case ErrorCode::InvalidArgument:
    case ErrorCode::IllegalAction:
        return RBAI_ERR_INVALID_ARGUMENT;
    case ErrorCode::ValidationError:
    case ErrorCode::NegativeEntry:
    case ErrorCode::RowSumViolation:
    case ErrorCode::NotErgodic:
    case ErrorCode::TiedBestArm:
    case ErrorCode::DomainError:
    case ErrorCode::SupportViolation:
        return RBAI_ERR_VALIDATION;
    default:
        return RBAI_ERR_NUMERIC;
    }
}

template <typename Fn>
rbai_status guarded(Fn&& fn) {
    try {
        fn();
        return RBAI_OK;
    } catch (const rbai::Error& e) {
        t_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return RBAI_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return RBAI_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* rbai_version(void) { return "1.0.0"; }

const char* rbai_status_name(rbai_status status) {
    switch (status) {
    case RBAI_OK: return "ok";
    case RBAI_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case RBAI_ERR_IO: return "io-error";
    case RBAI_ERR_PARSE: return "parse-error";
    case RBAI_ERR_VALIDATION: return "validation-error";
    case RBAI_ERR_NUMERIC: return "numeric-error";
    case RBAI_ERR_VERIFY_FAILED: return "verify-failed";
    case RBAI_ERR_INTERNAL: return "internal-error";
    }
    return "unknown";
}

const char* rbai_last_error(void) { return t_last_error.c_str(); }

rbai_status rbai_set_log_level(const char* level) {
    if (!level) return RBAI_ERR_INVALID_ARGUMENT;
    return guarded([&] { rbai::set_log_level(rbai::log_level_from_name(level)); });
}

rbai_status rbai_experiment_open(const char* config_path, rbai_experiment** out) {
    if (!config_path || !out) return RBAI_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto handle = new rbai_experiment{rbai::load_experiment(config_path)};
        *out = handle;
    });
}

rbai_status rbai_experiment_open_json(const char* config_json, rbai_experiment** out) {
    if (!config_json || !out) return RBAI_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto handle = new rbai_experiment{rbai::parse_experiment(config_json)};
        *out = handle;
    });
}

void rbai_experiment_close(rbai_experiment* exp) { delete exp; }

rbai_status rbai_experiment_set_seed(rbai_experiment* exp, uint64_t seed) {
    if (!exp) return RBAI_ERR_INVALID_ARGUMENT;
    exp->spec.seed = seed;
    return RBAI_OK;
}

rbai_status rbai_experiment_set_workers(rbai_experiment* exp, int32_t workers) {
    if (!exp || workers < 1) return RBAI_ERR_INVALID_ARGUMENT;
    exp->spec.workers = workers;
    return RBAI_OK;
}

rbai_status rbai_experiment_set_mode(rbai_experiment* exp, const char* mode) {
    if (!exp || !mode) return RBAI_ERR_INVALID_ARGUMENT;
    return guarded([&] { exp->spec.mode = rbai::mode_from_name(mode); });
}

rbai_status rbai_experiment_run(rbai_experiment* exp, const char* out_dir) {
    if (!exp || !out_dir) return RBAI_ERR_INVALID_ARGUMENT;
    return guarded([&] { rbai::run_experiment(exp->spec, out_dir); });
}

rbai_status rbai_experiment_describe(rbai_experiment* exp, char** json_out) {
    if (!exp || !json_out) return RBAI_ERR_INVALID_ARGUMENT;
    *json_out = nullptr;
    return guarded([&] {
        std::string text = rbai::describe_experiment(exp->spec).dump(2);
        *json_out = dup_string(text);
        if (!*json_out) rbai::raise(rbai::ErrorCode::IoError, "out of memory");
    });
}

void rbai_string_free(char* s) { std::free(s); }

}  // extern "C"
