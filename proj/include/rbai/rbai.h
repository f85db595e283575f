/* rbai: best-arm identification for restless Markov bandits.
 *
 * C interface to the experiment pipeline. Handles are opaque; every call
 * returns a status code and leaves a human-readable message retrievable via
 * rbai_last_error() on failure. The library is thread-compatible: distinct
 * handles may be used from distinct threads, a single handle may not.
 */
#ifndef RBAI_H
#define RBAI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbai_status {
    RBAI_OK = 0,
    RBAI_ERR_INVALID_ARGUMENT = 1,
    RBAI_ERR_IO = 2,
    RBAI_ERR_PARSE = 3,
    RBAI_ERR_VALIDATION = 4,
    RBAI_ERR_NUMERIC = 5,
    RBAI_ERR_VERIFY_FAILED = 6,
    RBAI_ERR_INTERNAL = 7
} rbai_status;

typedef struct rbai_experiment rbai_experiment;

const char* rbai_version(void);
const char* rbai_status_name(rbai_status status);

/* Message describing the most recent failure on the calling thread. */
const char* rbai_last_error(void);

/* Stderr verbosity: "error", "warn", "info", or "debug". */
rbai_status rbai_set_log_level(const char* level);

/* Parse and validate an experiment config (JSON). On success *out owns the
 * experiment and must be released with rbai_experiment_close. */
rbai_status rbai_experiment_open(const char* config_path, rbai_experiment** out);
rbai_status rbai_experiment_open_json(const char* config_json, rbai_experiment** out);
void rbai_experiment_close(rbai_experiment* exp);

/* Override config values before running. */
rbai_status rbai_experiment_set_seed(rbai_experiment* exp, uint64_t seed);
rbai_status rbai_experiment_set_workers(rbai_experiment* exp, int32_t workers);
/* mode: "montecarlo", "drift", "lp-sweep", or "verify". */
rbai_status rbai_experiment_set_mode(rbai_experiment* exp, const char* mode);

/* Run in the configured mode. Writes report.json and the mode's CSV files
 * into out_dir, which must already exist. In "verify" mode, recomputes the
 * deterministic quantities and checks them against the report.json found in
 * out_dir, returning RBAI_ERR_VERIFY_FAILED on mismatch. */
rbai_status rbai_experiment_run(rbai_experiment* exp, const char* out_dir);

/* Instance and theory summary as a JSON string. The caller owns *json_out
 * and must release it with rbai_string_free. */
rbai_status rbai_experiment_describe(rbai_experiment* exp, char** json_out);

void rbai_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RBAI_H */
