#ifndef TUBESYNTH_H
#define TUBESYNTH_H

#include <stdint.h>

#if defined(_WIN32)
#define TSYN_API __declspec(dllexport)
#else
#define TSYN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum tsyn_status {
  TSYN_OK = 0,
  TSYN_CONFIG_ERROR = 1,
  TSYN_NO_FRAGMENT = 2,
  TSYN_SYNTHESIS_FAILURE = 3,
  TSYN_VIOLATION = 4,
  TSYN_SPEC_VIOLATED = 5,
  TSYN_INVALID_ARGUMENT = 64,
  TSYN_INTERNAL_ERROR = 70
} tsyn_status;

typedef struct tsyn_experiment tsyn_experiment;

TSYN_API const char* tsyn_version(void);
TSYN_API const char* tsyn_status_name(tsyn_status status);

/* Message of the last failure on this thread that had no handle to attach to. */
TSYN_API const char* tsyn_last_error(void);

/* Loads an experiment config; *out is NULL on failure. */
TSYN_API tsyn_status tsyn_experiment_load(const char* config_path, tsyn_experiment** out);
TSYN_API void tsyn_experiment_free(tsyn_experiment* exp);

TSYN_API tsyn_status tsyn_experiment_set_seed(tsyn_experiment* exp, uint64_t seed);
/* Overrides the config's output directory. */
TSYN_API tsyn_status tsyn_experiment_set_output_dir(tsyn_experiment* exp, const char* dir);
/* Output directory that the next command writes to. */
TSYN_API const char* tsyn_experiment_output_dir(const tsyn_experiment* exp);

TSYN_API tsyn_status tsyn_decompose(tsyn_experiment* exp);
TSYN_API tsyn_status tsyn_synth(tsyn_experiment* exp);
TSYN_API tsyn_status tsyn_simulate(tsyn_experiment* exp);
TSYN_API tsyn_status tsyn_verify(tsyn_experiment* exp);

/* Text summary of the last command; owned by the handle, valid until the next call. */
TSYN_API const char* tsyn_experiment_summary(const tsyn_experiment* exp);
/* Empty string when the last command succeeded. */
TSYN_API const char* tsyn_experiment_last_error(const tsyn_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
