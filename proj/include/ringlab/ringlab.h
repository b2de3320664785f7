#ifndef RINGLAB_RINGLAB_H
#define RINGLAB_RINGLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(RINGLAB_BUILDING)
#define RL_API __attribute__((visibility("default")))
#else
#define RL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rl_status {
  RL_OK = 0,
  RL_INVALID_ARGUMENT,
  RL_DOMAIN,
  RL_UNSUPPORTED,
  RL_NON_CONVERGENCE,
  RL_POLE,
  RL_SINGULAR_MOMENT,
  RL_DEGENERATE,
  RL_OUT_OF_SUPPORT,
  RL_GRID_TOO_COARSE,
  RL_HYPOTHESIS_VIOLATED,
  RL_OUT_OF_REGIME,
  RL_CONFIG,
  RL_IO,
  RL_NUMERIC,
  RL_INTERNAL = 100
} rl_status;

typedef struct rl_measure rl_measure;
typedef struct rl_config rl_config;
typedef struct rl_run rl_run;
typedef struct rl_verify rl_verify;

RL_API const char* rl_version(void);
RL_API const char* rl_status_name(rl_status status);
/* Message of the last failed call on this thread; "" when none. */
RL_API const char* rl_last_error(void);

/* Law syntax accepted by rl_measure_parse and config files. */
RL_API size_t rl_law_count(void);
RL_API const char* rl_law_syntax(size_t index);
RL_API const char* rl_law_description(size_t index);

RL_API rl_status rl_measure_parse(const char* text, rl_measure** out);
RL_API void rl_measure_free(rl_measure* measure);
RL_API rl_status rl_measure_stieltjes(const rl_measure* mu, double E, double eta, double* re, double* im);
RL_API rl_status rl_free_convolution(const rl_measure* mu, const rl_measure* nu, double E, double eta,
                                     double* re, double* im);
RL_API rl_status rl_annulus_bounds(const rl_measure* nu, double* a, double* b);

RL_API rl_status rl_config_load(const char* path, rl_config** out);
RL_API rl_status rl_config_parse(const char* text, const char* source, rl_config** out);
RL_API void rl_config_free(rl_config* config);
RL_API rl_status rl_config_override_seed(rl_config* config, uint64_t seed);
RL_API uint64_t rl_config_seed(const rl_config* config);
RL_API int rl_config_threads(const rl_config* config);
RL_API const char* rl_config_hash(const rl_config* config);
RL_API const char* rl_config_output(const rl_config* config);
RL_API size_t rl_config_experiment_count(const rl_config* config);
/* Bundle of the verify section, or NULL without one. */
RL_API const char* rl_config_verify_bundle(const rl_config* config);

/* out_dir NULL: the config's output; threads 0: the config's threads. */
RL_API rl_status rl_run_experiments(const rl_config* config, const char* out_dir, int threads, rl_run** out);
RL_API void rl_run_free(rl_run* run);
RL_API size_t rl_run_experiment_count(const rl_run* run);
RL_API const char* rl_run_experiment_name(const rl_run* run, size_t index);
RL_API int rl_run_experiment_passed(const rl_run* run, size_t index);
/* Error text of a failed experiment, "" otherwise. */
RL_API const char* rl_run_experiment_error(const rl_run* run, size_t index);
RL_API int rl_run_all_passed(const rl_run* run);
RL_API int rl_run_numeric_failure(const rl_run* run);
RL_API double rl_run_wall_seconds(const rl_run* run);

typedef struct rl_criterion {
  int id;
  const char* name;
  int pass;
  int numeric_failure;
  double measured;
  double threshold;
  const char* relation;
  const char* detail;
  double seconds;
  const char* summary;
} rl_criterion;

typedef void (*rl_criterion_callback)(const rl_criterion* result, void* user);

typedef struct rl_verify_options {
  int threads;
  uint64_t seed;
  int quick;
  const char* output_dir;
  /* Replacement thresholds, applied after those of the config. */
  const int* threshold_ids;
  const double* threshold_values;
  size_t threshold_count;
} rl_verify_options;

RL_API void rl_verify_options_init(rl_verify_options* options);

RL_API rl_status rl_bundle_criteria(const char* bundle, int* ids, size_t capacity, size_t* count);

/* Runs the criteria of a bundle. config may be NULL; when given, its verify
   tolerances and hash apply. The callback sees each result as it finishes. */
RL_API rl_status rl_verify_run(const char* bundle, const rl_config* config, const rl_verify_options* options,
                               rl_criterion_callback callback, void* user, rl_verify** out);
RL_API void rl_verify_free(rl_verify* verify);
RL_API size_t rl_verify_count(const rl_verify* verify);
RL_API rl_status rl_verify_get(const rl_verify* verify, size_t index, rl_criterion* out);
RL_API int rl_verify_all_passed(const rl_verify* verify);
RL_API int rl_verify_numeric_failure(const rl_verify* verify);
RL_API rl_status rl_verify_write_csv(const rl_verify* verify, const char* path);

#ifdef __cplusplus
}
#endif

#endif
