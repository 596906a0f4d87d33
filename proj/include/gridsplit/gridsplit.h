/* Copyright 2026 The gridsplit Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the gridsplit transient-stability engine. All objects are
 * opaque handles released with the matching *_free function. Functions
 * return GS_OK or an error status; gs_last_error() then describes the
 * failure for the calling thread.
 */
#ifndef GRIDSPLIT_GRIDSPLIT_H
#define GRIDSPLIT_GRIDSPLIT_H

#include <stddef.h>

#if defined(GRIDSPLIT_BUILDING)
#define GS_API __attribute__((visibility("default")))
#else
#define GS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_ERR_PARSE = 1,
  GS_ERR_VALIDATION = 2,
  GS_ERR_PARTITION = 3,
  GS_ERR_SINGULAR = 4,
  GS_ERR_DIVERGENCE = 5,
  GS_ERR_STEADY_STATE = 6,
  GS_ERR_IO = 7,
  GS_ERR_ARGUMENT = 8,
  GS_ERR_MISSING_BENCHMARK = 9,
  GS_ERR_NON_FINITE = 10,
  GS_ERR_INTERNAL = 99
} gs_status;

typedef enum gs_integrator {
  GS_INTEGRATOR_DEFAULT = -1,
  GS_INTEGRATOR_MODIFIED_EULER = 0,
  GS_INTEGRATOR_RKF45 = 1
} gs_integrator;

typedef struct gs_case gs_case;
typedef struct gs_scenario gs_scenario;
typedef struct gs_result gs_result;

GS_API const char* gs_version(void);
GS_API const char* gs_last_error(void);
GS_API const char* gs_status_name(gs_status status);
GS_API void gs_string_free(char* s);

/* Cases. `name` is a path or the name of a bundled case. */
GS_API gs_status gs_case_load(const char* name, gs_case** out);
GS_API gs_status gs_case_parse(const char* text, gs_case** out);
GS_API gs_status gs_case_clone(const gs_case* c, gs_case** out);
GS_API void gs_case_free(gs_case* c);
GS_API size_t gs_case_bus_count(const gs_case* c);
GS_API size_t gs_case_branch_count(const gs_case* c);
GS_API size_t gs_case_generator_count(const gs_case* c);
GS_API size_t gs_case_gfm_count(const gs_case* c);
GS_API gs_status gs_case_serialize(const gs_case* c, char** out);
GS_API gs_status gs_case_set_param(gs_case* c, const char* block, const char* key, double value);

/* Eigenvalues of the GFM state matrix (13 entries each). `stable` is the
 * all-negative-real-part test; `stable_coupled` skips states whose column
 * of A is identically zero. Any output pointer may be NULL. */
GS_API gs_status gs_gfm_eigenvalues(const gs_case* c, size_t gfm_index, double* re, double* im,
                                    int* stable, int* stable_coupled);
GS_API gs_status gs_gfm_name(const gs_case* c, size_t gfm_index, const char** name);

/* Scenarios. */
GS_API gs_status gs_scenario_load(const char* name, gs_scenario** out);
GS_API gs_status gs_scenario_parse(const char* text, const char* base_dir, gs_scenario** out);
GS_API void gs_scenario_free(gs_scenario* s);
GS_API gs_status gs_scenario_case_path(const gs_scenario* s, const char** path);

typedef struct gs_run_options {
  size_t workers;          /* >= 1 */
  double sigma;            /* <= 0 keeps the scenario value */
  int integrator;          /* gs_integrator */
  int benchmark;           /* -1 keeps the scenario value, 0 off, 1 on */
  double h_fast;           /* <= 0 keeps the scenario value */
  double h_slow;           /* <= 0 keeps the scenario value */
  int conductance;         /* -1 keeps the scenario value, 0 cut, 1 driving_point */
} gs_run_options;

GS_API void gs_run_options_init(gs_run_options* o);

/* Runs a scenario. `c` may be NULL to load the case the scenario names. */
GS_API gs_status gs_run(const gs_scenario* s, const gs_case* c, const gs_run_options* o, gs_result** out);
GS_API void gs_result_free(gs_result* r);

GS_API size_t gs_result_rows(const gs_result* r);
GS_API size_t gs_result_columns(const gs_result* r);
GS_API const char* gs_result_column_name(const gs_result* r, size_t col);
GS_API gs_status gs_result_value(const gs_result* r, size_t row, size_t col, double* out);
GS_API gs_status gs_result_write_csv(const gs_result* r, const char* path);
GS_API gs_status gs_result_summary_json(const gs_result* r, char** out);
GS_API gs_status gs_result_max_deviation(const gs_result* r, double* max, int* bus, double* time);
/* Failure details of the last divergence error raised by gs_run. */
GS_API double gs_last_divergence_time(void);

/* Compares two CSV traces, or decomposed vs bench columns when b is NULL.
 * Per-bus maxima are written to per_bus (capacity entries) and bus labels
 * to buses when those are non-NULL. */
GS_API gs_status gs_compare_csv(const char* a, const char* b, double* max, int* bus, double* time,
                                size_t* count, double* per_bus, int* buses, size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* GRIDSPLIT_GRIDSPLIT_H */
