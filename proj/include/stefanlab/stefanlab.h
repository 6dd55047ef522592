/* SPDX-License-Identifier: Apache-2.0 */

/*
 * C interface of the stefanlab shared library. Objects are opaque handles
 * released with their matching *_free function. Every fallible call returns
 * an sl_status; on failure sl_last_error() holds a message for the calling
 * thread until its next failing call. Strings handed out by the library
 * are released with sl_string_free.
 */

#ifndef STEFANLAB_H
#define STEFANLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_INVALID_ARGUMENT = 1,
  SL_INVALID_EXPONENT = 2,
  SL_INVALID_PARAMS = 3,
  SL_SCHEMA_VIOLATION = 4,
  SL_NEWTON_DIVERGENCE = 5,
  SL_NO_CONVERGENCE = 6,
  SL_EMPTY_WINDOW = 7,
  SL_EMPTY_CYLINDER = 8,
  SL_INSUFFICIENT_SAMPLES = 9,
  SL_NONPOSITIVE_EXCESS = 10,
  SL_DEGENERATE_CUTOFF = 11,
  SL_UNRESOLVED_BAND_TOO_WIDE = 12,
  SL_INCONSISTENT_FAMILY = 13,
  SL_IO = 14,
  SL_CONTRACT_FAILED = 15,
  SL_INTERNAL = 99
} sl_status;

typedef struct sl_config sl_config;
typedef struct sl_trajectory sl_trajectory;

SL_API const char* sl_version(void);
SL_API const char* sl_status_name(sl_status status);
SL_API const char* sl_last_error(void);
SL_API void sl_string_free(char* s);

/* Configuration. */
SL_API sl_status sl_config_parse(const char* json, sl_config** out);
SL_API sl_status sl_config_from_preset(const char* name, sl_config** out);
/* Canonical JSON of the config (fixed key order). */
SL_API sl_status sl_config_canonical(const sl_config* config, char** out_json);
SL_API void sl_config_free(sl_config* config);

/*
 * Runs a subcommand (solve, analyze-modulus, continuation, lemma-check,
 * verify, tail), writing artifacts under out_dir (NULL: the config's output
 * entry). The JSON summary is returned in *summary when summary is not NULL,
 * also when a contract fails (status SL_CONTRACT_FAILED).
 */
SL_API sl_status sl_run(const char* subcommand, const sl_config* config, const char* out_dir, int threads,
                        uint64_t seed, char** summary);

/* Solving and trajectory access. */
SL_API sl_status sl_solve(const sl_config* config, int threads, sl_trajectory** out);
SL_API size_t sl_trajectory_times(const sl_trajectory* traj);
SL_API size_t sl_trajectory_nodes(const sl_trajectory* traj);
SL_API sl_status sl_trajectory_time(const sl_trajectory* traj, size_t index, double* out);
/* Copies the field at a stored time into out[0..len), len == node count. */
SL_API sl_status sl_trajectory_field(const sl_trajectory* traj, size_t index, double* out, size_t len);
SL_API sl_status sl_trajectory_write(const sl_trajectory* traj, const char* dir);
SL_API sl_status sl_trajectory_read(const char* dir, sl_trajectory** out);
SL_API void sl_trajectory_free(sl_trajectory* traj);

/* Regularized enthalpy with the standard mollifier. */
SL_API sl_status sl_beta_eps(double epsilon, double xi, double* out);
SL_API sl_status sl_b(double epsilon, double xi, double* out);
SL_API sl_status sl_b_inverse(double epsilon, double y, double* out);

SL_API sl_status sl_lemma_iter_epsilon(double M2, double N2, double L2, double* out);

#ifdef __cplusplus
}
#endif

#endif
