#ifndef SIS_EXTINCTION_H
#define SIS_EXTINCTION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SisStatus {
  SIS_STATUS_OK = 0,
  SIS_STATUS_NULL_POINTER = 1,
  SIS_STATUS_DOMAIN = 2,
  SIS_STATUS_SINGULAR = 3,
  SIS_STATUS_COST_GUARD = 4,
  SIS_STATUS_CENSORING = 5,
  SIS_STATUS_USAGE = 6,
  SIS_STATUS_IO = 7,
  SIS_STATUS_BUFFER_TOO_SMALL = 8,
  SIS_STATUS_PANIC = 9,
} SisStatus;

typedef enum SisFormula {
  SIS_FORMULA_GENERAL = 0,
  SIS_FORMULA_INTERMEDIATE = 1,
  SIS_FORMULA_LOW = 2,
  SIS_FORMULA_HIGH = 3,
} SisFormula;

/**
 * Model parameters `(N, lambda, mu)`.
 */
typedef struct SisModel SisModel;

/**
 * Extinction times from [`sis_run_batch`].
 */
typedef struct SisSampleSet SisSampleSet;

/**
 * Gumbel law of `(mu - lambda) T - centering`.
 */
typedef struct SisPrediction {
  double centering;
  double scale;
  double predicted_mean;
} SisPrediction;

typedef struct SisGofReport {
  double ks_distance;
  double sample_mean;
  double sample_sd;
  double predicted_mean;
  uint64_t n;
} SisGofReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length
 * including the terminator, or 0 if there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t sis_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sis_version(void);

/**
 * Creates a model handle.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum SisStatus sis_model_new(uint64_t big_n, double lambda, double mu, struct SisModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from [`sis_model_new`] and not be used afterwards.
 */
void sis_model_free(struct SisModel *model);

/**
 * Gumbel prediction for starting state `x0`; `formula` is a `SisFormula`.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writing.
 */
enum SisStatus sis_predict(const struct SisModel *model,
                           uint64_t x0,
                           uint32_t formula,
                           struct SisPrediction *out);

/**
 * Exact mean extinction time from `x0`.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writing.
 */
enum SisStatus sis_exact_mean(const struct SisModel *model, uint64_t x0, double *out);

/**
 * Extinction CDF at time `t` of the linear chain with the model's rates,
 * started from `x_star`.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writing.
 */
enum SisStatus sis_linear_extinction_cdf(const struct SisModel *model,
                                         uint64_t x_star,
                                         double t,
                                         double *out);

/**
 * Simulates `n` extinction times from `x0` (replicate `i` uses stream `i`
 * of `seed`). `threads == 0` uses the default pool; the value never
 * changes results.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writing one pointer.
 */
enum SisStatus sis_run_batch(const struct SisModel *model,
                             uint64_t x0,
                             uint64_t n,
                             uint64_t seed,
                             double t_max,
                             size_t threads,
                             struct SisSampleSet **out);

/**
 * Number of replicates, censored ones included. Returns 0 for null.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t sis_sample_set_len(const struct SisSampleSet *set);

/**
 * Number of censored replicates. Returns 0 for null.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
uint64_t sis_sample_set_censored(const struct SisSampleSet *set);

/**
 * Copies one extinction time per replicate, in stream order, into `buf`;
 * censored replicates are written as NaN. `len` must be at least
 * [`sis_sample_set_len`].
 *
 * # Safety
 * `set` must be a live handle and `buf` valid for `len` doubles.
 */
enum SisStatus sis_sample_set_copy(const struct SisSampleSet *set, double *buf, size_t len);

/**
 * Releases a sample set. Null is ignored.
 *
 * # Safety
 * `set` must come from [`sis_run_batch`] and not be used afterwards.
 */
void sis_sample_set_free(struct SisSampleSet *set);

/**
 * KS distance of the normalized sample against the standard Gumbel law,
 * normalizing with `formula` (a `SisFormula`). Fails with `SIS_STATUS_CENSORING` when too
 * many replicates were censored.
 *
 * # Safety
 * `set` must be a live handle; `out` valid for writing.
 */
enum SisStatus sis_ks_vs_gumbel(const struct SisSampleSet *set,
                                uint32_t formula,
                                struct SisGofReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIS_EXTINCTION_H */
