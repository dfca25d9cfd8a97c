#ifndef QGRAD_H
#define QGRAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QgradCostModel {
  QGRAD_COST_MODEL_EXACT_SIM = 0,
  QGRAD_COST_MODEL_PAPER_MODEL = 1,
} QgradCostModel;

/**
 * Result code of every fallible call.
 */
typedef enum QgradStatus {
  QGRAD_STATUS_OK = 0,
  QGRAD_STATUS_INVALID_ARGUMENT = 1,
  QGRAD_STATUS_NULL_POINTER = 2,
  QGRAD_STATUS_RESOURCE_GUARD = 3,
  QGRAD_STATUS_OUTSIDE_DOMAIN = 4,
  QGRAD_STATUS_ORACLE_RANGE = 5,
  QGRAD_STATUS_MISSING_GRADIENT = 6,
  QGRAD_STATUS_INDEX_OUT_OF_RANGE = 7,
  QGRAD_STATUS_BUFFER_TOO_SMALL = 8,
  QGRAD_STATUS_IO = 9,
  QGRAD_STATUS_PANIC = 10,
} QgradStatus;

/**
 * Opaque objective function.
 */
typedef struct QgradObjective QgradObjective;

/**
 * Opaque central-difference scheme.
 */
typedef struct QgradScheme QgradScheme;

/**
 * Schedule of the estimator for one parameter set.
 */
typedef struct QgradConstants {
  double eps_prime;
  uint32_t m;
  double r;
  uint64_t s;
  uint32_t n;
  uint32_t big_n;
  double delta;
} QgradConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (empty after a
 * successful call). Returns the size needed including the terminator; the
 * message is truncated when `len` is smaller.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t qgrad_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qgrad_version(void);

/**
 * Builds the order-2m central-difference scheme.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QgradStatus qgrad_scheme_new(uint32_t m, struct QgradScheme **out);

/**
 * # Safety
 * `scheme` must be null or a handle from [`qgrad_scheme_new`] not yet freed.
 */
void qgrad_scheme_free(struct QgradScheme *scheme);

/**
 * Number of coefficients, 2m+1; 0 for a null handle.
 *
 * # Safety
 * `scheme` must be null or a live handle.
 */
size_t qgrad_scheme_len(const struct QgradScheme *scheme);

/**
 * Coefficient `a_l` rounded to double.
 *
 * # Safety
 * `scheme` must be a live handle and `out` valid for one write.
 */
enum QgradStatus qgrad_scheme_coefficient(const struct QgradScheme *scheme, int64_t l, double *out);

/**
 * Exact coefficient `a_l` as `"num/den"` (or an integer).
 *
 * # Safety
 * `scheme` must be a live handle, `buf` null or valid for `len` writes,
 * `required` null or valid for one write.
 */
enum QgradStatus qgrad_scheme_coefficient_string(const struct QgradScheme *scheme,
                                                 int64_t l,
                                                 char *buf,
                                                 size_t len,
                                                 size_t *required);

/**
 * Test-family member with signs `signs[0..d]` (each ±1).
 *
 * # Safety
 * `signs` must be valid for `d` reads and `out` for one write.
 */
enum QgradStatus qgrad_test_function_new(size_t d,
                                         double c,
                                         double eps,
                                         const int8_t *signs,
                                         struct QgradObjective **out);

/**
 * Objective backed by a C callback. `gradient` (may be null) is the reference
 * gradient at the origin, needed by success-rate checks. The callback is
 * invoked concurrently from worker threads and must be thread-safe;
 * `user_data` must outlive the handle.
 *
 * # Safety
 * `gradient` must be null or valid for `dim` reads, `out` for one write.
 */
enum QgradStatus qgrad_objective_from_callback(size_t dim,
                                               double c,
                                               double sigma,
                                               double (*callback)(const double *x,
                                                                  size_t dim,
                                                                  void *user_data),
                                               void *user_data,
                                               const double *gradient,
                                               struct QgradObjective **out);

/**
 * # Safety
 * `f` must be null or a live objective handle.
 */
void qgrad_objective_free(struct QgradObjective *f);

/**
 * # Safety
 * `f` must be a live handle, `x` valid for `len` reads, `out` for one write.
 */
enum QgradStatus qgrad_objective_evaluate(const struct QgradObjective *f,
                                          const double *x,
                                          size_t len,
                                          double *out);

/**
 * Derived constants for `(σ, c, p, d, ε)`; `p = INFINITY` selects the max norm.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QgradStatus qgrad_derive_constants(double sigma,
                                        double c,
                                        double p,
                                        size_t d,
                                        double eps,
                                        struct QgradConstants *out);

/**
 * One full run. Writes the estimate into `estimate[0..dim]` and the base
 * oracle calls into `base_calls` (may be null).
 *
 * # Safety
 * `f` must be a live handle, `estimate` valid for `estimate_len` writes,
 * `base_calls` null or valid for one write.
 */
enum QgradStatus qgrad_run_qge(const struct QgradObjective *f,
                               double sigma,
                               double c,
                               double p,
                               double eps,
                               uint64_t seed,
                               enum QgradCostModel cost_model,
                               bool perturb,
                               double *estimate,
                               size_t estimate_len,
                               uint64_t *base_calls);

/**
 * Probability mass within 4 of the peak after the inverse QFT of a linear phase.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QgradStatus qgrad_qft_peak_probability(uint32_t n, double a, double *out);

/**
 * Lower bound for p = 1; requires `eps < c/146`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QgradStatus qgrad_lower_bound_p1(size_t d, double c, double eps, double *out);

/**
 * General lower bound at success probability `big_p`. `n_boost` (may be null)
 * receives the repetition count used.
 *
 * # Safety
 * `out` must be valid for one write, `n_boost` null or valid for one write.
 */
enum QgradStatus qgrad_lower_bound_general(size_t d,
                                           double c,
                                           double eps,
                                           double p,
                                           double big_p,
                                           double *out,
                                           uint64_t *n_boost);

/**
 * Majority search over `count` samples stored row-major (`count × dim`).
 * Writes `dim` values to `out`.
 *
 * # Safety
 * `samples` must be valid for `count·dim` reads, `out` for `dim` writes.
 */
enum QgradStatus qgrad_boost_samples(const double *samples,
                                     size_t count,
                                     size_t dim,
                                     double eps,
                                     double p,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QGRAD_H */
