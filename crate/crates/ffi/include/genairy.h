#ifndef GENAIRY_H
#define GENAIRY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum GenairyStatus {
  GenairyStatus_Ok = 0,
  GenairyStatus_NullPointer = 1,
  GenairyStatus_InvalidArgument = 2,
  GenairyStatus_BelowLambdaZero = 3,
  GenairyStatus_OverflowGuard = 4,
  GenairyStatus_NoConvergence = 5,
  GenairyStatus_Unsupported = 6,
  GenairyStatus_Internal = 7,
} GenairyStatus;

/**
 * Opaque handle to an immutable potential; free with
 * `genairy_potential_free`.
 */
typedef struct GenairyPotential GenairyPotential;

/**
 * Lambda-dependent scalars of the spectral analysis.
 */
typedef struct GenairyProfileData {
  double lambda;
  double x_lambda;
  double f_at_xlambda;
  double wprime_at_xlambda;
  double x_lambda_0;
  double delta_lambda;
  double upsilon1;
  double rho;
} GenairyProfileData;

/**
 * The four log-domain resolvent-norm estimates. `has_numeric` is 0 when
 * the overflow guard suppressed the discretized estimate (then
 * `log_numeric` is NaN).
 */
typedef struct GenairyResolventData {
  double lambda;
  double log_asymptotic;
  double log_schur_upper;
  double log_witness_lower;
  double log_numeric;
  int32_t has_numeric;
} GenairyResolventData;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a potential spec string (`pow:2`, `logpow:1.5`, `exppow:1`) into
 * a new handle written to `out`.
 *
 * # Safety
 * `spec` must point to a NUL-terminated string and `out` to a writable
 * pointer slot; nulls are reported, never dereferenced.
 */
enum GenairyStatus genairy_potential_parse(const char *spec, struct GenairyPotential **out);

/**
 * Release a handle produced by `genairy_potential_parse`. Null is a no-op.
 *
 * # Safety
 * `pot` must be null or a handle from `genairy_potential_parse` that has
 * not been freed already.
 */
void genairy_potential_free(struct GenairyPotential *pot);

/**
 * Evaluate (W, W', W'') at x.
 *
 * # Safety
 * `pot` must be a live handle; the three output pointers must be writable.
 */
enum GenairyStatus genairy_potential_eval(const struct GenairyPotential *pot,
                                          double x,
                                          double *w,
                                          double *w_prime,
                                          double *w_second);

/**
 * Turning point, action integral and window data at `lambda`.
 *
 * # Safety
 * `pot` must be a live handle and `out` writable.
 */
enum GenairyStatus genairy_profile(const struct GenairyPotential *pot,
                                   double lambda,
                                   struct GenairyProfileData *out);

/**
 * All four log-domain estimates of the resolvent norm at `lambda`.
 * Pass 0 for `points_per_rho` or `schur_grid_n` to take the defaults
 * (20 and 2000).
 *
 * # Safety
 * `pot` must be a live handle and `out` writable.
 */
enum GenairyStatus genairy_resolvent_estimate(const struct GenairyPotential *pot,
                                              double lambda,
                                              uint32_t points_per_rho,
                                              uint32_t schur_grid_n,
                                              uint64_t seed,
                                              struct GenairyResolventData *out);

/**
 * log of the closed-form resolvent norm of a built-in family.
 *
 * # Safety
 * `pot` must be a live handle and `out` writable.
 */
enum GenairyStatus genairy_closed_form_log_norm(const struct GenairyPotential *pot,
                                                double lambda,
                                                double *out);

/**
 * log ||S_t|| of the contraction semigroup.
 *
 * # Safety
 * `pot` must be a live handle and `out` writable.
 */
enum GenairyStatus genairy_semigroup_log_norm(const struct GenairyPotential *pot,
                                              double t,
                                              double *out);

/**
 * Static description string for a status code.
 */
const char *genairy_status_message(enum GenairyStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GENAIRY_H */
