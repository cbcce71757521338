#ifndef OPMONO_H
#define OPMONO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum OpmStatus {
  OPM_STATUS_OK = 0,
  OPM_STATUS_NULL_POINTER = 1,
  OPM_STATUS_INVALID_UTF8 = 2,
  OPM_STATUS_PARSE_ERROR = 3,
  OPM_STATUS_DOMAIN_ERROR = 4,
  OPM_STATUS_DIMENSION_ERROR = 5,
  OPM_STATUS_NO_CONVERGENCE = 6,
  OPM_STATUS_ORDER_VIOLATION = 7,
  OPM_STATUS_INVALID_ARGUMENT = 8,
  OPM_STATUS_PANIC = 9,
} OpmStatus;

/**
 * Parsed scalar function of `t`.
 */
typedef struct OpmFunction OpmFunction;

/**
 * Real symmetric matrix.
 */
typedef struct OpmMatrix OpmMatrix;

/**
 * Summary of a randomized check.
 */
typedef struct OpmVerdictSummary {
  /**
   * 0 holds within budget, 1 violated, 2 domain error.
   */
  int status;
  uint64_t trials_run;
  /**
   * Smallest trial margin, NaN if no trial finished.
   */
  double min_margin;
  /**
   * Margin of the witness, NaN if there is none.
   */
  double witness_margin;
} OpmVerdictSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *opm_last_error_message(void);

/**
 * Parses a function expression in `t`.
 *
 * # Safety
 * `src` must be a NUL-terminated string; `out` must be writable.
 */
enum OpmStatus opm_function_parse(const char *src, struct OpmFunction **out);

/**
 * # Safety
 * `f` must come from this library and not be freed already; NULL is ignored.
 */
void opm_function_free(struct OpmFunction *f);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum OpmStatus opm_function_eval(const struct OpmFunction *f, double t, double *out);

/**
 * Value and derivative at `t`.
 *
 * # Safety
 * `f` must be a live handle; both outputs must be writable.
 */
enum OpmStatus opm_function_eval_dual(const struct OpmFunction *f,
                                      double t,
                                      double *out_value,
                                      double *out_derivative);

/**
 * The companion `t / f(t)` as a new handle.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum OpmStatus opm_function_companion(const struct OpmFunction *f, struct OpmFunction **out);

/**
 * Builds an `n x n` matrix from `n * n` row-major entries (symmetrized).
 *
 * # Safety
 * `data` must point to `n * n` readable doubles; `out` must be writable.
 */
enum OpmStatus opm_matrix_new(size_t n, const double *data, struct OpmMatrix **out);

/**
 * # Safety
 * `m` must come from this library and not be freed already; NULL is ignored.
 */
void opm_matrix_free(struct OpmMatrix *m);

/**
 * Dimension of `m`, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t opm_matrix_dim(const struct OpmMatrix *m);

/**
 * Copies the `n * n` row-major entries into `out`.
 *
 * # Safety
 * `out` must have room for `len` doubles.
 */
enum OpmStatus opm_matrix_data(const struct OpmMatrix *m, double *out, size_t len);

/**
 * Eigenvalues in ascending order, and optionally the eigenvectors as the
 * columns of a row-major `n x n` array.
 *
 * # Safety
 * `values` must have room for `n` doubles; `vectors` must be NULL or have
 * room for `n * n` doubles.
 */
enum OpmStatus opm_matrix_eigen(const struct OpmMatrix *m, double *values, double *vectors);

/**
 * `f(A)` by spectral calculus; eigenvalues below `clamp` are raised to it
 * (pass `-INFINITY` to disable).
 *
 * # Safety
 * `f` and `a` must be live handles; `out` must be writable.
 */
enum OpmStatus opm_matrix_apply(const struct OpmFunction *f,
                                const struct OpmMatrix *a,
                                double clamp,
                                struct OpmMatrix **out);

/**
 * Frechet derivative of `f` at `a` in direction `c`.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum OpmStatus opm_frechet(const struct OpmFunction *f,
                           const struct OpmMatrix *a,
                           const struct OpmMatrix *c,
                           struct OpmMatrix **out);

/**
 * Powers-Stormer margin of `f` at `(a, b)` with default tolerances.
 * `weight` NULL means the canonical trace, otherwise `X -> trace(weight X)`
 * for a PSD weight. With `ordered` set, the reduced form for `a <= b` is
 * used and an unordered pair fails with `ORDER_VIOLATION`.
 *
 * # Safety
 * `f`, `a`, `b` must be live handles, `weight` NULL or live; `out` writable.
 */
enum OpmStatus opm_ps_margin(const struct OpmFunction *f,
                             const struct OpmMatrix *weight,
                             const struct OpmMatrix *a,
                             const struct OpmMatrix *b,
                             bool ordered,
                             double *out);

/**
 * Randomized n-monotonicity check on the default domain.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum OpmStatus opm_check_monotone(const struct OpmFunction *f,
                                  size_t n,
                                  uint64_t trials,
                                  uint64_t seed,
                                  struct OpmVerdictSummary *out);

/**
 * Runs the command line with `argv[0..argc]` (without a program name) and
 * returns its exit code. The JSON report and diagnostics are returned as
 * new strings to be released with [`opm_string_free`]; either output
 * pointer may be NULL. Returns -1 if an argument is NULL or not UTF-8.
 *
 * # Safety
 * `argv` must hold `argc` NUL-terminated strings.
 */
int opm_cli_run(int argc, const char *const *argv, char **out_stdout, char **out_stderr);

/**
 * Releases a string returned by this library; NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed already.
 */
void opm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPMONO_H */
