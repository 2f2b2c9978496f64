#ifndef CIRCQ_H
#define CIRCQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CircqStatus {
  CIRCQ_STATUS_OK = 0,
  CIRCQ_STATUS_NULL_ARGUMENT = 1,
  CIRCQ_STATUS_INVALID_UTF8 = 2,
  CIRCQ_STATUS_SPEC_ERROR = 3,
  CIRCQ_STATUS_SAMPLING_ERROR = 4,
  CIRCQ_STATUS_INVALID_OPTIONS = 5,
  CIRCQ_STATUS_EVAL_ERROR = 6,
  CIRCQ_STATUS_PANIC = 7,
} CircqStatus;

/**
 * Conditions reported by a classification.
 */
typedef enum CircqClass {
  CIRCQ_CLASS_W0 = 0,
  CIRCQ_CLASS_W1 = 1,
  CIRCQ_CLASS_W2 = 2,
  CIRCQ_CLASS_W3 = 3,
  CIRCQ_CLASS_FS = 4,
} CircqClass;

/**
 * Classification outcome for one class.
 */
typedef enum CircqVerdict {
  CIRCQ_VERDICT_HOLDS = 0,
  CIRCQ_VERDICT_FAILS = 1,
  CIRCQ_VERDICT_INDETERMINATE = 2,
} CircqVerdict;

/**
 * The result of a classification run.
 */
typedef struct CircqReport CircqReport;

/**
 * A loaded manifold spec.
 */
typedef struct CircqSpec CircqSpec;

/**
 * Run settings. Zero `n_points`, zero `tol` and zero `threads` select the
 * spec's `[run]` value or the built-in default.
 */
typedef struct CircqOptions {
  size_t n_points;
  uint64_t seed;
  double tol;
  bool check_identities;
  size_t threads;
} CircqOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *circq_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *circq_version(void);

/**
 * Default options: 50 points, seed 0, default tolerance, identities on.
 */
struct CircqOptions circq_options_default(void);

/**
 * Parses a spec document (TOML text).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CircqStatus circq_spec_from_str(const char *text, struct CircqSpec **out);

/**
 * Loads a spec file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CircqStatus circq_spec_from_file(const char *path, struct CircqSpec **out);

/**
 * Builds a circulant spec `g = circ(A, B, C, B)` from three expressions.
 * `domain` is either null (the cube `[-1, 1]^4`) or 8 values
 * `min1, max1, ..., min4, max4`.
 *
 * # Safety
 * String arguments must be NUL-terminated, `domain` null or readable for 8
 * doubles, and `out` a valid pointer.
 */
enum CircqStatus circq_spec_circulant(const char *label,
                                      const char *a,
                                      const char *b,
                                      const char *c,
                                      const double *domain,
                                      struct CircqSpec **out);

/**
 * Releases a spec. Null is ignored.
 *
 * # Safety
 * `spec` must be null or a handle from this library not yet freed.
 */
void circq_spec_free(struct CircqSpec *spec);

/**
 * Samples the spec and classifies it. `options` may be null for defaults.
 *
 * # Safety
 * `spec` must be a live handle, `options` null or valid, `out` a valid pointer.
 */
enum CircqStatus circq_classify(const struct CircqSpec *spec,
                                const struct CircqOptions *options,
                                struct CircqReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void circq_report_free(struct CircqReport *report);

/**
 * Verdict for one class.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum CircqStatus circq_report_verdict(const struct CircqReport *report,
                                      enum CircqClass class_,
                                      enum CircqVerdict *out);

/**
 * Largest normalized residual of one class condition over all points.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum CircqStatus circq_report_max_residual(const struct CircqReport *report,
                                           enum CircqClass class_,
                                           double *out);

/**
 * Number of sampled points in the report.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t circq_report_point_count(const struct CircqReport *report);

/**
 * The machine-readable (JSON) report. Free the result with
 * [`circq_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum CircqStatus circq_report_to_machine(const struct CircqReport *report, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void circq_string_free(char *s);

/**
 * Parses and evaluates an expression in `x1..x4` at `point` (4 doubles).
 *
 * # Safety
 * `expr` must be NUL-terminated, `point` readable for 4 doubles and `out`
 * a valid pointer.
 */
enum CircqStatus circq_expr_eval(const char *expr, const double *point, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCQ_H */
