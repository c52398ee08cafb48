#ifndef RISKBOUND_H
#define RISKBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_UTF8 = 2,
  // Malformed document or missing field.
  RB_STATUS_SCHEMA = 3,
  // Chain or family fails validation, or an argument is out of range.
  RB_STATUS_VALIDATION = 4,
  // Input violates a mathematical precondition (sign, structure, rank).
  RB_STATUS_DOMAIN = 5,
  RB_STATUS_NUMERICAL = 6,
  RB_STATUS_DIVERGED = 7,
  RB_STATUS_PANIC = 8,
} RbStatus;

typedef enum RbAlgorithm {
  RB_ALGORITHM_AVG = 0,
  RB_ALGORITHM_LSPE = 1,
  RB_ALGORITHM_TD = 2,
} RbAlgorithm;

// Parsed problem: a document plus its chain and features when present.
typedef struct RbProblem RbProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread; do not free.
const char *rb_last_error_message(void);

// Parses a problem document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer. On
// success `*out` owns a handle to release with [`rb_problem_free`].
enum RbStatus rb_problem_from_json(const char *json, struct RbProblem **out);

// # Safety
// `problem` must be null or a handle from [`rb_problem_from_json`] not yet freed.
void rb_problem_free(struct RbProblem *problem);

// Perron value `λ` of the problem's `C∘P`.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum RbStatus rb_lambda(const struct RbProblem *problem, double *out);

// Spectral radius `μ` of the projected matrix `Π(C∘P)`.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum RbStatus rb_mu(const struct RbProblem *problem, double *out);

// Full analysis report as a JSON string, released with [`rb_string_free`].
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum RbStatus rb_analyze_json(const struct RbProblem *problem, char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void rb_string_free(char *s);

// Perron value of an irreducible nonnegative `n × n` row-major matrix.
//
// # Safety
// `data` must point to `n * n` readable doubles and `out` be a valid pointer.
enum RbStatus rb_perron_value(const double *data, size_t n, double *out);

// Runs one recursion with the default schedule. `*out_target` is NaN when no
// target is certified (TD without `ΦΦᵀ = D⁻¹`).
//
// # Safety
// `problem` must be a live handle; `out_final` and `out_target` valid pointers.
enum RbStatus rb_simulate(const struct RbProblem *problem,
                          enum RbAlgorithm algorithm,
                          size_t horizon,
                          uint64_t seed,
                          double *out_final,
                          double *out_target);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKBOUND_H */
