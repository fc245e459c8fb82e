#ifndef MINUSORDER_H
#define MINUSORDER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MoStatus {
  MO_STATUS_OK = 0,
  MO_STATUS_NULL_POINTER = 1,
  MO_STATUS_INVALID_ARGUMENT = 2,
  MO_STATUS_SHAPE_MISMATCH = 3,
  /**
   * Not symmetric, not PSD/PD, or a conic outside its allowed region.
   */
  MO_STATUS_INVALID_MATRIX = 4,
  /**
   * A point or parameter outside the domain of a geometric map.
   */
  MO_STATUS_OUT_OF_DOMAIN = 5,
  MO_STATUS_PARSE = 6,
  MO_STATUS_NUMERICAL = 7,
  /**
   * A recovery pipeline stage rejected the map.
   */
  MO_STATUS_PIPELINE_FAILURE = 8,
  MO_STATUS_PANIC = 9,
} MoStatus;

/**
 * Which characterization of the minus order to evaluate.
 */
typedef enum MoOrderMethod {
  MO_ORDER_METHOD_RANK_SUBTRACTIVITY = 0,
  MO_ORDER_METHOD_IMAGE_DIRECT_SUM = 1,
  MO_ORDER_METHOD_INNER_INVERSE = 2,
} MoOrderMethod;

/**
 * Opaque dense matrix.
 */
typedef struct MoMatrix MoMatrix;

/**
 * Tolerances; `mo_policy_default` gives the library defaults.
 */
typedef struct MoPolicy {
  double rank_rel_tol;
  double sym_abs_tol;
  double psd_eig_tol;
} MoPolicy;

/**
 * Ellipse at angle `phi` touching the unit circle and an inner conic.
 */
typedef struct MoTouching {
  double r;
  double q11;
  double q12;
  double q22;
  double touch_x;
  double touch_y;
} MoTouching;

/**
 * Black-box map on `n x n` matrices: reads `input` and writes `output`,
 * both row-major with `n * n` entries. Called concurrently from several
 * threads, so it must be thread safe.
 */
typedef void (*MoMapFn)(void *user_data, size_t n, const double *input, double *output);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *mo_last_error_message(void);

/**
 * Stage label of the last pipeline failure on this thread, or null.
 */
const char *mo_last_error_stage(void);

void mo_clear_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mo_version(void);

struct MoPolicy mo_policy_default(void);

/**
 * Copies `rows * cols` row-major entries into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles (it may be null when
 * that product is zero); `out` must be writable.
 */
enum MoStatus mo_matrix_new(size_t rows, size_t cols, const double *data, struct MoMatrix **out);

/**
 * Parses the text (`rows cols` header then rows) or JSON matrix format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum MoStatus mo_matrix_parse(const char *text, struct MoMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void mo_matrix_free(struct MoMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t mo_matrix_rows(const struct MoMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t mo_matrix_cols(const struct MoMatrix *m);

/**
 * Writes the entries row-major into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a live handle and `buf` must hold `len` writable doubles.
 */
enum MoStatus mo_matrix_copy_data(const struct MoMatrix *m, double *buf, size_t len);

/**
 * Numerical rank under `policy` (null for defaults).
 *
 * # Safety
 * `m` must be a live handle, `policy` null or readable, `out` writable.
 */
enum MoStatus mo_rank(const struct MoMatrix *m, const struct MoPolicy *policy, size_t *out);

/**
 * Moore-Penrose inverse as a new handle.
 *
 * # Safety
 * `m` must be a live handle, `policy` null or readable, `out` writable.
 */
enum MoStatus mo_pinv(const struct MoMatrix *m,
                      const struct MoPolicy *policy,
                      struct MoMatrix **out);

/**
 * Decides `A <=- B` with the chosen predicate.
 *
 * # Safety
 * `a`, `b` must be live handles, `policy` null or readable, `out` writable.
 */
enum MoStatus mo_minus_leq(const struct MoMatrix *a,
                           const struct MoMatrix *b,
                           enum MoOrderMethod method,
                           const struct MoPolicy *policy,
                           bool *out);

/**
 * Touching ellipse at angle `phi` for the conic `q11 x^2 + 2 q12 xy + q22 y^2 = 1`,
 * which must lie inside the unit circle.
 *
 * # Safety
 * `out` must be writable.
 */
enum MoStatus mo_touching_ellipse(double q11,
                                  double q12,
                                  double q22,
                                  double phi,
                                  struct MoTouching *out);

/**
 * The planar rigidity map, or its inverse when `inverse` is set.
 *
 * # Safety
 * `out_x`, `out_y` must be writable.
 */
enum MoStatus mo_phi_hat(double a0,
                         double gamma,
                         double x,
                         double y,
                         bool inverse,
                         double *out_x,
                         double *out_y);

/**
 * Runs the recovery pipeline on a caller-supplied map of `n x n`
 * matrices. On success `out` receives `S` with `map(A) = S A S^T`, up to
 * sign. On failure the status is `PipelineFailure` and
 * `mo_last_error_stage` names the rejecting stage.
 *
 * # Safety
 * `map` must be callable as documented on `MoMapFn`, concurrently, with
 * `user_data`; `policy` null or readable; `out` writable.
 */
enum MoStatus mo_recover_congruence(size_t n,
                                    MoMapFn map,
                                    void *user_data,
                                    uint64_t seed,
                                    const struct MoPolicy *policy,
                                    struct MoMatrix **out);

/**
 * Builds the congruence `A -> S A S^T` and recovers `S` from it; a
 * self-check of the pipeline for a known `S`.
 *
 * # Safety
 * `s` must be a live handle, `policy` null or readable, `out` writable.
 */
enum MoStatus mo_recover_known_congruence(const struct MoMatrix *s,
                                          uint64_t seed,
                                          const struct MoPolicy *policy,
                                          struct MoMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINUSORDER_H */
