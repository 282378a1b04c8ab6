#ifndef SCHOENLOC_H
#define SCHOENLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlRegime {
  SL_REGIME_DISTRIBUTED = 0,
  SL_REGIME_CONCENTRATED = 1,
  SL_REGIME_BOUNDARY = 2,
} SlRegime;

/**
 * Status codes returned by every fallible function.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_SIZE_MISMATCH = 3,
  SL_STATUS_NON_EUCLIDEAN = 4,
  SL_STATUS_PARSE = 5,
  SL_STATUS_NOT_APPLICABLE = 6,
  /**
   * The buffer handed in is shorter than the data to copy.
   */
  SL_STATUS_BUFFER_TOO_SMALL = 7,
  SL_STATUS_PANIC = 8,
} SlStatus;

/**
 * Distances, weights and (for point input) coordinates.
 */
typedef struct SlDataset SlDataset;

typedef struct SlResult SlResult;

typedef struct SlTransform SlTransform;

/**
 * Solver settings; obtain defaults from [`sl_options_default`].
 */
typedef struct SlOptions {
  double tol_alpha;
  double tol_objective;
  size_t max_iter;
  uint32_t max_halvings;
  uint64_t seed;
  /**
   * Non-zero to run the default multi-start set and keep the best minimum.
   */
  int32_t multi_start;
} SlOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

struct SlOptions sl_options_default(void);

/**
 * Builds a dataset from an `n × n` row-major squared distance matrix.
 * `w` may be null for uniform weights; otherwise it is normalised.
 *
 * # Safety
 * `d` must point to `n * n` doubles and `w` to `n` doubles (or be null).
 */
enum SlStatus sl_dataset_from_distances(const double *d,
                                        size_t n,
                                        const double *w,
                                        struct SlDataset **out);

/**
 * Builds a dataset from `n` points in `p` dimensions, row-major.
 *
 * # Safety
 * `x` must point to `n * p` doubles and `w` to `n` doubles (or be null).
 */
enum SlStatus sl_dataset_from_points(const double *x,
                                     size_t n,
                                     size_t p,
                                     const double *w,
                                     struct SlDataset **out);

/**
 * Merges tied observations in place (relative threshold `eps_tie`).
 *
 * # Safety
 * `ds` must be a live handle.
 */
enum SlStatus sl_dataset_aggregate(struct SlDataset *ds, double eps_tie);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t sl_dataset_len(const struct SlDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void sl_dataset_free(struct SlDataset *ds);

/**
 * Parses a transformation such as `power:q=0.7` or `exp:delta=2`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string.
 */
enum SlStatus sl_transform_parse(const char *spec, struct SlTransform **out);

/**
 * Writes `φ(d)` to `out`.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum SlStatus sl_transform_phi(const struct SlTransform *t, double d, double *out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void sl_transform_free(struct SlTransform *t);

/**
 * Estimates the location of `ds` under `t`. `opts` may be null for
 * defaults. A run that stops without converging still returns `SL_STATUS_OK`;
 * query [`sl_result_converged`].
 *
 * # Safety
 * `ds` and `t` must be live handles; `opts` null or readable.
 */
enum SlStatus sl_estimate(const struct SlDataset *ds,
                          const struct SlTransform *t,
                          const struct SlOptions *opts,
                          struct SlResult **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void sl_result_free(struct SlResult *r);

/**
 * Transformed inertia at the estimate; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double sl_result_gamma(const struct SlResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
double sl_result_entropy(const struct SlResult *r);

/**
 * Strain, or NaN when undefined.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double sl_result_strain(const struct SlResult *r);

/**
 * 1 when converged, 0 otherwise (including null).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t sl_result_converged(const struct SlResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
size_t sl_result_iterations(const struct SlResult *r);

/**
 * Writes the regime and, for a concentrated estimate, the 0-based index of
 * the observation (`SIZE_MAX` otherwise).
 *
 * # Safety
 * `r` must be a live handle; `regime` and `index` writable.
 */
enum SlStatus sl_result_regime(const struct SlResult *r, enum SlRegime *regime, size_t *index);

/**
 * Copies the profile `α` into `buf` (capacity `len`).
 *
 * # Safety
 * `r` must be a live handle and `buf` writable for `len` doubles.
 */
enum SlStatus sl_result_alpha(const struct SlResult *r, double *buf, size_t len);

/**
 * Copies the centroid coordinates (point datasets only) into `buf`.
 *
 * # Safety
 * Handles must be live and `buf` writable for `len` doubles.
 */
enum SlStatus sl_result_centroid(const struct SlDataset *ds,
                                 const struct SlResult *r,
                                 double *buf,
                                 size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHOENLOC_H */
