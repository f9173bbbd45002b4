#ifndef WLE_H
#define WLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Passing a value outside the listed constants is undefined behaviour.
 */
typedef enum {
  WLE_MODEL_POISSON = 0,
  WLE_MODEL_EXPONENTIAL = 1,
  WLE_MODEL_NORMAL = 2,
} WleModel;

typedef enum {
  WLE_STATUS_OK = 0,
  WLE_STATUS_NULL_POINTER = 1,
  WLE_STATUS_DOMAIN = 2,
  WLE_STATUS_INVALID_SPEC = 3,
  WLE_STATUS_INVALID_CONFIG = 4,
  WLE_STATUS_NUMERIC = 5,
  WLE_STATUS_NOT_FOUND = 6,
  WLE_STATUS_OUT_OF_RANGE = 7,
  WLE_STATUS_PANIC = 8,
  WLE_STATUS_OTHER = 9,
} WleStatus;

/**
 * Passing a value outside the listed constants is undefined behaviour.
 */
typedef enum {
  WLE_WEIGHT_KIND_GAMMA = 0,
  WLE_WEIGHT_KIND_WEIBULL = 1,
  WLE_WEIGHT_KIND_GEV = 2,
  WLE_WEIGHT_KIND_SCALED_F = 3,
} WleWeightKind;

/**
 * Roots of one fit, heaviest weight sum first.
 */
typedef struct WleFit WleFit;

/**
 * `a` is α, k, ξ or d₁ by kind; `b` is d₂ and ignored otherwise.
 */
typedef struct {
  WleWeightKind kind;
  double a;
  double b;
} WleWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * w(τ) for a weight specification.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
WleStatus wle_weight_eval(WleWeight weight, double tau, double *out);

/**
 * Single root of a univariate model, iterated from the MLE.
 *
 * # Safety
 * `data` must hold `n` doubles and `out` must be writable. On success
 * `*out` owns a handle for [`wle_fit_free`].
 */
WleStatus wle_fit_univariate(WleModel model,
                             const double *data,
                             size_t n,
                             WleWeight weight,
                             double p,
                             WleFit **out);

/**
 * Bootstrap search over `restarts` subsamples of size `subsample`.
 *
 * # Safety
 * As for [`wle_fit_univariate`].
 */
WleStatus wle_roots_univariate(WleModel model,
                               const double *data,
                               size_t n,
                               WleWeight weight,
                               double p,
                               size_t restarts,
                               size_t subsample,
                               uint64_t seed,
                               WleFit **out);

/**
 * Bootstrap search for y = β₀ + β₁x + ε; roots are (β₀, β₁, σ).
 *
 * # Safety
 * `x` and `y` must each hold `n` doubles; `out` must be writable.
 */
WleStatus wle_roots_regression(const double *x,
                               const double *y,
                               size_t n,
                               WleWeight weight,
                               size_t restarts,
                               size_t subsample,
                               uint64_t seed,
                               WleFit **out);

/**
 * Number of distinct roots; 0 for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t wle_fit_root_count(const WleFit *fit);

/**
 * Parameter dimension; 0 for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t wle_fit_dim(const WleFit *fit);

/**
 * Index of the root chosen by the selection rule.
 *
 * # Safety
 * `fit` must be a live handle and `out` writable.
 */
WleStatus wle_fit_selected(const WleFit *fit, size_t *out);

/**
 * Copies root `index` into `theta` (capacity `len`) and its weight sum.
 * `weight_sum` may be null.
 *
 * # Safety
 * `fit` must be a live handle, `theta` must hold `len` doubles.
 */
WleStatus wle_fit_root(const WleFit *fit,
                       size_t index,
                       double *theta,
                       size_t len,
                       double *weight_sum);

/**
 * # Safety
 * `fit` must be null or a handle not yet freed.
 */
void wle_fit_free(WleFit *fit);

/**
 * Reruns a published table; `*pass` is 1 when every comparison holds.
 *
 * # Safety
 * `table_id` must be a NUL-terminated string and `pass` writable.
 */
WleStatus wle_reproduce_table(const char *table_id, int *pass);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *wle_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WLE_H */
