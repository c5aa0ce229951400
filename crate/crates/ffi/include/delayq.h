#ifndef DELAYQ_H
#define DELAYQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define DQ_MODEL_CONSTANT 0

#define DQ_MODEL_MOVING_AVERAGE 1

#define DQ_REGIME_SYNCHRONIZED 0

#define DQ_REGIME_OSCILLATORY 1

#define DQ_REGIME_INCONCLUSIVE 2

typedef enum DqStatus {
  DQ_STATUS_OK = 0,
  DQ_STATUS_NULL_POINTER = 1,
  DQ_STATUS_PRECONDITION = 2,
  DQ_STATUS_DOMAIN = 3,
  DQ_STATUS_NUMERICAL_FAILURE = 4,
  DQ_STATUS_OUT_OF_RANGE = 5,
  DQ_STATUS_NON_CONVERGENCE = 6,
  DQ_STATUS_SINGULAR_DERIVATIVE = 7,
  DQ_STATUS_IO = 8,
  /**
   * No Hopf bifurcation exists for the given rates.
   */
  DQ_STATUS_NO_HOPF = 9,
  /**
   * The output buffer is smaller than the reported count.
   */
  DQ_STATUS_BUFFER_TOO_SMALL = 10,
  DQ_STATUS_PANIC = 11,
} DqStatus;

/**
 * Opaque trajectory handle.
 */
typedef struct DqTrajectory DqTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; empty if none has failed.
 */
const char *dq_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *dq_version(void);

/**
 * Integrates one scenario on `[0, horizon]`.
 *
 * `step <= 0` or NaN selects the default step. `phi` is either null (default
 * histories `1.1 q*`, `0.9 q*`) or points to two constant history values.
 *
 * # Safety
 * `phi` must be null or valid for two reads; `out` must be valid for one write.
 */
enum DqStatus dq_simulate(uint32_t model,
                          double lambda,
                          double mu,
                          double delta,
                          double horizon,
                          double step,
                          const double *phi,
                          struct DqTrajectory **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle from [`dq_simulate`] not yet freed.
 */
void dq_trajectory_free(struct DqTrajectory *h);

/**
 * Number of grid nodes, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t dq_trajectory_node_count(const struct DqTrajectory *h);

/**
 * State dimension (2 or 4), or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t dq_trajectory_dimension(const struct DqTrajectory *h);

/**
 * Effective step after lag alignment, or NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
double dq_trajectory_step(const struct DqTrajectory *h);

/**
 * Copies node times and row-major states into caller buffers. `times`
 * needs `node_count` slots and `states` `node_count * dimension`; either
 * may be null to skip it.
 *
 * # Safety
 * `h` must be a live handle and each non-null buffer valid for the given length.
 */
enum DqStatus dq_trajectory_copy(const struct DqTrajectory *h,
                                 double *times,
                                 size_t times_len,
                                 double *states,
                                 size_t states_len);

/**
 * Dense-output state at `t` in `[-delta, horizon]`.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for `len` writes.
 */
enum DqStatus dq_trajectory_eval(const struct DqTrajectory *h, double t, double *out, size_t len);

/**
 * Classifies the long-run regime with the default thresholds for the
 * scenario's equilibrium. `growing` may be null.
 *
 * # Safety
 * `h` must be a live handle; `regime` and `amplitude` valid for one write;
 * `growing` null or valid for one write.
 */
enum DqStatus dq_classify(const struct DqTrajectory *h,
                          uint32_t *regime,
                          double *amplitude,
                          bool *growing);

/**
 * Critical delay and Hopf frequency of the constant-delay model. Returns
 * [`DqStatus::NoHopf`] when `lambda <= 2 mu`.
 *
 * # Safety
 * `delta_cr` and `omega` must be valid for one write.
 */
enum DqStatus dq_critical_delay_constant(double lambda, double mu, double *delta_cr, double *omega);

/**
 * Validated critical delays of the moving-average model in increasing
 * order. A NaN bound selects the default scan interval. `count` receives
 * the number of points found; if it exceeds `capacity` the first
 * `capacity` are written and [`DqStatus::BufferTooSmall`] is returned.
 *
 * # Safety
 * `delta_cr` and `omega` must be valid for `capacity` writes (or null when
 * `capacity` is 0); `count` valid for one write.
 */
enum DqStatus dq_critical_delay_ma(double lambda,
                                   double mu,
                                   double bracket_lo,
                                   double bracket_hi,
                                   double *delta_cr,
                                   double *omega,
                                   size_t capacity,
                                   size_t *count);

/**
 * Newton refinement of a characteristic root from `seed`.
 *
 * # Safety
 * `re` and `im` must be valid for one write.
 */
enum DqStatus dq_root_track(uint32_t model,
                            double lambda,
                            double mu,
                            double delta,
                            double seed_re,
                            double seed_im,
                            double *re,
                            double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELAYQ_H */
