#ifndef WPDUALITY_H
#define WPDUALITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WpdStatus {
  WPD_STATUS_OK = 0,
  WPD_STATUS_NULL_POINTER = 1,
  WPD_STATUS_INVALID_STATE = 2,
  WPD_STATUS_INVALID_ARGUMENT = 3,
  WPD_STATUS_ESTIMATION_FAILED = 4,
  WPD_STATUS_PANIC = 5,
} WpdStatus;

typedef enum WpdConvention {
  WPD_CONVENTION_APPENDIX = 0,
  WPD_CONVENTION_MAIN_TEXT = 1,
} WpdConvention;

/**
 * Simulated or loaded coincidence records.
 */
typedef struct WpdCounts WpdCounts;

/**
 * A validated qubit density matrix.
 */
typedef struct WpdDensity WpdDensity;

/**
 * Capacities in units of `E`.
 */
typedef struct WpdCapacities {
  double c_p;
  double c_d;
  double c_v;
  double equality_residual;
  bool inequality_ok;
} WpdCapacities;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *wpd_last_error_message(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum WpdStatus wpd_density_from_pure(double alpha_re,
                                     double alpha_im,
                                     double beta_re,
                                     double beta_im,
                                     struct WpdDensity **out);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum WpdStatus wpd_density_from_stokes(double s1, double s2, double s3, struct WpdDensity **out);

/**
 * # Safety
 * `rho` must be null or a handle returned by this library, freed once.
 */
void wpd_density_free(struct WpdDensity *rho);

/**
 * Writes `(S1, S2, S3)` to `out[0..3]`.
 *
 * # Safety
 * `rho` must be a live handle and `out` must point to three doubles.
 */
enum WpdStatus wpd_density_stokes(const struct WpdDensity *rho, double *out);

/**
 * Writes the matrix row-major as `re, im` pairs to `out[0..8]`.
 *
 * # Safety
 * `rho` must be a live handle and `out` must point to eight doubles.
 */
enum WpdStatus wpd_density_entries(const struct WpdDensity *rho, double *out);

/**
 * # Safety
 * `rho` must be a live handle and `out` valid for writes.
 */
enum WpdStatus wpd_duality_check(const struct WpdDensity *rho,
                                 enum WpdConvention convention,
                                 struct WpdCapacities *out);

/**
 * Normalised mean energy `W_phi / E` after the wave unitary.
 *
 * # Safety
 * `rho` must be a live handle and `out` valid for writes.
 */
enum WpdStatus wpd_w_phi(const struct WpdDensity *rho,
                         double phi,
                         enum WpdConvention convention,
                         double *out);

/**
 * # Safety
 * Both handles must be live and `out` valid for writes.
 */
enum WpdStatus wpd_fidelity(const struct WpdDensity *a, const struct WpdDensity *b, double *out);

/**
 * Simulates Z, X and Y coincidence counts, `counts_per_axis` on average per
 * axis split over `repeats` records.
 *
 * # Safety
 * `rho` must be a live handle and `out` valid for writes.
 */
enum WpdStatus wpd_simulate_counts(const struct WpdDensity *rho,
                                   double counts_per_axis,
                                   uint32_t repeats,
                                   uint64_t seed,
                                   struct WpdCounts **out);

/**
 * # Safety
 * `counts` must be null or a handle returned by this library, freed once.
 */
void wpd_counts_free(struct WpdCounts *counts);

/**
 * Pooled tallies as `n0, n1` pairs for Z, X, Y in `out[0..6]`.
 *
 * # Safety
 * `counts` must be a live handle and `out` must point to six integers.
 */
enum WpdStatus wpd_counts_totals(const struct WpdCounts *counts, uint64_t *out);

/**
 * Maximum-likelihood state. `converged` may be null.
 *
 * # Safety
 * `counts` must be a live handle, `out` valid for writes, `converged` null
 * or valid for writes.
 */
enum WpdStatus wpd_mle_reconstruct(const struct WpdCounts *counts,
                                   uint64_t seed,
                                   struct WpdDensity **out,
                                   bool *converged);

/**
 * Capacities estimated from counts: `C_p` from the MLE state, `C_d` and
 * `C_v` from raw frequencies.
 *
 * # Safety
 * `counts` must be a live handle and `out` valid for writes.
 */
enum WpdStatus wpd_estimate_capacities(const struct WpdCounts *counts,
                                       enum WpdConvention convention,
                                       struct WpdCapacities *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WPDUALITY_H */
