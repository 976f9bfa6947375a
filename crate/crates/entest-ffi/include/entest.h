#ifndef ENTEST_H
#define ENTEST_H

/* Generated by cbindgen from entest-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every entry point.
 */
typedef enum EntestStatus {
  ENTEST_STATUS_OK = 0,
  ENTEST_STATUS_NULL_POINTER = 1,
  ENTEST_STATUS_INVALID_ARGUMENT = 2,
  ENTEST_STATUS_COMPUTATION_FAILED = 3,
  ENTEST_STATUS_INTERNAL_ERROR = 4,
} EntestStatus;

/**
 * Opaque block decomposition for a fixed copy count.
 */
typedef struct EntestSpectrum EntestSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *entest_version(void);

/**
 * Builds the block decomposition for `n` copies.
 *
 * # Safety
 * `out` must be a valid pointer to an `EntestSpectrum*` slot.
 */
enum EntestStatus entest_spectrum_new(uint32_t n, struct EntestSpectrum **out);

/**
 * Releases a spectrum handle. A null pointer is ignored.
 *
 * # Safety
 * `spectrum` must be null or a pointer from [`entest_spectrum_new`] that
 * has not been freed.
 */
void entest_spectrum_free(struct EntestSpectrum *spectrum);

/**
 * Number of measurement outcomes (blocks), floor(N/2) + 1.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` must be valid.
 */
enum EntestStatus entest_spectrum_block_count(const struct EntestSpectrum *spectrum, uint32_t *out);

/**
 * Static facts of one block: twice the spin label, the eigenspace
 * dimension (2j+1)^2, and the multiplicity d_j as a double (d_j exceeds
 * 64-bit integers past N = 67).
 *
 * # Safety
 * `spectrum` must be a live handle; out-pointers may be null to skip.
 */
enum EntestStatus entest_spectrum_block_info(const struct EntestSpectrum *spectrum,
                                             uint32_t index,
                                             uint32_t *out_twice_j,
                                             unsigned long long *out_block_dim,
                                             double *out_copies);

/**
 * The block weight n_j lambda_j(b) for one outcome.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` must be valid.
 */
enum EntestStatus entest_spectrum_weight(const struct EntestSpectrum *spectrum,
                                         uint32_t index,
                                         double b,
                                         double *out);

/**
 * Expected optimal gain in bits for `n` copies under the isotropic
 * (quadratic) prior.
 *
 * # Safety
 * `out` must be valid.
 */
enum EntestStatus entest_average_gain_bits(uint32_t n, double *out);

/**
 * Expected optimal gain in bits under a polynomial prior
 * sum_q coeffs[q] b^q. The coefficients must integrate to one.
 *
 * # Safety
 * `coeffs` must point to `len` doubles; `out` must be valid.
 */
enum EntestStatus entest_average_gain_with_prior_bits(uint32_t n,
                                                      const double *coeffs,
                                                      uintptr_t len,
                                                      double *out);

/**
 * Expected gain in bits of the optimal local (one-party) strategy under
 * the quadratic prior. Coincides with the two-party value.
 *
 * # Safety
 * `out` must be valid.
 */
enum EntestStatus entest_local_gain_bits(uint32_t n, double *out);

/**
 * Outcome marginals p(k) under the quadratic prior, written into a caller
 * buffer of length `len >= floor(n/2) + 1`.
 *
 * # Safety
 * `out` must point to `len` doubles.
 */
enum EntestStatus entest_marginals(uint32_t n, double *out, uintptr_t len);

/**
 * Draws `trials` outcomes at a fixed parameter value and tallies them into
 * `out_counts` (length `len >= floor(n/2) + 1`). Deterministic in `seed`.
 *
 * # Safety
 * `out_counts` must point to `len` u64 slots.
 */
enum EntestStatus entest_simulate_outcome_counts(uint32_t n,
                                                 double b,
                                                 unsigned long long trials,
                                                 unsigned long long seed,
                                                 unsigned long long *out_counts,
                                                 uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTEST_H */
