#ifndef MIMO_UPLINK_H
#define MIMO_UPLINK_H

/* Generated by cbindgen from the mimo-uplink-ffi crate; regenerated on build. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every ABI call.
 */
enum MuStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  MU_STATUS_OK = 0,
  MU_STATUS_NULL_POINTER = 1,
  MU_STATUS_INVALID_ARGUMENT = 2,
  MU_STATUS_DOMAIN_ERROR = 3,
  MU_STATUS_NUMERICAL_ERROR = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum MuStatus MuStatus;
#else
typedef uint32_t MuStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Receiver selector for rate functions; pass as the `receiver` argument.
 */
enum MuReceiver
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  MU_RECEIVER_MRC = 0,
  MU_RECEIVER_ZF = 1,
  MU_RECEIVER_MMSE = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum MuReceiver MuReceiver;
#else
typedef uint32_t MuReceiver;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque Monte Carlo simulator for one system configuration.
 */
typedef struct MuSimulator MuSimulator;

/**
 * An energy split and the effective SNR it achieves.
 */
typedef struct {
  /**
   * Fraction of the P*T budget spent on training.
   */
  double alpha_train;
  /**
   * Total training energy per user.
   */
  double e;
  /**
   * Per-symbol data power.
   */
  double p_d;
  /**
   * Effective SNR at this split.
   */
  double rho;
} MuSplit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the current thread's last error message (NUL terminated) into
 * `buf` and returns the full message length including the NUL, so a larger
 * call can be issued if it was truncated. Returns 0 when no error is set.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (query mode).
 */
uintptr_t mu_last_error_message(char *buf, uintptr_t len);

/**
 * Variances of the MMSE channel estimate (`e/(e+1)`) and of the estimation
 * error (`1/(e+1)`) after training with per-user pilot energy `e`.
 *
 * # Safety
 * Out-pointers must be valid or null (null fails cleanly).
 */
MuStatus mu_estimation_variances(double e, double *out_sigma2_hat, double *out_sigma2_tilde);

/**
 * Per-symbol data power left by a training energy `e` out of the `p*t`
 * budget: `(p*t - e) / (t - k)`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_data_power(double p, uint32_t t, uint32_t k, double e, double *out_p_d);

/**
 * Effective SNR of the equivalent channel, `p_d*e / (k*p_d + e + 1)`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_effective_snr(double p_d, double e, uint32_t k, double *out_rho);

/**
 * Effective SNR of the equal-power scheme, `k*p^2 / (2*k*p + 1)`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_effective_snr_equal_power(double p, uint32_t k, double *out_rho);

/**
 * Per-user MRC rate bound at effective SNR `rho`,
 * `(1 - k/t) * log2(1 + rho*(m-1)/(rho*(k-1) + 1))`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_rate_mrc(double rho, uint32_t m, uint32_t k, uint32_t t, double *out_rate);

/**
 * Per-user ZF rate bound at effective SNR `rho`,
 * `(1 - k/t) * log2(1 + rho*(m-k))`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_rate_zf(double rho, uint32_t m, uint32_t k, uint32_t t, double *out_rate);

/**
 * Effective number of simultaneously served users, `min(m, k, t/2)`.
 */
uint32_t mu_k_star(uint32_t m, uint32_t k, uint32_t t);

/**
 * Total degrees of freedom, `k_star * (1 - k_star/t)`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_dof_total(uint32_t m, uint32_t k, uint32_t t, double *out_dof);

/**
 * Effective SNR when a fraction `alpha` of the `p*t` budget trains.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_rho_of_alpha(double alpha, double p, uint32_t t, uint32_t k, double *out_rho);

/**
 * Closed-form optimal energy split and its effective SNR.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_optimal_split(double p, uint32_t t, uint32_t k, MuSplit *out_split);

/**
 * Grid-oracle optimal energy split (coarse scan plus golden-section
 * refinement) at the library's default resolution.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_optimal_split_grid(double p, uint32_t t, uint32_t k, MuSplit *out_split);

/**
 * Effective SNR a per-user rate target requires, `2^(r/(1-k/t)) - 1`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_target_rho_for_rate(double r, uint32_t k, uint32_t t, double *out_rho);

/**
 * Low-SNR asymptotic power for a target effective SNR `rho_0`,
 * `sqrt(4*rho_0*(t-k) / (m*t^2))`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_required_power_asymptotic(double rho_0,
                                      uint32_t m,
                                      uint32_t k,
                                      uint32_t t,
                                      double *out_p);

/**
 * Exact bisection solve for the power at which the chosen receiver's rate
 * bound, under the optimal split, reaches `r` bits/channel use.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_required_power_exact(double r,
                                 uint32_t m,
                                 uint32_t k,
                                 uint32_t t,
                                 uint32_t receiver,
                                 double *out_p,
                                 double *out_achieved_rate);

/**
 * Monte Carlo coherent-MAC sum rate with `k_active` users at SNR `rho`.
 *
 * # Safety
 * See `mu_estimation_variances`.
 */
MuStatus mu_coherent_mac_sum_rate(double rho,
                                  uint32_t m,
                                  uint32_t k_active,
                                  uint32_t t,
                                  uint64_t trials,
                                  uint64_t seed,
                                  double *out_total_rate,
                                  double *out_std_error);

/**
 * Creates a simulator handle for (m, k, t, p); free with
 * `mu_simulator_free`. On any failure `*out_sim` is null.
 *
 * # Safety
 * `out_sim` must be a valid pointer.
 */
MuStatus mu_simulator_new(uint32_t m, uint32_t k, uint32_t t, double p, MuSimulator **out_sim);

/**
 * Releases a simulator handle. A null handle is a no-op.
 *
 * # Safety
 * `sim` must come from `mu_simulator_new` and not be freed twice.
 */
void mu_simulator_free(MuSimulator *sim);

/**
 * Ergodic per-user rate estimate. `alpha_train` in [0, 1] fixes the energy
 * split; any negative value requests the grid-optimal split. Deterministic
 * in (seed, trials) regardless of worker threads.
 *
 * # Safety
 * `sim` must be a live handle from `mu_simulator_new`; out-pointers must be
 * valid or null.
 */
MuStatus mu_simulator_empirical_rate(const MuSimulator *sim,
                                     uint32_t receiver,
                                     double alpha_train,
                                     uint64_t trials,
                                     uint64_t seed,
                                     double *out_mean_rate,
                                     double *out_std_error,
                                     uint64_t *out_resamples);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMO_UPLINK_H */
