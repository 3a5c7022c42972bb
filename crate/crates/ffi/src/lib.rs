//! C ABI over the uplink analysis library.
//!
//! Conventions: every function returns a `MuStatus`; results leave through
//! out-pointers, written only on `Ok`. The last failure's message is kept
//! per thread and read back with `mu_last_error_message`. The Monte Carlo
//! surface lives behind an opaque `MuSimulator` handle; everything else is
//! scalar in, scalar out.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, UnwindSafe};

use mimo_uplink::dof::{coherent_mac_sum_rate, dof_total, k_star};
use mimo_uplink::mc::empirical_rate;
use mimo_uplink::model::{
    data_power, effective_snr, effective_snr_equal_power, estimation_variances, rate_mrc, rate_zf,
};
use mimo_uplink::power::{required_power_asymptotic, required_power_exact, target_rho_for_rate};
use mimo_uplink::split::{
    optimal_split_closed_form, optimal_split_grid, rho_of_alpha, SplitSolution, GRID_RESOLUTION,
};
use mimo_uplink::{EnergySplit, Error, Receiver, SystemParams};

/// Status code of every ABI call.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    NumericalError = 4,
}

/// Receiver selector for rate functions; pass as the `receiver` argument.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuReceiver {
    Mrc = 0,
    Zf = 1,
    Mmse = 2,
}

/// An energy split and the effective SNR it achieves.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MuSplit {
    /// Fraction of the P*T budget spent on training.
    pub alpha_train: f64,
    /// Total training energy per user.
    pub e: f64,
    /// Per-symbol data power.
    pub p_d: f64,
    /// Effective SNR at this split.
    pub rho: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|slot| {
        let mut bytes = slot.borrow_mut();
        bytes.clear();
        bytes.extend_from_slice(msg.as_bytes());
        bytes.push(0);
    });
}

fn fail(err: Error) -> MuStatus {
    let status = match err {
        Error::Domain(_) => MuStatus::DomainError,
        Error::Numerical(_) => MuStatus::NumericalError,
    };
    set_error(&err.to_string());
    status
}

/// Copies the current thread's last error message (NUL terminated) into
/// `buf` and returns the full message length including the NUL, so a larger
/// call can be issued if it was truncated. Returns 0 when no error is set.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn mu_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let bytes = slot.borrow();
        if bytes.is_empty() {
            return 0;
        }
        if !buf.is_null() && len > 0 {
            let n = len.min(bytes.len());
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            // Whatever fits is always a valid C string.
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

fn guarded(f: impl FnOnce() -> MuStatus + UnwindSafe) -> MuStatus {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MuStatus::NumericalError
        }
    }
}

/// Writes `value` through `ptr`; a null `ptr` turns into a NullPointer status.
unsafe fn write_out<T>(ptr: *mut T, value: T) -> MuStatus {
    if ptr.is_null() {
        set_error("output pointer is null");
        return MuStatus::NullPointer;
    }
    ptr.write(value);
    MuStatus::Ok
}

fn receiver_from(raw: u32) -> Result<Receiver, MuStatus> {
    match raw {
        x if x == MuReceiver::Mrc as u32 => Ok(Receiver::Mrc),
        x if x == MuReceiver::Zf as u32 => Ok(Receiver::Zf),
        x if x == MuReceiver::Mmse as u32 => Ok(Receiver::Mmse),
        other => {
            set_error(&format!("unknown receiver code {other}"));
            Err(MuStatus::InvalidArgument)
        }
    }
}

fn split_out(s: &SplitSolution) -> MuSplit {
    MuSplit {
        alpha_train: s.alpha_train,
        e: s.e,
        p_d: s.p_d,
        rho: s.rho_star,
    }
}

/// Variances of the MMSE channel estimate (`e/(e+1)`) and of the estimation
/// error (`1/(e+1)`) after training with per-user pilot energy `e`.
///
/// # Safety
/// Out-pointers must be valid or null (null fails cleanly).
#[no_mangle]
pub unsafe extern "C" fn mu_estimation_variances(
    e: f64,
    out_sigma2_hat: *mut f64,
    out_sigma2_tilde: *mut f64,
) -> MuStatus {
    guarded(|| match estimation_variances(e) {
        Ok(v) => {
            let s = write_out(out_sigma2_hat, v.sigma2_hat);
            if s != MuStatus::Ok {
                return s;
            }
            write_out(out_sigma2_tilde, v.sigma2_tilde)
        }
        Err(err) => fail(err),
    })
}

/// Per-symbol data power left by a training energy `e` out of the `p*t`
/// budget: `(p*t - e) / (t - k)`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_data_power(
    p: f64,
    t: u32,
    k: u32,
    e: f64,
    out_p_d: *mut f64,
) -> MuStatus {
    guarded(|| match data_power(p, t, k, e) {
        Ok(p_d) => write_out(out_p_d, p_d),
        Err(err) => fail(err),
    })
}

/// Effective SNR of the equivalent channel, `p_d*e / (k*p_d + e + 1)`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_effective_snr(p_d: f64, e: f64, k: u32, out_rho: *mut f64) -> MuStatus {
    guarded(|| {
        if !(p_d.is_finite() && p_d >= 0.0 && e.is_finite() && e >= 0.0 && k >= 1) {
            set_error("need finite nonnegative p_d and e, and k >= 1");
            return MuStatus::InvalidArgument;
        }
        write_out(out_rho, effective_snr(p_d, e, k).rho)
    })
}

/// Effective SNR of the equal-power scheme, `k*p^2 / (2*k*p + 1)`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_effective_snr_equal_power(
    p: f64,
    k: u32,
    out_rho: *mut f64,
) -> MuStatus {
    guarded(|| {
        if !(p.is_finite() && p >= 0.0 && k >= 1) {
            set_error("need finite nonnegative p and k >= 1");
            return MuStatus::InvalidArgument;
        }
        write_out(out_rho, effective_snr_equal_power(p, k).rho)
    })
}

/// Per-user MRC rate bound at effective SNR `rho`,
/// `(1 - k/t) * log2(1 + rho*(m-1)/(rho*(k-1) + 1))`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_rate_mrc(
    rho: f64,
    m: u32,
    k: u32,
    t: u32,
    out_rate: *mut f64,
) -> MuStatus {
    guarded(|| match rate_mrc(rho, m, k, t) {
        Ok(r) => write_out(out_rate, r.per_user_rate),
        Err(err) => fail(err),
    })
}

/// Per-user ZF rate bound at effective SNR `rho`,
/// `(1 - k/t) * log2(1 + rho*(m-k))`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_rate_zf(
    rho: f64,
    m: u32,
    k: u32,
    t: u32,
    out_rate: *mut f64,
) -> MuStatus {
    guarded(|| match rate_zf(rho, m, k, t) {
        Ok(r) => write_out(out_rate, r.per_user_rate),
        Err(err) => fail(err),
    })
}

/// Effective number of simultaneously served users, `min(m, k, t/2)`.
#[no_mangle]
pub extern "C" fn mu_k_star(m: u32, k: u32, t: u32) -> u32 {
    k_star(m, k, t)
}

/// Total degrees of freedom, `k_star * (1 - k_star/t)`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_dof_total(m: u32, k: u32, t: u32, out_dof: *mut f64) -> MuStatus {
    guarded(|| {
        if m == 0 || k == 0 || t == 0 {
            set_error("m, k, t must be at least 1");
            return MuStatus::InvalidArgument;
        }
        write_out(out_dof, dof_total(m, k, t).dof_total)
    })
}

/// Effective SNR when a fraction `alpha` of the `p*t` budget trains.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_rho_of_alpha(
    alpha: f64,
    p: f64,
    t: u32,
    k: u32,
    out_rho: *mut f64,
) -> MuStatus {
    guarded(|| match rho_of_alpha(alpha, p, t, k) {
        Ok(snr) => write_out(out_rho, snr.rho),
        Err(err) => fail(err),
    })
}

/// Closed-form optimal energy split and its effective SNR.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_optimal_split(
    p: f64,
    t: u32,
    k: u32,
    out_split: *mut MuSplit,
) -> MuStatus {
    guarded(|| match optimal_split_closed_form(p, t, k) {
        Ok(s) => write_out(out_split, split_out(&s)),
        Err(err) => fail(err),
    })
}

/// Grid-oracle optimal energy split (coarse scan plus golden-section
/// refinement) at the library's default resolution.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_optimal_split_grid(
    p: f64,
    t: u32,
    k: u32,
    out_split: *mut MuSplit,
) -> MuStatus {
    guarded(|| match optimal_split_grid(p, t, k, GRID_RESOLUTION) {
        Ok(s) => write_out(out_split, split_out(&s)),
        Err(err) => fail(err),
    })
}

/// Effective SNR a per-user rate target requires, `2^(r/(1-k/t)) - 1`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_target_rho_for_rate(
    r: f64,
    k: u32,
    t: u32,
    out_rho: *mut f64,
) -> MuStatus {
    guarded(|| match target_rho_for_rate(r, k, t) {
        Ok(rho) => write_out(out_rho, rho),
        Err(err) => fail(err),
    })
}

/// Low-SNR asymptotic power for a target effective SNR `rho_0`,
/// `sqrt(4*rho_0*(t-k) / (m*t^2))`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_required_power_asymptotic(
    rho_0: f64,
    m: u32,
    k: u32,
    t: u32,
    out_p: *mut f64,
) -> MuStatus {
    guarded(|| match required_power_asymptotic(rho_0, m, k, t) {
        Ok(res) => write_out(out_p, res.p_required),
        Err(err) => fail(err),
    })
}

/// Exact bisection solve for the power at which the chosen receiver's rate
/// bound, under the optimal split, reaches `r` bits/channel use.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_required_power_exact(
    r: f64,
    m: u32,
    k: u32,
    t: u32,
    receiver: u32,
    out_p: *mut f64,
    out_achieved_rate: *mut f64,
) -> MuStatus {
    guarded(|| {
        let receiver = match receiver_from(receiver) {
            Ok(r) => r,
            Err(status) => return status,
        };
        match required_power_exact(r, m, k, t, receiver) {
            Ok(res) => {
                let s = write_out(out_p, res.p_required);
                if s != MuStatus::Ok {
                    return s;
                }
                write_out(out_achieved_rate, res.achieved_rate.unwrap_or(f64::NAN))
            }
            Err(err) => fail(err),
        }
    })
}

/// Monte Carlo coherent-MAC sum rate with `k_active` users at SNR `rho`.
///
/// # Safety
/// See `mu_estimation_variances`.
#[no_mangle]
pub unsafe extern "C" fn mu_coherent_mac_sum_rate(
    rho: f64,
    m: u32,
    k_active: u32,
    t: u32,
    trials: u64,
    seed: u64,
    out_total_rate: *mut f64,
    out_std_error: *mut f64,
) -> MuStatus {
    guarded(
        || match coherent_mac_sum_rate(rho, m, k_active, t, trials, seed) {
            Ok(rate) => {
                let s = write_out(out_total_rate, rate.total_rate);
                if s != MuStatus::Ok {
                    return s;
                }
                write_out(out_std_error, rate.std_error)
            }
            Err(err) => fail(err),
        },
    )
}

/// Opaque Monte Carlo simulator for one system configuration.
pub struct MuSimulator {
    params: SystemParams,
}

/// Creates a simulator handle for (m, k, t, p); free with
/// `mu_simulator_free`. On any failure `*out_sim` is null.
///
/// # Safety
/// `out_sim` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mu_simulator_new(
    m: u32,
    k: u32,
    t: u32,
    p: f64,
    out_sim: *mut *mut MuSimulator,
) -> MuStatus {
    guarded(|| {
        // Null the handle up front so no failure path can leave a stale one.
        let status = write_out(out_sim, std::ptr::null_mut());
        if status != MuStatus::Ok {
            return status;
        }
        let params = match SystemParams::new(m, k, t, p).and_then(|p| p.validate(true).map(|_| p)) {
            Ok(p) => p,
            Err(err) => return fail(err),
        };
        let handle = Box::into_raw(Box::new(MuSimulator { params }));
        write_out(out_sim, handle)
    })
}

/// Releases a simulator handle. A null handle is a no-op.
///
/// # Safety
/// `sim` must come from `mu_simulator_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mu_simulator_free(sim: *mut MuSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Ergodic per-user rate estimate. `alpha_train` in [0, 1] fixes the energy
/// split; any negative value requests the grid-optimal split. Deterministic
/// in (seed, trials) regardless of worker threads.
///
/// # Safety
/// `sim` must be a live handle from `mu_simulator_new`; out-pointers must be
/// valid or null.
#[no_mangle]
pub unsafe extern "C" fn mu_simulator_empirical_rate(
    sim: *const MuSimulator,
    receiver: u32,
    alpha_train: f64,
    trials: u64,
    seed: u64,
    out_mean_rate: *mut f64,
    out_std_error: *mut f64,
    out_resamples: *mut u64,
) -> MuStatus {
    guarded(|| {
        if sim.is_null() {
            set_error("simulator handle is null");
            return MuStatus::NullPointer;
        }
        let receiver = match receiver_from(receiver) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let params = (*sim).params;
        let split = if alpha_train < 0.0 {
            match optimal_split_grid(params.p, params.t, params.k, GRID_RESOLUTION) {
                Ok(s) => s.energy_split(),
                Err(err) => return fail(err),
            }
        } else {
            match EnergySplit::from_alpha(params.p, params.t, params.k, alpha_train) {
                Ok(s) => s,
                Err(err) => return fail(err),
            }
        };
        match empirical_rate(receiver, &params, &split, trials, seed) {
            Ok(rate) => {
                let s = write_out(out_mean_rate, rate.mean_per_user_rate);
                if s != MuStatus::Ok {
                    return s;
                }
                let s = write_out(out_std_error, rate.std_error);
                if s != MuStatus::Ok {
                    return s;
                }
                write_out(out_resamples, rate.resamples)
            }
            Err(err) => fail(err),
        }
    })
}
