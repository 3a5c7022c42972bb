//! Closed forms for the pilot-then-data uplink: estimation quality, the
//! effective SNR of the equivalent channel, and linear-receiver rate bounds.
//!
//! The channel has unit-variance Rayleigh entries. Training sends K
//! orthogonal pilots with total per-user energy E; the MMSE estimate then
//! has per-entry variance E/(E+1) and the estimation error carries the rest.
//! Folding the error into the noise gives an equivalent channel whose single
//! SNR parameter `rho` drives every rate expression below.

use crate::error::{Error, Result};
use crate::params::{prelog, EffectiveSnr, EstimationVariances, RateReport, Receiver};

/// Per-entry variances of the MMSE channel estimate and its error after
/// training with total pilot energy `e` per user.
///
/// `sigma2_hat = e/(e+1)` and `sigma2_tilde = 1/(e+1)`; they sum to one.
pub fn estimation_variances(e: f64) -> Result<EstimationVariances> {
    if !e.is_finite() || e < 0.0 {
        return Err(Error::domain(format!(
            "training energy must be finite and nonnegative (e={e})"
        )));
    }
    Ok(EstimationVariances {
        sigma2_hat: e / (e + 1.0),
        sigma2_tilde: 1.0 / (e + 1.0),
    })
}

/// Per-symbol data power once `e` of the `p*t` budget went to training:
/// `(p*t - e) / (t - k)` over the `t - k` data symbols.
pub fn data_power(p: f64, t: u32, k: u32, e: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::domain(format!(
            "P must be finite and positive (p={p})"
        )));
    }
    if k == 0 || k >= t {
        return Err(Error::domain(format!("1 <= K < T violated (k={k}, t={t})")));
    }
    let budget = p * t as f64;
    if !e.is_finite() || e < 0.0 {
        return Err(Error::domain(format!(
            "training energy must be finite and nonnegative (e={e})"
        )));
    }
    if e > budget {
        return Err(Error::domain(format!(
            "training energy exceeds the budget (e={e}, p*t={budget})"
        )));
    }
    Ok((budget - e) / (t - k) as f64)
}

/// Variance of the equivalent noise seen by the data symbols: estimation
/// error from all K users plus unit thermal noise, `k*p_d/(e+1) + 1`.
pub fn noise_variance_equiv(p_d: f64, e: f64, k: u32) -> f64 {
    debug_assert!(p_d >= 0.0 && e >= 0.0 && k >= 1);
    k as f64 * p_d / (e + 1.0) + 1.0
}

/// Effective SNR of the equivalent channel: data power times estimate
/// variance over equivalent noise, simplified to `p_d*e / (k*p_d + e + 1)`.
pub fn effective_snr(p_d: f64, e: f64, k: u32) -> EffectiveSnr {
    debug_assert!(p_d >= 0.0 && e >= 0.0 && k >= 1);
    EffectiveSnr {
        rho: p_d * e / (k as f64 * p_d + e + 1.0),
    }
}

/// Effective SNR when every symbol is sent at power `p` (so `e = k*p`):
/// `k*p^2 / (2*k*p + 1)`. Exceeds `p/3` exactly when `k*p > 1`.
pub fn effective_snr_equal_power(p: f64, k: u32) -> EffectiveSnr {
    debug_assert!(p >= 0.0 && k >= 1);
    let kp = k as f64 * p;
    EffectiveSnr {
        rho: kp * p / (2.0 * kp + 1.0),
    }
}

/// Per-user rate bound for maximum-ratio combining on the equivalent
/// channel: `(1 - k/t) * log2(1 + rho*(m-1) / (rho*(k-1) + 1))`.
///
/// Interference from the other K-1 users scales with `rho`, so this bound
/// saturates as `rho` grows whenever K > 1.
pub fn rate_mrc(rho: f64, m: u32, k: u32, t: u32) -> Result<RateReport> {
    validate_rate_inputs(rho, m, k, t)?;
    let sinr = rho * (m - 1) as f64 / (rho * (k - 1) as f64 + 1.0);
    Ok(RateReport::new(
        Receiver::Mrc,
        prelog(k, t) * log2_1p(sinr),
        k,
    ))
}

/// Per-user rate bound for zero-forcing on the equivalent channel:
/// `(1 - k/t) * log2(1 + rho*(m-k))`. Requires M >= K; vacuous at M = K.
pub fn rate_zf(rho: f64, m: u32, k: u32, t: u32) -> Result<RateReport> {
    validate_rate_inputs(rho, m, k, t)?;
    let sinr = rho * (m - k) as f64;
    Ok(RateReport::new(
        Receiver::Zf,
        prelog(k, t) * log2_1p(sinr),
        k,
    ))
}

fn validate_rate_inputs(rho: f64, m: u32, k: u32, t: u32) -> Result<()> {
    if m == 0 || k == 0 {
        return Err(Error::domain(format!(
            "M, K must be at least 1 (m={m}, k={k})"
        )));
    }
    if k > m {
        return Err(Error::domain(format!("K <= M violated (k={k}, m={m})")));
    }
    if k >= t {
        return Err(Error::domain(format!("K < T violated (k={k}, t={t})")));
    }
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::domain(format!(
            "rho must be finite and nonnegative (rho={rho})"
        )));
    }
    Ok(())
}

/// log2(1 + x) without cancellation for small x.
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
