//! Power scaling: the transmit power needed to hold a fixed per-user rate
//! as the antenna count grows. The asymptotic law says P shrinks like
//! 1/sqrt(M); the exact solver inverts the actual rate bound (with the
//! training split re-optimized at every candidate power) so the gap to the
//! asymptote is measured instead of assumed.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{log2_1p, rate_mrc, rate_zf};
use crate::params::{prelog, Receiver};
use crate::split::{optimal_split_grid, GRID_RESOLUTION};

/// Bisection bracket for the exact solve; the rate map is strictly
/// increasing in P, so any achievable target has a unique root here.
pub const POWER_BRACKET: (f64, f64) = (1e-12, 1e6);

/// Relative rate tolerance at which the bisection stops.
pub const RATE_TOLERANCE: f64 = 1e-9;

const MAX_BISECTION_ITERS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Asymptotic,
    ExactBisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolveResult {
    pub p_required: f64,
    pub method: SolveMethod,
    /// Rate the bound actually delivers at `p_required`; None for the
    /// asymptotic method, which never evaluates the bound.
    pub achieved_rate: Option<f64>,
    pub target_rate: f64,
}

/// Effective SNR that a per-user rate R requires: `2^(R/(1-K/T)) - 1`.
pub fn target_rho_for_rate(r: f64, k: u32, t: u32) -> Result<f64> {
    if k == 0 || k >= t {
        return Err(Error::domain(format!("1 <= K < T violated (k={k}, t={t})")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!(
            "rate must be finite and nonnegative (r={r})"
        )));
    }
    Ok((r / prelog(k, t) * std::f64::consts::LN_2).exp_m1())
}

/// Low-SNR power law: `P = sqrt(4*rho_0*(T-K) / (M*T^2))`, valid for M much
/// larger than K. Quadrupling M halves P exactly by construction.
pub fn required_power_asymptotic(rho_0: f64, m: u32, k: u32, t: u32) -> Result<PowerSolveResult> {
    if m == 0 || k == 0 || k >= t {
        return Err(Error::domain(format!(
            "need M >= 1 and 1 <= K < T (m={m}, k={k}, t={t})"
        )));
    }
    if !(rho_0.is_finite() && rho_0 >= 0.0) {
        return Err(Error::domain(format!(
            "rho_0 must be finite and nonnegative (rho_0={rho_0})"
        )));
    }
    let radicand = 4.0 * rho_0 * (t - k) as f64 / (m as f64 * (t as f64 * t as f64));
    Ok(PowerSolveResult {
        p_required: radicand.sqrt(),
        method: SolveMethod::Asymptotic,
        achieved_rate: None,
        target_rate: prelog(k, t) * log2_1p(rho_0),
    })
}

/// Solves rate(receiver, M, K, T, P) = R for P by bisection, where each
/// candidate P is first passed through the grid-search split optimizer. The
/// grid oracle (not the closed form) feeds the solver so the result stays
/// anchored to the verified optimum.
pub fn required_power_exact(
    r: f64,
    m: u32,
    k: u32,
    t: u32,
    receiver: Receiver,
) -> Result<PowerSolveResult> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(format!(
            "target rate must be finite and positive (r={r})"
        )));
    }
    if !matches!(receiver, Receiver::Mrc | Receiver::Zf) {
        return Err(Error::domain(format!(
            "exact power solve supports mrc and zf (got {receiver})"
        )));
    }
    if receiver == Receiver::Zf && m <= k {
        return Err(Error::domain(format!(
            "zero-forcing needs M > K (m={m}, k={k})"
        )));
    }
    let rate_at = |p: f64| -> Result<f64> {
        let rho = optimal_split_grid(p, t, k, GRID_RESOLUTION)?.rho_star;
        let report = match receiver {
            Receiver::Mrc => rate_mrc(rho, m, k, t)?,
            Receiver::Zf => rate_zf(rho, m, k, t)?,
            _ => unreachable!("validated above"),
        };
        Ok(report.per_user_rate)
    };

    let (mut lo, mut hi) = POWER_BRACKET;
    let rate_hi = rate_at(hi)?;
    if rate_hi < r {
        return Err(Error::domain(format!(
            "target rate {r} is unachievable: the bound tops out at {rate_hi} within the power bracket"
        )));
    }
    if rate_at(lo)? >= r {
        return Err(Error::domain(format!(
            "target rate {r} is already met at the bottom of the power bracket"
        )));
    }
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let achieved = rate_at(mid)?;
        if ((achieved - r) / r).abs() <= RATE_TOLERANCE {
            return Ok(PowerSolveResult {
                p_required: mid,
                method: SolveMethod::ExactBisection,
                achieved_rate: Some(achieved),
                target_rate: r,
            });
        }
        if achieved < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::numerical(format!(
        "bisection failed to reach relative rate tolerance {RATE_TOLERANCE} in {MAX_BISECTION_ITERS} iterations"
    )))
}

/// One antenna count's worth of a power sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweepRow {
    pub m: u32,
    pub p_asymptotic: f64,
    /// Exact solve for this row; errors are carried per row so one bad
    /// configuration does not void the rest of the table.
    pub exact: Result<PowerSweepExact>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSweepExact {
    pub p_exact: f64,
    pub achieved_rate: f64,
    /// p_exact / p_asymptotic; drifts to 1 as M grows.
    pub ratio: f64,
}

/// Exact and asymptotic required power across antenna counts. Rows are
/// computed concurrently but reported in input order.
pub fn power_sweep(
    r: f64,
    k: u32,
    t: u32,
    receiver: Receiver,
    m_values: &[u32],
) -> Result<Vec<PowerSweepRow>> {
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("antenna counts must be strictly increasing"));
    }
    if let Some(bad) = m_values.iter().find(|&&m| m <= k) {
        return Err(Error::domain(format!(
            "every antenna count must exceed K (m={bad}, k={k})"
        )));
    }
    let rho_0 = target_rho_for_rate(r, k, t)?;
    Ok(m_values
        .par_iter()
        .map(|&m| {
            let p_asymptotic = required_power_asymptotic(rho_0, m, k, t)
                .expect("validated inputs")
                .p_required;
            let exact = required_power_exact(r, m, k, t, receiver).map(|solved| PowerSweepExact {
                p_exact: solved.p_required,
                achieved_rate: solved.achieved_rate.expect("exact method records the rate"),
                ratio: solved.p_required / p_asymptotic,
            });
            PowerSweepRow {
                m,
                p_asymptotic,
                exact,
            }
        })
        .collect())
}
