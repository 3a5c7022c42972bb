//! Degrees of freedom: how many users are worth activating, the total
//! pre-log the system can sustain, and numerical slope estimators that
//! recover that pre-log from rate curves over a high-SNR power window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc::{gen_channel, mean_and_stderr, TrialStream};
use crate::model::{effective_snr_equal_power, log2_1p, rate_mrc};
use crate::params::{prelog, RateReport, Receiver};

use nalgebra::{Cholesky, Complex, DMatrix};

/// Effective number of active users: `min(M, K, floor(T/2))`. Activating
/// more than T/2 users is counterproductive because training eats the slots.
pub fn k_star(m: u32, k: u32, t: u32) -> u32 {
    debug_assert!(m >= 1 && k >= 1 && t >= 1);
    m.min(k).min(t / 2)
}

/// Total degrees of freedom and the user count that achieves them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofResult {
    pub k_star: u32,
    pub dof_total: f64,
}

/// `K* * (1 - K*/T)`; zero exactly when T = 1.
pub fn dof_total(m: u32, k: u32, t: u32) -> DofResult {
    let ks = k_star(m, k, t);
    DofResult {
        k_star: ks,
        dof_total: ks as f64 * (1.0 - ks as f64 / t as f64),
    }
}

/// Closed-form total rate of the equal-power scheme (E = K*·P, P_d = P) with
/// the best K* users active and zero-forcing. Needs K* < M, otherwise the
/// ZF bound is vacuous and the coherent-MAC path is the right tool.
pub fn achievable_rate_equal_power_zf(p: f64, m: u32, k: u32, t: u32) -> Result<RateReport> {
    validate_power(p)?;
    let ks = k_star(m, k, t);
    if ks == 0 {
        return Ok(RateReport::new(Receiver::Zf, 0.0, 0));
    }
    if ks == m {
        return Err(Error::domain(format!(
            "zero-forcing achievability needs K* < M (k_star={ks}, m={m}); use the coherent MAC path"
        )));
    }
    let rho = effective_snr_equal_power(p, ks).rho;
    let per_user = prelog(ks, t) * log2_1p(rho * (m - ks) as f64);
    Ok(RateReport::new(Receiver::Zf, per_user, ks))
}

/// Equal-power MRC counterpart; no K* < M restriction, but interference
/// makes its rate saturate, which is exactly what the slope estimator is
/// used to demonstrate.
pub fn achievable_rate_equal_power_mrc(p: f64, m: u32, k: u32, t: u32) -> Result<RateReport> {
    validate_power(p)?;
    let ks = k_star(m, k, t);
    if ks == 0 {
        return Ok(RateReport::new(Receiver::Mrc, 0.0, 0));
    }
    let rho = effective_snr_equal_power(p, ks).rho;
    let report = rate_mrc(rho, m, ks, t)?;
    Ok(report)
}

fn validate_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::domain(format!(
            "power must be finite and nonnegative (p={p})"
        )));
    }
    Ok(())
}

/// Rate source for a slope estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeScheme {
    ZfEqualPower,
    MrcEqualPower,
    CoherentMac,
    /// Monte Carlo rate of a linear receiver under the equal-power split.
    Empirical(Receiver),
}

impl std::fmt::Display for SlopeScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlopeScheme::ZfEqualPower => write!(f, "zf-equal-power"),
            SlopeScheme::MrcEqualPower => write!(f, "mrc-equal-power"),
            SlopeScheme::CoherentMac => write!(f, "coherent-mac"),
            SlopeScheme::Empirical(r) => write!(f, "empirical-{r}"),
        }
    }
}

/// Least-squares slope of rate against log2(P) over a power grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    pub scheme: SlopeScheme,
    /// Bits per channel use gained per doubling of P.
    pub slope: f64,
    pub p_grid: Vec<f64>,
    /// Rate at each grid power, in the producing operation's units
    /// (total rate for the dof schemes, per-user for empirical slopes).
    pub rates: Vec<f64>,
}

impl SlopeEstimate {
    pub fn fit(scheme: SlopeScheme, p_grid: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if p_grid.len() < 2 || p_grid.len() != rates.len() {
            return Err(Error::domain(format!(
                "slope fit needs matching grids of at least 2 points ({} powers, {} rates)",
                p_grid.len(),
                rates.len()
            )));
        }
        if !p_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("power grid must be strictly increasing"));
        }
        let xs: Vec<f64> = p_grid.iter().map(|p| p.log2()).collect();
        let n = xs.len() as f64;
        let x_mean = xs.iter().sum::<f64>() / n;
        let y_mean = rates.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in xs.iter().zip(rates.iter()) {
            num += (x - x_mean) * (y - y_mean);
            den += (x - x_mean) * (x - x_mean);
        }
        Ok(Self {
            scheme,
            slope: num / den,
            p_grid,
            rates,
        })
    }
}

/// Geometric power grid with exact endpoints.
pub fn geometric_grid(start: f64, stop: f64, points: u32) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop > start) {
        return Err(Error::domain(format!(
            "geometric grid needs 0 < start < stop (start={start}, stop={stop})"
        )));
    }
    if points < 2 {
        return Err(Error::domain(format!(
            "geometric grid needs at least 2 points (points={points})"
        )));
    }
    let n = points as usize;
    let log_step = (stop / start).ln() / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| start * (log_step * i as f64).exp())
        .collect();
    grid[0] = start;
    grid[n - 1] = stop;
    Ok(grid)
}

/// Standard DoF estimation window: 2^10 to 2^30, one point per octave.
/// The equal-power loss factor `rho/(P/2)` is within 1e-3 of its limit over
/// this whole range, so the fitted slope is a clean pre-log readout.
pub fn default_dof_grid() -> Vec<f64> {
    (0..=20).map(|i| (2f64).powi(10 + i)).collect()
}

/// A slope grid must sit in the high-SNR regime (smallest power >= 1e3),
/// span at least 10 octaves, and be geometric so the log2 abscissas are
/// evenly weighted.
pub fn validate_high_snr_grid(p_grid: &[f64]) -> Result<()> {
    if p_grid.len() < 2 {
        return Err(Error::domain(format!(
            "slope grid needs at least 2 points (got {})",
            p_grid.len()
        )));
    }
    if p_grid.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::domain(
            "slope grid powers must be finite and positive",
        ));
    }
    if !p_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("slope grid must be strictly increasing"));
    }
    if p_grid[0] < 1e3 {
        return Err(Error::domain(format!(
            "slope grid must start in the high-SNR regime, at least 1e3 (starts at {})",
            p_grid[0]
        )));
    }
    let span = p_grid[p_grid.len() - 1] / p_grid[0];
    if span < 1024.0 * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "slope grid must span at least 10 octaves (spans {:.3})",
            span.log2()
        )));
    }
    let r0 = p_grid[1] / p_grid[0];
    for w in p_grid.windows(2) {
        let r = w[1] / w[0];
        if ((r - r0) / r0).abs() > 1e-9 {
            return Err(Error::domain("slope grid must be geometric"));
        }
    }
    Ok(())
}

/// Monte Carlo settings for the schemes that need sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub master_seed: u64,
}

/// Which rate curve to regress for a DoF estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofScheme {
    ZfEqualPower,
    MrcEqualPower,
    CoherentMac,
}

impl std::str::FromStr for DofScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" | "zf-equal-power" => Ok(DofScheme::ZfEqualPower),
            "mrc" | "mrc-equal-power" => Ok(DofScheme::MrcEqualPower),
            "mac" | "coherent-mac" => Ok(DofScheme::CoherentMac),
            other => Err(Error::domain(format!(
                "unknown dof scheme '{other}' (expected zf, mrc or mac)"
            ))),
        }
    }
}

/// Fits total rate against log2(P) over a high-SNR grid; for K* < M with ZF
/// the result reproduces `dof_total`, for MRC it collapses toward zero, and
/// for the coherent MAC it is sampled with `mc` (required for that scheme).
pub fn dof_slope_estimate(
    scheme: DofScheme,
    m: u32,
    k: u32,
    t: u32,
    p_grid: &[f64],
    mc: Option<McConfig>,
) -> Result<SlopeEstimate> {
    validate_high_snr_grid(p_grid)?;
    let rates: Vec<f64> = match scheme {
        DofScheme::ZfEqualPower => p_grid
            .iter()
            .map(|&p| achievable_rate_equal_power_zf(p, m, k, t).map(|r| r.total_rate))
            .collect::<Result<_>>()?,
        DofScheme::MrcEqualPower => p_grid
            .iter()
            .map(|&p| achievable_rate_equal_power_mrc(p, m, k, t).map(|r| r.total_rate))
            .collect::<Result<_>>()?,
        DofScheme::CoherentMac => {
            let cfg = mc.ok_or_else(|| {
                Error::domain("coherent-mac slope needs Monte Carlo trials and a seed")
            })?;
            let ks = k_star(m, k, t);
            p_grid
                .iter()
                .map(|&p| {
                    let rho = effective_snr_equal_power(p, ks).rho;
                    coherent_mac_sum_rate(rho, m, ks, t, cfg.trials, cfg.master_seed)
                        .map(|r| r.total_rate)
                })
                .collect::<Result<_>>()?
        }
    };
    let tag = match scheme {
        DofScheme::ZfEqualPower => SlopeScheme::ZfEqualPower,
        DofScheme::MrcEqualPower => SlopeScheme::MrcEqualPower,
        DofScheme::CoherentMac => SlopeScheme::CoherentMac,
    };
    SlopeEstimate::fit(tag, p_grid.to_vec(), rates)
}

/// True iff the equal-power effective SNR beats P/3; guaranteed whenever
/// K*P > 1 (with equality, not excess, exactly at K*P = 1).
pub fn rho_floor_check(p: f64, k: u32) -> bool {
    debug_assert!(p > 0.0 && k >= 1);
    effective_snr_equal_power(p, k).rho > p / 3.0
}

/// Coherent MAC sum rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacSumRate {
    /// Mean of `(1 - K_a/T) * log2 det(I + rho G G')` over trials.
    pub total_rate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub active_users: u32,
}

/// Monte Carlo estimate of the receiver-CSI MAC sum rate with K_a active
/// users and the `(1 - K_a/T)` data-phase prelog. This is the achievability
/// device for the K* = M corner where linear processing saturates.
pub fn coherent_mac_sum_rate(
    rho: f64,
    m: u32,
    k_active: u32,
    t: u32,
    trials: u64,
    master_seed: u64,
) -> Result<MacSumRate> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::domain(format!(
            "rho must be finite and nonnegative (rho={rho})"
        )));
    }
    if m == 0 || k_active == 0 || k_active > t {
        return Err(Error::domain(format!(
            "need M >= 1 and 1 <= K_active <= T (m={m}, k_active={k_active}, t={t})"
        )));
    }
    if trials == 0 {
        return Err(Error::domain("at least one trial required"));
    }
    let pre = prelog(k_active, t);
    let samples: Vec<f64> = (0..trials as usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = TrialStream::new(master_seed, i as u64).rng();
            let g = gen_channel(m, k_active, &mut rng);
            pre * log_det_capacity(&g, rho)
        })
        .collect();
    let (mean, std_error) = mean_and_stderr(&samples);
    Ok(MacSumRate {
        total_rate: mean,
        std_error,
        trials,
        active_users: k_active,
    })
}

/// `log2 det(I_M + rho G G')` computed on the K x K side through the
/// determinant identity det(I + rho G G') = det(I + rho G' G).
fn log_det_capacity(g: &DMatrix<Complex<f64>>, rho: f64) -> f64 {
    let k = g.ncols();
    let mut s = g.adjoint() * g;
    s *= Complex::new(rho, 0.0);
    for i in 0..k {
        s[(i, i)] += Complex::new(1.0, 0.0);
    }
    let chol = Cholesky::new(s).expect("identity-plus-PSD matrix must factor");
    let l = chol.l();
    let mut log_det = 0.0;
    for i in 0..k {
        log_det += l[(i, i)].re.ln();
    }
    2.0 * log_det / std::f64::consts::LN_2
}
