//! Monte Carlo side of the library: simulates the actual two-phase protocol
//! and estimates ergodic rates that the closed-form bounds must stay under.
//!
//! Determinism contract: every output here is a pure function of
//! (master_seed, trial count, parameters). Trials draw from per-index
//! substreams and the reduction is a fixed pairwise tree over trial order,
//! so worker count and scheduling cannot change a single output bit.

pub mod channel;
pub mod sinr;
pub mod stream;

pub use channel::{gen_channel, normalized_estimate, simulate_training, EstimationOutput};
pub use sinr::{sinr_mmse, sinr_mrc, sinr_zf};
pub use stream::TrialStream;

use rayon::prelude::*;

use crate::dof::{validate_high_snr_grid, SlopeEstimate, SlopeScheme};
use crate::error::{Error, Result};
use crate::model::{effective_snr, log2_1p};
use crate::params::{EnergySplit, Receiver, SystemParams};

/// Resample budget per trial for numerically singular draws; these occur with
/// probability zero for continuous channels, so hitting the cap means the
/// configuration itself is degenerate.
pub const MAX_RESAMPLES: u32 = 64;

/// Ergodic-rate estimate with its Monte Carlo uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRate {
    /// Mean per-user rate in bits/channel use, prelog included.
    pub mean_per_user_rate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub receiver: Receiver,
    /// Total singular-draw resamples across all trials.
    pub resamples: u64,
}

/// One trial's contribution, exposed for per-trial debugging output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    /// Per-user rate sample for this realization, prelog included.
    pub per_user_rate: f64,
    pub resamples: u32,
}

/// Ergodic per-user rate of a linear receiver under the given energy split:
/// per trial, draw a channel, run the training phase, normalize the estimate
/// and average `log2(1 + sinr)` over users; then average over trials with
/// the `(1 - K/T)` prelog.
pub fn empirical_rate(
    receiver: Receiver,
    params: &SystemParams,
    split: &EnergySplit,
    trials: u64,
    master_seed: u64,
) -> Result<EmpiricalRate> {
    empirical_rate_with_trials(receiver, params, split, trials, master_seed).map(|(rate, _)| rate)
}

/// Same as `empirical_rate` but also returns each trial's record.
pub fn empirical_rate_with_trials(
    receiver: Receiver,
    params: &SystemParams,
    split: &EnergySplit,
    trials: u64,
    master_seed: u64,
) -> Result<(EmpiricalRate, Vec<TrialOutcome>)> {
    params.validate(true)?;
    if receiver == Receiver::CoherentMac {
        return Err(Error::domain(
            "empirical_rate covers mrc, zf and mmse; coherent-mac rates live in the dof module",
        ));
    }
    if trials < 100 {
        return Err(Error::domain(format!(
            "at least 100 trials required for a meaningful standard error (trials={trials})"
        )));
    }
    let budget = params.p * params.t as f64;
    let spent = split.total_energy(params.t, params.k);
    if (spent - budget).abs() > 1e-9 * budget {
        return Err(Error::domain(format!(
            "split spends {spent} but the budget is {budget}; split and params disagree"
        )));
    }

    let rho = effective_snr(split.p_d, split.e, params.k).rho;
    let prelog = params.prelog();
    let (m, k, e) = (params.m, params.k, split.e);

    let raw: Vec<(f64, u32)> = (0..trials as usize)
        .into_par_iter()
        .map(|i| run_trial(receiver, m, k, e, rho, prelog, master_seed, i as u64))
        .collect::<Result<_>>()?;

    let samples: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let (mean, std_error) = mean_and_stderr(&samples);
    let outcomes: Vec<TrialOutcome> = raw
        .iter()
        .enumerate()
        .map(|(i, r)| TrialOutcome {
            trial: i as u64,
            per_user_rate: r.0,
            resamples: r.1,
        })
        .collect();
    Ok((
        EmpiricalRate {
            mean_per_user_rate: mean,
            std_error,
            trials,
            receiver,
            resamples: raw.iter().map(|r| u64::from(r.1)).sum(),
        },
        outcomes,
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    receiver: Receiver,
    m: u32,
    k: u32,
    e: f64,
    rho: f64,
    prelog: f64,
    master_seed: u64,
    index: u64,
) -> Result<(f64, u32)> {
    let mut rng = TrialStream::new(master_seed, index).rng();
    let mut resamples = 0u32;
    loop {
        let h = gen_channel(m, k, &mut rng);
        let est = simulate_training(&h, e, &mut rng)?;
        let g = normalized_estimate(&est.h_hat, e);
        let sinrs = match receiver {
            Receiver::Mrc => sinr_mrc(&g, rho),
            Receiver::Mmse => sinr_mmse(&g, rho),
            Receiver::Zf => match sinr_zf(&g, rho) {
                Ok(s) => s,
                Err(Error::Numerical(_)) if resamples < MAX_RESAMPLES => {
                    // Draw again from the same substream; the count keeps the
                    // event visible instead of silently hiding it.
                    resamples += 1;
                    continue;
                }
                Err(err) => return Err(err),
            },
            Receiver::CoherentMac => unreachable!("rejected above"),
        };
        let mean_log: f64 = sinrs.iter().map(|&s| log2_1p(s)).sum::<f64>() / k as f64;
        return Ok((prelog * mean_log, resamples));
    }
}

/// Slope of the empirical per-user rate against log2(P) over a high-SNR
/// grid, under the equal-power split (E = K*P, P_d = P). All grid points
/// share the master seed, so the common random numbers cancel most of the
/// point-to-point noise in the fitted slope.
pub fn empirical_rate_slope(
    receiver: Receiver,
    m: u32,
    k: u32,
    t: u32,
    p_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<SlopeEstimate> {
    validate_high_snr_grid(p_grid)?;
    let mut rates = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let params = SystemParams::new(m, k, t, p)?;
        let split = EnergySplit::equal_power(p, t, k)?;
        let rate = empirical_rate(receiver, &params, &split, trials, master_seed)?;
        rates.push(rate.mean_per_user_rate);
    }
    SlopeEstimate::fit(SlopeScheme::Empirical(receiver), p_grid.to_vec(), rates)
}

/// Fitted MMSE rate slope for a square system (K = M), the corner where the
/// closed-form linear-receiver bounds collapse. Note the measured slope stays
/// at the full `1 - K/T` prelog: each draw's MMSE filter still has a
/// one-dimensional direction clear of the other users' span, so the
/// empirical rate keeps growing even though the bounds do not.
pub fn mmse_saturation_probe(
    m: u32,
    t: u32,
    p_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<SlopeEstimate> {
    empirical_rate_slope(Receiver::Mmse, m, m, t, p_grid, trials, master_seed)
}

/// Fixed-shape pairwise summation: the reduction tree depends only on the
/// slice length, never on threads or chunking, and keeps rounding error at
/// O(log n) in the worst case.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error of the mean (sample std / sqrt n).
pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let devs: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&devs) / (n - 1.0);
    (mean, (var / n).sqrt())
}
