//! Training/data energy-split optimization.
//!
//! Spending a fraction `alpha` of the budget `P*T` on pilots buys estimate
//! quality at the cost. of data power; `rho_of_alpha` is the resulting
//! effective SNR. This module maximizes it two independent ways, a closed
//! form from the stationarity condition and a grid search with local
//! refinement, so each can audit the other. `alpha` is always the training
//! fraction `E/(P*T)`.

use crate::error::{Error, Result};
use crate::model::data_power;
use crate::params::{EffectiveSnr, EnergySplit};

/// Default oracle resolution for the coarse grid stage.
pub const GRID_RESOLUTION: f64 = 1e-4;

/// Width to which the grid optimum is refined around the best coarse cell.
const REFINE_WIDTH: f64 = 1e-10;

/// How an optimal split was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMethod {
    ClosedForm,
    Grid,
}

/// An optimizer output: the maximizing training fraction, the implied raw
/// energies, and the maximized effective SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSolution {
    pub alpha_train: f64,
    pub e: f64,
    pub p_d: f64,
    pub rho_star: f64,
    pub method: SplitMethod,
}

impl SplitSolution {
    pub fn energy_split(&self) -> EnergySplit {
        EnergySplit {
            alpha_train: self.alpha_train,
            e: self.e,
            p_d: self.p_d,
        }
    }
}

/// Auxiliary constant of the closed-form optimum,
/// `gamma = (1 + P*T) * (T-K) / (P*T * (T-2K))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaAux {
    pub gamma: f64,
}

/// Effective SNR as a function of the training fraction:
/// `(P*T)^2 * alpha * (1-alpha) / (alpha*P*T*(T-2K) + K*P*T + T - K)`.
///
/// This rational form is an algebraic simplification of composing
/// `data_power`, the estimation variances, and `effective_snr`; the test
/// suite checks the two routes against each other rather than trusting the
/// simplification.
pub fn rho_of_alpha(alpha: f64, p: f64, t: u32, k: u32) -> Result<EffectiveSnr> {
    validate_split_inputs(p, t, k)?;
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "alpha must lie in [0, 1] (alpha={alpha})"
        )));
    }
    let pt = p * t as f64;
    let (a, b) = stationarity_coeffs(p, t, k);
    Ok(EffectiveSnr {
        rho: pt * pt * alpha * (1.0 - alpha) / (a * alpha + b),
    })
}

pub fn gamma_aux(p: f64, t: u32, k: u32) -> Result<GammaAux> {
    validate_split_inputs(p, t, k)?;
    if t == 2 * k {
        return Err(Error::domain(format!(
            "gamma is undefined at T = 2K (t={t}, k={k}); use the T = 2K branch"
        )));
    }
    let pt = p * t as f64;
    Ok(GammaAux {
        gamma: (1.0 + pt) * (t - k) as f64 / (pt * (t as f64 - 2.0 * k as f64)),
    })
}

/// Closed-form maximizer of `rho_of_alpha`.
///
/// Writing the denominator as `a*alpha + b` with `a = P*T*(T-2K)` and
/// `b = K*P*T + T - K`, the stationarity condition is the quadratic
/// `a*alpha^2 + 2*b*alpha - b = 0`, whose root in (0, 1) rationalizes to
/// `alpha* = sqrt(b) / (sqrt(b) + sqrt(a+b))` with `a + b = (T-K)(1+P*T) > 0`.
/// Substituting back gives `rho* = (P*T / (sqrt(a+b) + sqrt(b)))^2`.
///
/// Those two expressions are branch-free and cancellation-free; the familiar
/// piecewise forms in `gamma` (for T > 2K, T = 2K, T < 2K) reduce to them
/// via `gamma = (a+b)/a`, `gamma - 1 = b/a`. At T = 2K the training fraction
/// is exactly 1/2.
pub fn optimal_split_closed_form(p: f64, t: u32, k: u32) -> Result<SplitSolution> {
    validate_split_inputs(p, t, k)?;
    let pt = p * t as f64;
    let (a, b) = stationarity_coeffs(p, t, k);
    let sb = b.sqrt();
    let sapb = (a + b).sqrt();
    let alpha_train = sb / (sb + sapb);
    let rho_star = (pt / (sapb + sb)).powi(2);
    let e = alpha_train * pt;
    Ok(SplitSolution {
        alpha_train,
        e,
        p_d: data_power(p, t, k, e)?,
        rho_star,
        method: SplitMethod::ClosedForm,
    })
}

/// Grid-search maximizer of `rho_of_alpha`: a coarse scan at `resolution`
/// (at most 1e-4; ties go to the smallest alpha), then golden-section
/// refinement of the bracketing cells down to a 1e-10 window. Serves as the
/// independent oracle for the closed form.
pub fn optimal_split_grid(p: f64, t: u32, k: u32, resolution: f64) -> Result<SplitSolution> {
    validate_split_inputs(p, t, k)?;
    if !(resolution > 0.0 && resolution <= 1e-4) {
        return Err(Error::domain(format!(
            "grid resolution must lie in (0, 1e-4] (resolution={resolution})"
        )));
    }
    let pt = p * t as f64;
    let (a, b) = stationarity_coeffs(p, t, k);
    // Scale-free profile: alpha*(1-alpha)/(a*alpha+b), same argmax as rho.
    let profile = |alpha: f64| alpha * (1.0 - alpha) / (a * alpha + b);

    let n = (1.0 / resolution).ceil() as u64;
    let coarse = coarse_argmax(&profile, n);
    let lo = ((coarse as f64 - 1.0) / n as f64).max(0.0);
    let hi = ((coarse as f64 + 1.0) / n as f64).min(1.0);
    let alpha_train = golden_max(&profile, lo, hi, REFINE_WIDTH);

    let e = alpha_train * pt;
    Ok(SplitSolution {
        alpha_train,
        e,
        p_d: data_power(p, t, k, e)?,
        rho_star: rho_of_alpha(alpha_train, p, t, k)?.rho,
        method: SplitMethod::Grid,
    })
}

/// High-SNR limit of the optimal split. `alpha_data` is the limiting DATA
/// share of energy, `sqrt(T-K) / (sqrt(T-K) + sqrt(K))`; the training
/// fraction used everywhere else in this module tends to its complement
/// `sqrt(K) / (sqrt(K) + sqrt(T-K))`. `rho_over_p` is the limiting ratio of
/// optimal effective SNR to transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighSnrLimit {
    pub alpha_data: f64,
    pub rho_over_p: f64,
}

pub fn asymptotic_split_high_snr(t: u32, k: u32) -> Result<HighSnrLimit> {
    if k == 0 || k >= t {
        return Err(Error::domain(format!("1 <= K < T violated (k={k}, t={t})")));
    }
    let sk = (k as f64).sqrt();
    let stk = ((t - k) as f64).sqrt();
    Ok(HighSnrLimit {
        alpha_data: stk / (stk + sk),
        rho_over_p: t as f64 / (stk + sk).powi(2),
    })
}

/// Low-SNR limit of the optimal split: half the energy to training and
/// `rho -> (P*T)^2 / (4*(T-K))`. The relative gap to the true optimum decays
/// only linearly, roughly `P*T * T / (2*(T-K))`, so this is a guide rather
/// than a substitute at moderate power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowSnrLimit {
    pub alpha_train: f64,
    pub rho: f64,
}

pub fn asymptotic_split_low_snr(p: f64, t: u32, k: u32) -> Result<LowSnrLimit> {
    validate_split_inputs(p, t, k)?;
    let pt = p * t as f64;
    Ok(LowSnrLimit {
        alpha_train: 0.5,
        rho: pt * pt / (4.0 * (t - k) as f64),
    })
}

/// Denominator coefficients of the rational SNR profile: `a*alpha + b`.
fn stationarity_coeffs(p: f64, t: u32, k: u32) -> (f64, f64) {
    let pt = p * t as f64;
    let a = pt * (t as f64 - 2.0 * k as f64);
    let b = k as f64 * pt + (t - k) as f64;
    (a, b)
}

fn validate_split_inputs(p: f64, t: u32, k: u32) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::domain(format!(
            "P must be finite and positive (p={p})"
        )));
    }
    if k == 0 || k >= t {
        return Err(Error::domain(format!("1 <= K < T violated (k={k}, t={t})")));
    }
    Ok(())
}

/// Index of the maximal profile value over `alpha = i/n`, first index on ties
/// so the smallest alpha wins regardless of scan strategy.
fn coarse_argmax(profile: &dyn Fn(f64) -> f64, n: u64) -> u64 {
    let mut best_i = 0u64;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let v = profile(i as f64 / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    best_i
}

/// Golden-section maximization of a unimodal function on [lo, hi].
fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    while hi - lo > width {
        let x1 = hi - INVPHI * (hi - lo);
        let x2 = lo + INVPHI * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::effective_snr;
    use proptest::prelude::*;

    fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
        let denom = want.abs().max(f64::MIN_POSITIVE);
        assert!(
            ((got - want) / denom).abs() <= tol,
            "{what}: got {got}, want {want} (rel tol {tol})"
        );
    }

    /// The piecewise reference expressions, kept deliberately verbatim
    /// (including the branch split) as an independent check on the unified
    /// form used in production.
    fn piecewise_reference(p: f64, t: u32, k: u32) -> (f64, f64) {
        let pt = p * t as f64;
        let tf = t as f64;
        let kf = k as f64;
        if t > 2 * k {
            let g = (1.0 + pt) * (tf - kf) / (pt * (tf - 2.0 * kf));
            let rho = pt / (tf - 2.0 * kf) * (g.sqrt() - (g - 1.0).sqrt()).powi(2);
            let alpha_data = g - (g * (g - 1.0)).sqrt();
            (1.0 - alpha_data, rho)
        } else if t == 2 * k {
            (0.5, pt * pt / (2.0 * tf * (1.0 + pt)))
        } else {
            let g = (1.0 + pt) * (tf - kf) / (pt * (tf - 2.0 * kf));
            let rho = pt / (2.0 * kf - tf) * ((-g).sqrt() - (1.0 - g).sqrt()).powi(2);
            let alpha_data = g + (g * (g - 1.0)).sqrt();
            (1.0 - alpha_data, rho)
        }
    }

    #[test]
    fn rho_profile_spot_values() {
        assert_rel(
            rho_of_alpha(0.5, 1.0, 4, 2).unwrap().rho,
            0.4,
            1e-15,
            "symmetric midpoint",
        );
        assert_eq!(rho_of_alpha(0.0, 1.0, 4, 2).unwrap().rho, 0.0);
        assert_eq!(rho_of_alpha(1.0, 1.0, 4, 2).unwrap().rho, 0.0);
        assert!(rho_of_alpha(1.2, 1.0, 4, 2).is_err());
        assert!(rho_of_alpha(0.5, 0.0, 4, 2).is_err());
        assert!(rho_of_alpha(0.5, 1.0, 4, 4).is_err());
    }

    #[test]
    fn gamma_spot_value_and_degenerate_case() {
        let g = gamma_aux(1.0, 10, 2).unwrap().gamma;
        assert_rel(g, 88.0 / 60.0, 1e-15, "gamma(1,10,2)");
        let err = gamma_aux(1.0, 8, 4).unwrap_err();
        assert!(err.to_string().contains("T = 2K"), "got {err}");
    }

    #[test]
    fn symmetric_coherence_interval_is_an_exact_half_split() {
        let s = optimal_split_closed_form(1.0, 4, 2).unwrap();
        assert_eq!(s.alpha_train, 0.5, "alpha must be exactly 1/2 at T = 2K");
        assert!(
            (s.rho_star - 0.4).abs() < 1e-15,
            "rho* = 0.4, got {}",
            s.rho_star
        );
        assert!((s.e - 2.0).abs() < 1e-15);
        assert!((s.p_d - 1.0).abs() < 1e-15);

        let g = optimal_split_grid(1.0, 4, 2, 1e-4).unwrap();
        assert!((g.alpha_train - 0.5).abs() <= 1e-4);
        assert_rel(g.rho_star, 0.4, 1e-9, "grid rho at symmetric point");
    }

    #[test]
    fn long_interval_spot_check() {
        let s = optimal_split_closed_form(1.0, 10, 2).unwrap();
        assert_rel(s.alpha_train, 0.36064, 1e-4, "alpha(1,10,2)");
        assert_rel(s.rho_star, 0.46452, 1e-4, "rho*(1,10,2)");
        // More training than the high-power limit, less than the low-power half.
        let hi = asymptotic_split_high_snr(10, 2).unwrap();
        assert!(s.alpha_train > 1.0 - hi.alpha_data && s.alpha_train < 0.5);
    }

    #[test]
    fn unified_form_matches_the_piecewise_reference_on_all_branches() {
        let cases = [
            (1.0, 10u32, 2u32),
            (0.01, 10, 2),
            (1e3, 10, 2),
            (2.0, 8, 4),
            (1e-3, 8, 4),
            (1.0, 3, 2),
            (0.37, 7, 4),
            (250.0, 7, 4),
            (1e-3, 40, 8),
        ];
        for (p, t, k) in cases {
            let s = optimal_split_closed_form(p, t, k).unwrap();
            let (alpha_ref, rho_ref) = piecewise_reference(p, t, k);
            assert_rel(
                s.rho_star,
                rho_ref,
                1e-9,
                &format!("rho branch check p={p},t={t},k={k}"),
            );
            assert_rel(
                s.alpha_train,
                alpha_ref,
                1e-6,
                &format!("alpha branch check p={p},t={t},k={k}"),
            );
        }
    }

    #[test]
    fn closed_form_agrees_with_the_grid_oracle_across_the_sweep() {
        let mut worst = 0.0f64;
        for decade in -3..=3 {
            let p = 10f64.powi(decade);
            for k in [1u32, 2, 4, 8] {
                for t in [2 * k - 1, 2 * k, 2 * k + 1, 4 * k, 10 * k] {
                    if t < k + 1 {
                        continue;
                    }
                    let c = optimal_split_closed_form(p, t, k).unwrap();
                    let g = optimal_split_grid(p, t, k, 1e-4).unwrap();
                    let rel = ((c.rho_star - g.rho_star) / g.rho_star).abs();
                    worst = worst.max(rel);
                    assert!(
                        rel <= 1e-6,
                        "closed vs grid rho mismatch at p={p}, t={t}, k={k}: {rel:.3e}"
                    );
                    assert!(
                        (c.alpha_train - g.alpha_train).abs() <= 2e-4,
                        "alpha mismatch at p={p}, t={t}, k={k}"
                    );
                }
            }
        }
        assert!(
            worst < 1e-8,
            "expected near-exact agreement, worst {worst:.3e}"
        );
    }

    #[test]
    fn solutions_are_self_consistent_with_the_model_chain() {
        for (p, t, k) in [(1.0, 10u32, 2u32), (1e-3, 40, 8), (30.0, 3, 2), (2.0, 8, 4)] {
            for s in [
                optimal_split_closed_form(p, t, k).unwrap(),
                optimal_split_grid(p, t, k, 1e-4).unwrap(),
            ] {
                let rho = effective_snr(s.p_d, s.e, k).rho;
                assert_rel(
                    s.rho_star,
                    rho,
                    1e-12,
                    "rho_star vs effective_snr(p_d, e, k)",
                );
                let split = s.energy_split();
                assert_rel(
                    split.total_energy(t, k),
                    p * t as f64,
                    1e-12,
                    "budget conservation",
                );
            }
        }
    }

    #[test]
    fn no_feasible_alpha_beats_the_closed_form_anywhere() {
        for (p, t, k) in [(0.05, 12u32, 3u32), (4.0, 5, 3), (1.0, 20, 2)] {
            let s = optimal_split_closed_form(p, t, k).unwrap();
            for i in 0..=1000 {
                let alpha = i as f64 / 1000.0;
                let rho = rho_of_alpha(alpha, p, t, k).unwrap().rho;
                assert!(
                    rho <= s.rho_star * (1.0 + 1e-12),
                    "profile exceeds claimed optimum at alpha={alpha}"
                );
            }
        }
    }

    #[test]
    fn profile_is_unimodal_on_the_grid() {
        for (p, t, k) in [(1e-3, 10u32, 2u32), (1.0, 3, 2), (1e3, 16, 8), (0.3, 9, 4)] {
            let n = 10_000;
            let vals: Vec<f64> = (0..=n)
                .map(|i| rho_of_alpha(i as f64 / n as f64, p, t, k).unwrap().rho)
                .collect();
            let peak = vals.iter().cloned().fold(0.0, f64::max);
            let eps = peak * 1e-14;
            let mut falling = false;
            for w in vals.windows(2) {
                let d = w[1] - w[0];
                if d < -eps {
                    falling = true;
                } else if d > eps {
                    assert!(
                        !falling,
                        "profile rose again after falling at p={p}, t={t}, k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn grid_tie_break_takes_the_smallest_alpha() {
        // Plateau over [0.2, 0.6]: the first plateau index must win.
        let plateau = |alpha: f64| {
            if (0.2..=0.6).contains(&alpha) {
                1.0
            } else {
                0.0
            }
        };
        let i = coarse_argmax(&plateau, 10);
        assert_eq!(i, 2, "expected the first index of the plateau");
    }

    #[test]
    fn asymptotic_limits_bracket_the_optimizer() {
        let hi = asymptotic_split_high_snr(10, 2).unwrap();
        assert_rel(
            hi.alpha_data,
            8f64.sqrt() / (8f64.sqrt() + 2f64.sqrt()),
            1e-15,
            "alpha_data",
        );
        assert_rel(
            hi.rho_over_p,
            10.0 / (8f64.sqrt() + 2f64.sqrt()).powi(2),
            1e-15,
            "rho/p",
        );
        // rho/p = T / (sqrt(T-K) + sqrt(K))^2 = 10/18 here.
        assert_rel(hi.rho_over_p, 10.0 / 18.0, 1e-12, "rho/p closed value");

        let s = optimal_split_closed_form(1e8, 10, 2).unwrap();
        assert!((s.alpha_train - (1.0 - hi.alpha_data)).abs() < 1e-4);
        assert_rel(
            s.rho_star / 1e8,
            hi.rho_over_p,
            1e-3,
            "rho*/p at high power",
        );

        let lo = asymptotic_split_low_snr(1e-8, 10, 2).unwrap();
        assert_eq!(lo.alpha_train, 0.5);
        assert_rel(lo.rho, 1e-14 / 32.0, 1e-12, "low-power rho formula");
        let s = optimal_split_closed_form(1e-8, 10, 2).unwrap();
        assert!((s.alpha_train - 0.5).abs() < 1e-4);
        assert_rel(s.rho_star, lo.rho, 1e-6, "rho* vs low-power limit");
    }

    #[test]
    fn low_snr_gap_decays_linearly_in_the_budget() {
        // Relative gap to the low-power limit is ~ P*T*T/(2*(T-K)): first-order,
        // not faster. Verified against the grid optimum.
        let (t, k) = (10u32, 2u32);
        let mut prev_dev = f64::INFINITY;
        for p in [1e-2, 1e-3, 1e-4, 1e-5] {
            let grid = optimal_split_grid(p, t, k, 1e-4).unwrap().rho_star;
            let lim = asymptotic_split_low_snr(p, t, k).unwrap().rho;
            let dev = ((lim - grid) / lim).abs();
            let predicted = p * t as f64 * t as f64 / (2.0 * (t - k) as f64);
            assert_rel(dev, predicted, 0.2, &format!("first-order gap at p={p}"));
            assert!(dev < prev_dev, "gap must shrink as power drops");
            prev_dev = dev;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        /// The rational profile must match the explicit composition through
        /// data_power / estimation variances / effective_snr.
        #[test]
        fn rational_form_matches_direct_composition(
            alpha in 0.0f64..=1.0,
            log_p in -3.0f64..3.0,
            k in 1u32..=8,
            t_mult in 0u32..=40,
        ) {
            let p = 10f64.powf(log_p);
            let t = k + 1 + t_mult;
            let rational = rho_of_alpha(alpha, p, t, k).unwrap().rho;
            let e = alpha * p * t as f64;
            // Guard the budget edge against rounding past p*t.
            let e = e.min(p * t as f64);
            let p_d = data_power(p, t, k, e).unwrap();
            let composed = effective_snr(p_d, e, k).rho;
            let scale = composed.abs().max(1e-300);
            prop_assert!(
                ((rational - composed) / scale).abs() <= 1e-12,
                "rational {} vs composed {} at alpha={}, p={}, t={}, k={}",
                rational, composed, alpha, p, t, k
            );
        }

        /// rho* never exceeds the data power actually available.
        #[test]
        fn optimum_is_bounded_by_data_power(
            log_p in -3.0f64..3.0,
            k in 1u32..=8,
            t_mult in 0u32..=40,
        ) {
            let p = 10f64.powf(log_p);
            let t = k + 1 + t_mult;
            let s = optimal_split_closed_form(p, t, k).unwrap();
            prop_assert!(s.rho_star <= s.p_d * (1.0 + 1e-12));
            prop_assert!(s.alpha_train > 0.0 && s.alpha_train < 1.0);
        }
    }
}
