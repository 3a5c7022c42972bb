//! Fast end-to-end property checks (a few seconds, no heavy sampling),
//! meant for CI smoke runs via the `selftest` CLI subcommand.

use crate::dof::{coherent_mac_sum_rate, dof_total, rho_floor_check};
use crate::error::Result;
use crate::mc::{
    empirical_rate, gen_channel, simulate_training, sinr_mmse, sinr_mrc, sinr_zf, TrialStream,
};
use crate::model::{data_power, effective_snr, estimation_variances};
use crate::params::{EnergySplit, Receiver, SystemParams};
use crate::power::{required_power_asymptotic, required_power_exact, RATE_TOLERANCE};
use crate::split::{optimal_split_closed_form, optimal_split_grid, rho_of_alpha};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(err) => CheckOutcome {
            name,
            passed: false,
            detail: err.to_string(),
        },
    }
}

fn ensure(cond: bool, msg: String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(crate::error::Error::numerical(msg))
    }
}

/// Runs every check and reports them all (it does not stop at the first
/// failure, so one broken area cannot mask another).
pub fn run_selftest() -> Vec<CheckOutcome> {
    vec![
        check("estimation-variance-partition", variance_partition()),
        check("effective-snr-identity", snr_identity()),
        check("split-closed-vs-grid", split_agreement()),
        check("equal-power-snr-floor", snr_floor()),
        check("dof-formula", dof_formula()),
        check("power-asymptotic-halving", power_halving()),
        check("power-exact-round-trip", power_round_trip()),
        check("mc-determinism", mc_determinism()),
        check("receiver-fixture-exactness", receiver_fixture()),
        check("estimate-recomposition", recomposition()),
        check("mmse-dominance", mmse_dominance()),
        check("mac-zero-power", mac_zero()),
    ]
}

fn variance_partition() -> Result<String> {
    for e in [0.0, 0.5, 1.0, 3.0, 10.0] {
        let v = estimation_variances(e)?;
        ensure(
            (v.sigma2_hat - e / (e + 1.0)).abs() < 1e-15
                && (v.sigma2_hat + v.sigma2_tilde - 1.0).abs() < 1e-15,
            format!("variance partition broken at e={e}"),
        )?;
    }
    Ok("unit variance splits exactly across estimate and error".into())
}

fn snr_identity() -> Result<String> {
    let mut worst = 0.0f64;
    for (alpha, p, t, k) in [
        (0.3, 0.01, 10u32, 2u32),
        (0.5, 1.0, 4, 2),
        (0.7, 250.0, 7, 4),
        (0.05, 3.0, 40, 8),
    ] {
        let rational = rho_of_alpha(alpha, p, t, k)?.rho;
        let e = alpha * p * t as f64;
        let composed = effective_snr(data_power(p, t, k, e)?, e, k).rho;
        let rel = ((rational - composed) / composed.max(1e-300)).abs();
        worst = worst.max(rel);
        ensure(
            rel <= 1e-12,
            format!("snr identity off by {rel:.3e} at alpha={alpha}"),
        )?;
    }
    Ok(format!(
        "rational and composed forms agree (worst {worst:.2e})"
    ))
}

fn split_agreement() -> Result<String> {
    let mut worst = 0.0f64;
    for p in [0.01, 1.0, 100.0] {
        for (t, k) in [(10u32, 2u32), (8, 4), (3, 2)] {
            let c = optimal_split_closed_form(p, t, k)?;
            let g = optimal_split_grid(p, t, k, 1e-4)?;
            let rel = ((c.rho_star - g.rho_star) / g.rho_star).abs();
            worst = worst.max(rel);
            ensure(
                rel <= 1e-6,
                format!("split mismatch {rel:.3e} at p={p}, t={t}, k={k}"),
            )?;
        }
    }
    Ok(format!(
        "closed form matches the grid oracle (worst {worst:.2e})"
    ))
}

fn snr_floor() -> Result<String> {
    ensure(
        !rho_floor_check(1.0, 1),
        "floor must be an equality at K*P = 1".into(),
    )?;
    for (p, k) in [(2.0, 1u32), (10.0, 4), (0.6, 2), (1.01, 1)] {
        if k as f64 * p > 1.0 {
            ensure(
                rho_floor_check(p, k),
                format!("floor violated at p={p}, k={k}"),
            )?;
        }
    }
    Ok("rho exceeds P/3 exactly when K*P > 1".into())
}

fn dof_formula() -> Result<String> {
    ensure(
        (dof_total(64, 8, 20).dof_total - 4.8).abs() < 1e-15,
        "dof(64,8,20)".into(),
    )?;
    ensure(
        (dof_total(4, 10, 5).dof_total - 1.2).abs() < 1e-15,
        "dof(4,10,5)".into(),
    )?;
    ensure(dof_total(3, 3, 1).dof_total == 0.0, "dof at T=1".into())?;
    ensure(
        dof_total(9, 4, 16).dof_total == dof_total(17, 4, 16).dof_total,
        "antenna saturation".into(),
    )?;
    Ok("theorem formula spot values and saturation hold".into())
}

fn power_halving() -> Result<String> {
    for m in [100u32, 123] {
        let a = required_power_asymptotic(1.0, m, 2, 10)?.p_required;
        let b = required_power_asymptotic(1.0, 4 * m, 2, 10)?.p_required;
        ensure(
            b.to_bits() == (a / 2.0).to_bits(),
            format!("halving broke at m={m}"),
        )?;
    }
    Ok("quadrupling M halves the asymptotic power bit-exactly".into())
}

fn power_round_trip() -> Result<String> {
    let sol = required_power_exact(0.5, 64, 2, 10, Receiver::Mrc)?;
    let achieved = sol.achieved_rate.expect("exact method records the rate");
    let rel = ((achieved - 0.5) / 0.5).abs();
    ensure(
        rel <= RATE_TOLERANCE,
        format!("round trip off by {rel:.3e}"),
    )?;
    Ok(format!("bisection reproduces the target rate to {rel:.1e}"))
}

fn mc_determinism() -> Result<String> {
    let params = SystemParams::new(8, 2, 10, 1.5)?;
    let split = EnergySplit::equal_power(1.5, 10, 2)?;
    let a = empirical_rate(Receiver::Zf, &params, &split, 100, 7)?;
    let b = empirical_rate(Receiver::Zf, &params, &split, 100, 7)?;
    ensure(
        a.mean_per_user_rate.to_bits() == b.mean_per_user_rate.to_bits()
            && a.std_error.to_bits() == b.std_error.to_bits(),
        "same seed must reproduce identical bits".into(),
    )?;
    Ok("seeded runs are bit-identical".into())
}

fn receiver_fixture() -> Result<String> {
    use nalgebra::{Complex, DMatrix};
    let mut g = DMatrix::zeros(4, 2);
    g[(0, 0)] = Complex::new(1.0, 0.0);
    g[(1, 1)] = Complex::new(1.0, 0.0);
    let rho = 0.37;
    ensure(sinr_mrc(&g, rho) == vec![rho, rho], "mrc fixture".into())?;
    ensure(sinr_zf(&g, rho)? == vec![rho, rho], "zf fixture".into())?;
    let mmse = sinr_mmse(&g, rho);
    ensure(
        mmse.iter().all(|s| (s - rho).abs() <= 1e-15),
        "mmse fixture".into(),
    )?;
    Ok("orthonormal columns give SINR = rho on all receivers".into())
}

fn recomposition() -> Result<String> {
    let mut rng = TrialStream::new(3, 0).rng();
    let h = gen_channel(16, 8, &mut rng);
    let out = simulate_training(&h, 3.0, &mut rng)?;
    // Defining identity: the error is the literal difference H - H_hat.
    let diff = &h - &out.h_hat;
    ensure(
        diff.iter()
            .zip(out.h_tilde.iter())
            .all(|(d, t)| d.re.to_bits() == t.re.to_bits() && d.im.to_bits() == t.im.to_bits()),
        "error must equal channel minus estimate bit-exactly".into(),
    )?;
    // Re-adding the pair reproduces the channel to within the rounding of
    // that one subtraction.
    let sum = &out.h_hat + &out.h_tilde;
    ensure(
        sum.iter()
            .zip(h.iter())
            .zip(out.h_hat.iter())
            .all(|((s, o), a)| {
                let sr = o.re.abs().max(a.re.abs()).max(1.0);
                let si = o.im.abs().max(a.im.abs()).max(1.0);
                (s.re - o.re).abs() <= sr * 1e-15 && (s.im - o.im).abs() <= si * 1e-15
            }),
        "estimate + error must reproduce the channel to rounding level".into(),
    )?;
    Ok("error is the exact difference; recomposition holds to rounding".into())
}

fn mmse_dominance() -> Result<String> {
    for trial in 0..1000u64 {
        let g = gen_channel(8, 4, &mut TrialStream::new(5, trial).rng());
        let mrc = sinr_mrc(&g, 1.0);
        let zf = sinr_zf(&g, 1.0)?;
        let mmse = sinr_mmse(&g, 1.0);
        for u in 0..4 {
            let slack = 1e-9 * (1.0 + mmse[u]);
            ensure(
                mmse[u] >= mrc[u] - slack && mmse[u] >= zf[u] - slack,
                format!("dominance violated on trial {trial}, user {u}"),
            )?;
        }
    }
    Ok("MMSE dominates MRC and ZF on 1000 realizations".into())
}

fn mac_zero() -> Result<String> {
    let r = coherent_mac_sum_rate(0.0, 2, 2, 4, 100, 1)?;
    ensure(
        r.total_rate == 0.0,
        format!("mac rate at rho=0 is {}", r.total_rate),
    )?;
    Ok("coherent MAC rate is exactly zero at zero SNR".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        let outcomes = run_selftest();
        assert_eq!(outcomes.len(), 12);
        for o in &outcomes {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
