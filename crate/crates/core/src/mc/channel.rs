//! Channel draws and the simulated training phase.

use nalgebra::{Complex, DMatrix};
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::mc::stream::complex_normal;
use crate::model::estimation_variances;
use crate::params::EstimationVariances;

/// Fresh M x K block-fading realization, entries i.i.d. CN(0, 1).
/// Fill order is fixed (down each column, left to right) as part of the
/// reproducibility contract.
pub fn gen_channel(m: u32, k: u32, rng: &mut ChaCha12Rng) -> DMatrix<Complex<f64>> {
    debug_assert!(m >= 1 && k >= 1);
    let (m, k) = (m as usize, k as usize);
    let mut h = DMatrix::zeros(m, k);
    for j in 0..k {
        for i in 0..m {
            h[(i, j)] = complex_normal(rng);
        }
    }
    h
}

/// Result of estimating a channel from the pilot observation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOutput {
    pub h_hat: DMatrix<Complex<f64>>,
    pub h_tilde: DMatrix<Complex<f64>>,
    pub variances: EstimationVariances,
}

/// Observes the pilots through fresh noise and forms the linear MMSE channel
/// estimate `h_hat = sqrt(E)/(E+1) * (sqrt(E)*h + n)` plus its complement
/// `h_tilde = h - h_hat`, so the two always sum back to `h`.
pub fn simulate_training(
    h: &DMatrix<Complex<f64>>,
    e: f64,
    rng: &mut ChaCha12Rng,
) -> Result<EstimationOutput> {
    let variances = estimation_variances(e)?;
    let se = e.sqrt();
    let coef = se / (e + 1.0);
    let mut h_hat = DMatrix::zeros(h.nrows(), h.ncols());
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            let n = complex_normal(rng);
            // coef = 0 at e = 0, which zeroes the estimate exactly.
            h_hat[(i, j)] = (se * h[(i, j)] + n) * coef;
        }
    }
    let h_tilde = h - &h_hat;
    Ok(EstimationOutput {
        h_hat,
        h_tilde,
        variances,
    })
}

/// Unit-variance estimate `g = h_hat / sigma_hat`; all power and estimation
/// quality is then carried by the effective SNR. At E = 0 the estimate is
/// identically zero and so is `g`.
pub fn normalized_estimate(h_hat: &DMatrix<Complex<f64>>, e: f64) -> DMatrix<Complex<f64>> {
    if e <= 0.0 {
        return DMatrix::zeros(h_hat.nrows(), h_hat.ncols());
    }
    let inv_sigma = ((e + 1.0) / e).sqrt();
    h_hat.map(|z| z * inv_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream::TrialStream;

    fn entry_stats(m: &DMatrix<Complex<f64>>) -> (f64, f64, usize) {
        let n = 2 * m.len();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for z in m.iter() {
            sum += z.re + z.im;
            sumsq += z.re * z.re + z.im * z.im;
        }
        let mean = sum / n as f64;
        (mean, sumsq / n as f64 - mean * mean, n)
    }

    #[test]
    fn repeated_generation_is_identical() {
        let a = gen_channel(2, 2, &mut TrialStream::new(42, 0).rng());
        let b = gen_channel(2, 2, &mut TrialStream::new(42, 0).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn entries_have_zero_mean_unit_variance() {
        // 250x200 = 50_000 complex entries = 100_000 real components.
        let h = gen_channel(250, 200, &mut TrialStream::new(7, 0).rng());
        let (mean, var, n) = entry_stats(&h);
        let sigma_mean = (0.5 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma_mean, "component mean {mean}");
        // Per-entry variance (re + im) should be 1, i.e. 0.5 per component.
        let sigma_var = 0.5 * (2.0 / n as f64).sqrt();
        assert!((var - 0.5).abs() < 3.0 * sigma_var, "component var {var}");
    }

    #[test]
    fn different_trials_are_uncorrelated() {
        let a = gen_channel(100, 100, &mut TrialStream::new(11, 0).rng());
        let b = gen_channel(100, 100, &mut TrialStream::new(11, 1).rng());
        let n = (2 * a.len()) as f64;
        let mut cross = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            cross += x.re * y.re + x.im * y.im;
        }
        // Both sides have component variance 1/2, so corr = 2*cross/n.
        let corr = 2.0 * cross / n;
        assert!(
            corr.abs() < 3.0 / n.sqrt(),
            "cross-trial correlation {corr}"
        );
    }

    #[test]
    fn zero_training_energy_gives_zero_estimate() {
        let mut rng = TrialStream::new(5, 0).rng();
        let h = gen_channel(4, 2, &mut rng);
        let out = simulate_training(&h, 0.0, &mut rng).unwrap();
        assert!(out.h_hat.iter().all(|z| z.re == 0.0 && z.im == 0.0));
        assert_eq!(out.h_tilde, h);
        let g = normalized_estimate(&out.h_hat, 0.0);
        assert!(g.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    /// The error is the literal floating-point difference H - H_hat, so
    /// recomputing that difference reproduces it bit for bit. Adding the
    /// pair back is only exact up to the rounding of the subtraction (an
    /// addition cannot undo a rounded subtraction: 0.7 + (1e-3 - 0.7)
    /// is not 1e-3), so the reconstruction check is at rounding level.
    #[test]
    fn error_is_the_exact_difference_and_reconstruction_is_rounding_level() {
        for e in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let mut rng = TrialStream::new(6, 3).rng();
            let h = gen_channel(16, 8, &mut rng);
            let out = simulate_training(&h, e, &mut rng).unwrap();
            let diff = &h - &out.h_hat;
            for (d, t) in diff.iter().zip(out.h_tilde.iter()) {
                assert_eq!(d.re.to_bits(), t.re.to_bits());
                assert_eq!(d.im.to_bits(), t.im.to_bits());
            }
            let sum = &out.h_hat + &out.h_tilde;
            for ((s, orig), hat) in sum.iter().zip(h.iter()).zip(out.h_hat.iter()) {
                let scale = orig.re.abs().max(hat.re.abs()).max(1.0);
                assert!((s.re - orig.re).abs() <= scale * 1e-15);
                let scale = orig.im.abs().max(hat.im.abs()).max(1.0);
                assert!((s.im - orig.im).abs() <= scale * 1e-15);
            }
        }
    }

    #[test]
    fn training_variances_match_the_closed_forms() {
        // 10^5 entries aggregated across trials at E = 3.
        let e = 3.0;
        let mut hat_sq = 0.0;
        let mut tilde_sq = 0.0;
        let mut cross = 0.0;
        let mut n = 0usize;
        for trial in 0..50 {
            let mut rng = TrialStream::new(8, trial).rng();
            let h = gen_channel(50, 20, &mut rng);
            let out = simulate_training(&h, e, &mut rng).unwrap();
            for (a, b) in out.h_hat.iter().zip(out.h_tilde.iter()) {
                hat_sq += a.norm_sqr();
                tilde_sq += b.norm_sqr();
                cross += a.re * b.re + a.im * b.im;
                n += 1;
            }
        }
        let nf = n as f64;
        assert!(n >= 50_000);
        let var_hat = hat_sq / nf;
        let var_tilde = tilde_sq / nf;
        // Entry variance estimates have std ~ var * sqrt(2/n) (complex: 2n
        // real components, each chi-square).
        let tol_hat = 3.0 * 0.75 * (1.0 / nf).sqrt();
        let tol_tilde = 3.0 * 0.25 * (1.0 / nf).sqrt();
        assert!((var_hat - 0.75).abs() < tol_hat, "var(h_hat) {var_hat}");
        assert!(
            (var_tilde - 0.25).abs() < tol_tilde,
            "var(h_tilde) {var_tilde}"
        );
        // Correlation between estimate and error components ~ 0.
        let corr = cross / nf / (0.75f64 * 0.25).sqrt();
        assert!(
            corr.abs() < 3.0 / (2.0 * nf).sqrt(),
            "hat/tilde correlation {corr}"
        );
    }

    #[test]
    fn normalized_estimate_has_unit_variance() {
        let e = 3.0;
        let mut rng = TrialStream::new(9, 0).rng();
        let h = gen_channel(250, 100, &mut rng);
        let out = simulate_training(&h, e, &mut rng).unwrap();
        let g = normalized_estimate(&out.h_hat, e);
        let (_, var, n) = entry_stats(&g);
        let sigma_var = 0.5 * (2.0 / n as f64).sqrt();
        assert!((var - 0.5).abs() < 3.0 * sigma_var, "normalized var {var}");
    }
}
