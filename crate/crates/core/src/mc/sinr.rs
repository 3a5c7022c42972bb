//! Per-user output SINRs of the three linear receivers, all operating on the
//! normalized estimate `g` with the effective SNR `rho` carrying every power
//! and estimation-quality factor.

use nalgebra::{Cholesky, Complex, DMatrix};

use crate::error::{Error, Result};

/// Condition-number ceiling on the Gram factor before a draw is declared
/// numerically singular and handed back for resampling.
const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Maximum-ratio combining:
/// `sinr_k = rho*|g_k|^4 / (rho*sum_{i!=k} |g_k' g_i|^2 + |g_k|^2)`.
pub fn sinr_mrc(g: &DMatrix<Complex<f64>>, rho: f64) -> Vec<f64> {
    debug_assert!(rho >= 0.0);
    let s = g.adjoint() * g;
    let k = g.ncols();
    (0..k)
        .map(|u| {
            let norm_sq = s[(u, u)].re;
            if norm_sq == 0.0 {
                return 0.0;
            }
            let interference: f64 = (0..k)
                .filter(|&i| i != u)
                .map(|i| s[(u, i)].norm_sqr())
                .sum();
            rho * norm_sq * norm_sq / (rho * interference + norm_sq)
        })
        .collect()
}

/// Zero-forcing: `sinr_k = rho / [(G'G)^{-1}]_{kk}`. Needs M >= K columns in
/// general position; a singular or ill-conditioned Gram matrix is reported
/// as a numerical error so the caller can resample the trial.
pub fn sinr_zf(g: &DMatrix<Complex<f64>>, rho: f64) -> Result<Vec<f64>> {
    debug_assert!(rho >= 0.0);
    let (m, k) = (g.nrows(), g.ncols());
    if m < k {
        return Err(Error::domain(format!(
            "zero-forcing needs at least as many antennas as users (m={m}, k={k})"
        )));
    }
    if rho == 0.0 {
        // Zero-power limit: no inversion needed, every SINR is 0.
        return Ok(vec![0.0; k]);
    }
    let s = g.adjoint() * g;
    let chol =
        Cholesky::new(s).ok_or_else(|| Error::numerical("gram matrix is not positive definite"))?;
    let l = chol.l();
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for i in 0..k {
        let d = l[(i, i)].re;
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let cond = (dmax / dmin) * (dmax / dmin);
    if !cond.is_finite() || cond > GRAM_CONDITION_LIMIT {
        return Err(Error::numerical(format!(
            "gram matrix condition estimate {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}"
        )));
    }
    let inv = chol.inverse();
    Ok((0..k).map(|u| rho / inv[(u, u)].re).collect())
}

/// Linear MMSE: `sinr_k = rho * g_k' (I + rho*(G G' - g_k g_k'))^{-1} g_k`.
///
/// Evaluated as `rho * |L^{-1} g_k|^2` from the Cholesky factor of the
/// per-user matrix, a sum of positives, so the high-rho regime where MMSE
/// approaches ZF does not lose precision to cancellation.
pub fn sinr_mmse(g: &DMatrix<Complex<f64>>, rho: f64) -> Vec<f64> {
    debug_assert!(rho >= 0.0);
    let (m, k) = (g.nrows(), g.ncols());
    let b = g * g.adjoint();
    let mut sinrs = Vec::with_capacity(k);
    for u in 0..k {
        let gu = g.column(u);
        let mut a = &b - gu * gu.adjoint();
        a *= Complex::new(rho, 0.0);
        for i in 0..m {
            a[(i, i)] += Complex::new(1.0, 0.0);
        }
        // a = I + rho * (PSD term): eigenvalues >= 1, always factorizable.
        let chol = Cholesky::new(a).expect("identity-plus-PSD matrix must factor");
        let y = chol
            .l()
            .solve_lower_triangular(&gu)
            .expect("nonzero diagonal");
        sinrs.push(rho * y.norm_squared());
    }
    sinrs
}
