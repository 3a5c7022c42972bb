//! Deterministic per-trial random substreams.
//!
//! Each trial's randomness is a pure function of (master_seed, trial_index):
//! the master seed is expanded into a ChaCha key and the trial index selects
//! the ChaCha stream, so trials can run on any number of workers in any order
//! and still draw identical sequences. The generator and the sampling
//! transforms below are frozen; changing either changes every seeded result,
//! so treat them as part of the output format.

use nalgebra::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Identity of one trial's substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStream {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl TrialStream {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    /// The trial's generator, positioned at the start of its substream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// SplitMix64 step; used only to spread a 64-bit seed over the 256-bit key.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0, 1) with 53 random mantissa bits.
pub fn uniform_unit(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals via the Marsaglia polar method.
///
/// Hand-rolled instead of a distributions crate so the byte-for-byte output
/// contract does not depend on someone else's sampling internals. `sqrt` is
/// correctly rounded everywhere; `ln` is the one libm call, stable on a given
/// platform.
pub fn normal_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    loop {
        let u = 2.0 * uniform_unit(rng) - 1.0;
        let v = 2.0 * uniform_unit(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// One draw from CN(0, 1): unit total variance, split evenly between the
/// real and imaginary parts.
pub fn complex_normal(rng: &mut ChaCha12Rng) -> Complex<f64> {
    let (a, b) = normal_pair(rng);
    Complex::new(
        a * std::f64::consts::FRAC_1_SQRT_2,
        b * std::f64::consts::FRAC_1_SQRT_2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_identity_replays_the_same_sequence() {
        let mut a = TrialStream::new(42, 7).rng();
        let mut b = TrialStream::new(42, 7).rng();
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut a = TrialStream::new(42, 7).rng();
        let mut b = TrialStream::new(42, 7).rng();
        for _ in 0..100 {
            let (x0, x1) = normal_pair(&mut a);
            let (y0, y1) = normal_pair(&mut b);
            assert_eq!(x0.to_bits(), y0.to_bits());
            assert_eq!(x1.to_bits(), y1.to_bits());
        }
    }

    #[test]
    fn distinct_indices_and_seeds_diverge() {
        let mut base = TrialStream::new(42, 0).rng();
        let mut other_trial = TrialStream::new(42, 1).rng();
        let mut other_seed = TrialStream::new(43, 0).rng();
        let first = base.next_u64();
        assert_ne!(first, other_trial.next_u64());
        assert_ne!(first, other_seed.next_u64());
    }

    #[test]
    fn uniform_stays_in_range_with_flat_moments() {
        let mut rng = TrialStream::new(1, 0).rng();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = uniform_unit(&mut rng);
            assert!((0.0..1.0).contains(&x));
            sum += x;
        }
        let mean = sum / n as f64;
        // std of the mean = 1/sqrt(12 n)
        let three_sigma = 3.0 / (12.0 * n as f64).sqrt();
        assert!((mean - 0.5).abs() < three_sigma, "uniform mean {mean}");
    }

    #[test]
    fn normal_moments_match_within_three_sigma() {
        let mut rng = TrialStream::new(2, 0).rng();
        let n = 100_000;
        let mut xs = Vec::with_capacity(n);
        while xs.len() < n {
            let (a, b) = normal_pair(&mut rng);
            xs.push(a);
            xs.push(b);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.0).abs() < 3.0 / n.sqrt(), "normal mean {mean}");
        // var of sample variance of a normal is ~2/n
        assert!(
            (var - 1.0).abs() < 3.0 * (2.0 / n).sqrt(),
            "normal var {var}"
        );
    }

    #[test]
    fn complex_normal_splits_variance_evenly() {
        let mut rng = TrialStream::new(3, 0).rng();
        let n = 100_000;
        let (mut vre, mut vim) = (0.0, 0.0);
        for _ in 0..n {
            let z = complex_normal(&mut rng);
            vre += z.re * z.re;
            vim += z.im * z.im;
        }
        let three_sigma = 3.0 * 0.5 * (2.0 / n as f64).sqrt();
        assert!((vre / n as f64 - 0.5).abs() < three_sigma);
        assert!((vim / n as f64 - 0.5).abs() < three_sigma);
    }

    /// Golden values pin the generator + transforms; a change here is a
    /// breaking change to every seeded artifact.
    #[test]
    fn golden_draws_are_stable() {
        let mut rng = TrialStream::new(42, 0).rng();
        let words: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(words, GOLDEN_WORDS);
        let mut rng = TrialStream::new(42, 0).rng();
        let z = complex_normal(&mut rng);
        assert_eq!(z.re.to_bits(), GOLDEN_NORMAL_RE_BITS);
        assert_eq!(z.im.to_bits(), GOLDEN_NORMAL_IM_BITS);
    }

    const GOLDEN_WORDS: [u64; 4] = [
        0x280b_7b79_f392_fa12,
        0x4dad_ef83_bc93_1d07,
        0xc195_c99b_a537_5e5f,
        0x7e65_7f1b_6bdc_3bfd,
    ];
    const GOLDEN_NORMAL_RE_BITS: u64 = 0xbfe2_fc71_7748_bc1e;
    const GOLDEN_NORMAL_IM_BITS: u64 = 0xbfd5_b979_fff0_0d9d;
}
