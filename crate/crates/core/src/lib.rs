//! Uplink analysis for large antenna arrays under block fading, where the
//! receiver has no prior channel knowledge and learns it from uplink pilots.
//!
//! One coherence interval of `T` symbols carries `K` pilot symbols followed
//! by `T - K` data symbols; the per-user energy budget `P * T` is split
//! between the two phases. Everything downstream of that split is derived
//! here:
//!
//! - [`model`]: MMSE channel-estimation statistics and the effective SNR of
//!   the resulting pilot-then-data scheme, plus MRC and ZF rate bounds.
//! - [`split`]: the training/data energy split that maximizes the effective
//!   SNR, in closed form and by an independent grid search, with the high-
//!   and low-SNR limits.
//! - [`dof`]: degrees-of-freedom characterization (how many users to serve,
//!   what rate slope to expect at high SNR) and slope probes.
//! - [`power`]: transmit power required for a target per-user rate, exact by
//!   bisection and asymptotically in the array size.
//! - [`mc`]: a deterministic, trial-parallel Monte Carlo engine used to
//!   cross-check every closed form against simulated channels.
//! - [`selftest`]: a fast self-contained consistency suite.
//!
//! Conventions: powers are linear (never dB) in every API, rates are in bits
//! per channel use, `alpha` always denotes the fraction of the energy budget
//! spent on training.

pub mod dof;
pub mod error;
pub mod mc;
pub mod model;
pub mod params;
pub mod power;
pub mod selftest;
pub mod split;

pub use error::{Error, Result};
pub use params::{
    EffectiveSnr, EnergySplit, EstimationVariances, RateReport, Receiver, SystemParams,
};
