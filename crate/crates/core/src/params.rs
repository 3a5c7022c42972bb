//! System description and the small value types shared across modules.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Block-fading uplink: `m` receive antennas, `k` single-antenna users, a
/// coherence interval of `t` symbols, and an average per-user transmit power
/// `p` in linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub m: u32,
    pub k: u32,
    pub t: u32,
    pub p: f64,
}

impl SystemParams {
    pub fn new(m: u32, k: u32, t: u32, p: f64) -> Result<Self> {
        let params = SystemParams { m, k, t, p };
        params.validate(false)?;
        Ok(params)
    }

    /// Checks basic sanity, and with `needs_training` the constraints for
    /// pilot-based operation: K <= M and K < T (otherwise there is no room
    /// for a data phase or for separating the users' pilots).
    pub fn validate(&self, needs_training: bool) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.t == 0 {
            return Err(Error::domain(format!(
                "M, K, T must be at least 1 (m={}, k={}, t={})",
                self.m, self.k, self.t
            )));
        }
        if !self.p.is_finite() || self.p < 0.0 {
            return Err(Error::domain(format!(
                "P must be finite and nonnegative (p={})",
                self.p
            )));
        }
        if needs_training {
            if self.k > self.m {
                return Err(Error::domain(format!(
                    "K <= M violated (k={}, m={})",
                    self.k, self.m
                )));
            }
            if self.k >= self.t {
                return Err(Error::domain(format!(
                    "K < T violated (k={}, t={})",
                    self.k, self.t
                )));
            }
        }
        Ok(())
    }

    /// Fraction of the coherence interval left for data, `1 - K/T`.
    pub fn prelog(&self) -> f64 {
        prelog(self.k, self.t)
    }
}

pub(crate) fn prelog(k: u32, t: u32) -> f64 {
    1.0 - k as f64 / t as f64
}

/// Division of the energy budget `P*T` between the K-symbol training phase
/// (total pilot energy `e`) and the `T-K` data symbols (per-symbol power
/// `p_d`). `alpha_train = e / (P*T)` is always the training share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    pub alpha_train: f64,
    pub e: f64,
    pub p_d: f64,
}

impl EnergySplit {
    /// Splits the budget by training fraction `alpha_train` in [0, 1].
    pub fn from_alpha(p: f64, t: u32, k: u32, alpha_train: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_train) || !alpha_train.is_finite() {
            return Err(Error::domain(format!(
                "alpha_train must lie in [0, 1] (alpha={alpha_train})"
            )));
        }
        check_budget(p, t, k)?;
        let e = alpha_train * p * t as f64;
        let p_d = crate::model::data_power(p, t, k, e)?;
        Ok(EnergySplit {
            alpha_train,
            e,
            p_d,
        })
    }

    /// Splits the budget by absolute training energy `e` in [0, P*T].
    pub fn from_training_energy(p: f64, t: u32, k: u32, e: f64) -> Result<Self> {
        check_budget(p, t, k)?;
        let p_d = crate::model::data_power(p, t, k, e)?;
        Ok(EnergySplit {
            alpha_train: e / (p * t as f64),
            e,
            p_d,
        })
    }

    /// Equal-power operation: every symbol at power `p`, so `e = K*p` and
    /// `p_d = p`. Conserves the budget for any T > K.
    pub fn equal_power(p: f64, t: u32, k: u32) -> Result<Self> {
        check_budget(p, t, k)?;
        Ok(EnergySplit {
            alpha_train: k as f64 / t as f64,
            e: k as f64 * p,
            p_d: p,
        })
    }

    /// Total energy spent in one coherence interval; equals `P*T` by
    /// construction up to rounding.
    pub fn total_energy(&self, t: u32, k: u32) -> f64 {
        self.e + self.p_d * (t - k) as f64
    }
}

fn check_budget(p: f64, t: u32, k: u32) -> Result<()> {
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

/// Variances of the MMSE channel estimate and of the estimation error; they
/// always sum to the unit channel variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationVariances {
    pub sigma2_hat: f64,
    pub sigma2_tilde: f64,
}

/// SNR of the equivalent single-scalar-noise channel after training; the one
/// number every rate expression downstream consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSnr {
    pub rho: f64,
}

/// Linear receivers plus the coherent-MAC reference used as a capacity proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    Mrc,
    Zf,
    Mmse,
    CoherentMac,
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Receiver::Mrc => "mrc",
            Receiver::Zf => "zf",
            Receiver::Mmse => "mmse",
            Receiver::CoherentMac => "coherent-mac",
        };
        f.write_str(s)
    }
}

impl FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrc" => Ok(Receiver::Mrc),
            "zf" => Ok(Receiver::Zf),
            "mmse" => Ok(Receiver::Mmse),
            "coherent-mac" | "mac" => Ok(Receiver::CoherentMac),
            other => Err(Error::domain(format!(
                "unknown receiver {other:?} (expected mrc, zf, mmse, or coherent-mac)"
            ))),
        }
    }
}

/// A rate statement for one receiver: per active user and summed.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub receiver: Receiver,
    pub per_user_rate: f64,
    pub total_rate: f64,
    pub active_users: u32,
}

impl RateReport {
    pub fn new(receiver: Receiver, per_user_rate: f64, active_users: u32) -> Self {
        RateReport {
            receiver,
            per_user_rate,
            total_rate: per_user_rate * active_users as f64,
            active_users,
        }
    }
}
