//! The many-body scaling `ħ = N^{-1/2}`, `α = β/N`, `R = N^{-η}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRegime {
    pub n: usize,
    pub beta_stat: f64,
    pub eta: f64,
}

impl ScalingRegime {
    /// With `enforce` set, `η` must lie in `(0, 1/4)`.
    pub fn new(n: usize, beta_stat: f64, eta: f64, enforce: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Regime("particle number must be positive".into()));
        }
        if !beta_stat.is_finite() || !eta.is_finite() {
            return Err(Error::Regime("beta_stat and eta must be finite".into()));
        }
        if eta < 0.0 {
            return Err(Error::Regime(format!("eta must be nonnegative, got {eta}")));
        }
        if enforce && !(eta > 0.0 && eta < 0.25) {
            return Err(Error::Regime(format!("eta = {eta} outside the admissible range (0, 1/4)")));
        }
        Ok(Self { n, beta_stat, eta })
    }

    pub fn hbar(&self) -> f64 {
        (self.n as f64).powf(-0.5)
    }

    pub fn alpha(&self) -> f64 {
        self.beta_stat / self.n as f64
    }

    pub fn r(&self) -> f64 {
        (self.n as f64).powf(-self.eta)
    }
}
