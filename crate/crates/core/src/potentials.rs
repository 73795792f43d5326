//! Trapping potentials and external vector potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, VectorField2D};

/// Radial power trap `V(x) = c·|x|^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trap {
    pub coefficient: f64,
    pub exponent: f64,
}

impl Trap {
    pub fn harmonic() -> Self {
        Self { coefficient: 1.0, exponent: 2.0 }
    }

    pub fn power(coefficient: f64, exponent: f64) -> Result<Self> {
        let t = Self { coefficient, exponent };
        t.validate()?;
        Ok(t)
    }

    /// Growth condition `V ≥ c|x|^s − C` with `s > 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient > 0.0 && self.coefficient.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trap coefficient must be positive, got {}",
                self.coefficient
            )));
        }
        if !(self.exponent > 1.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trap growth exponent must exceed 1, got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        self.coefficient * x[0].hypot(x[1]).powf(self.exponent)
    }

    pub fn growth_exponent(&self) -> f64 {
        self.exponent
    }

    pub fn parameters(&self) -> [f64; 2] {
        [self.coefficient, self.exponent]
    }

    pub fn sample(&self, grid: &Grid2D) -> Vec<f64> {
        grid.sample(|x| self.evaluate(x))
    }
}

/// External vector potential: a Gaussian-damped rotation field plus a constant shift,
/// `A_e(x) = (b/2)·exp(−|x|²/(2w²))·(−x₂, x₁) + a₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExternalField {
    pub strength: f64,
    pub width: f64,
    pub offset: [f64; 2],
}

impl ExternalField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn damped_rotation(strength: f64, width: f64) -> Self {
        Self { strength, width, offset: [0.0, 0.0] }
    }

    pub fn with_offset(mut self, offset: [f64; 2]) -> Self {
        self.offset = offset;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.strength == 0.0 && self.offset == [0.0, 0.0]
    }

    pub fn evaluate(&self, x: [f64; 2]) -> [f64; 2] {
        let mut a = self.offset;
        if self.strength != 0.0 {
            let g = 0.5 * self.strength * (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * self.width * self.width)).exp();
            a[0] -= g * x[1];
            a[1] += g * x[0];
        }
        a
    }

    pub fn sample(&self, grid: &Grid2D) -> Result<VectorField2D> {
        if self.strength != 0.0 && !(self.width > 0.0) {
            return Err(Error::InvalidArgument("external field width must be positive".into()));
        }
        Ok(VectorField2D::from_fn(*grid, |x| self.evaluate(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trap_growth_checked() {
        assert!(Trap::power(1.0, 1.0).is_err());
        assert!(Trap::power(-1.0, 2.0).is_err());
        assert!((Trap::harmonic().evaluate([1.0, 1.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_field_is_azimuthal() {
        let a = ExternalField::damped_rotation(2.0, 1.0);
        let x = [0.3, -0.7];
        let v = a.evaluate(x);
        assert!((v[0] * x[0] + v[1] * x[1]).abs() < 1e-15);
    }
}
