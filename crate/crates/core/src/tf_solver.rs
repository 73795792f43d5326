//! Thomas-Fermi minimisation `min {2π∫ρ² + ∫Vρ : ρ ≥ 0, ∫ρ = m}`.
//!
//! The minimiser is the bathtub profile `ρ = (λ − V)_+/(4π)`; only the
//! multiplier `λ` needs solving for, which is a monotone scalar problem.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid2D};
use crate::potentials::Trap;

#[derive(Debug, Clone)]
pub struct TFSolution {
    pub rho: DensityField,
    pub lambda: f64,
    pub energy: f64,
    pub mass: f64,
}

/// Scalar summary of a [`TFSolution`], the part written to JSON.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TFSummary {
    pub lambda: f64,
    pub energy: f64,
    pub mass: f64,
    pub grid: Grid2D,
}

impl TFSolution {
    pub fn summary(&self) -> TFSummary {
        TFSummary { lambda: self.lambda, energy: self.energy, mass: self.mass, grid: self.rho.grid }
    }
}

/// `2π∫ρ² + ∫Vρ` by the midpoint rule.
pub fn tf_energy(rho: &DensityField, trap: &Trap) -> f64 {
    let g = rho.grid;
    let terms: Vec<f64> = rho
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &r)| 2.0 * PI * r * r + trap.evaluate(g.point(k)) * r)
        .collect();
    terms.iter().sum::<f64>() * g.cell_area()
}

fn bathtub_mass(potential: &[f64], lambda: f64, area: f64) -> f64 {
    potential.iter().map(|v| (lambda - v).max(0.0)).sum::<f64>() * area / (4.0 * PI)
}

/// Bisection on `λ ↦ ∫(λ − V)_+/(4π)` until the mass error drops below `tol`.
pub fn solve_tf(trap: &Trap, mass: f64, grid: Grid2D, tol: f64) -> Result<TFSolution> {
    trap.validate()?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidArgument(format!("target mass must be positive, got {mass}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let potential = trap.sample(&grid);
    let area = grid.cell_area();
    let v_min = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (v_min, v_min + 4.0 * PI * mass / area);
    if bathtub_mass(&potential, hi, area) < mass {
        return Err(Error::NoBracket(format!("mass {mass} unreachable on the grid")));
    }
    let mut lambda = hi;
    let mut err = f64::INFINITY;
    for _ in 0..400 {
        lambda = 0.5 * (lo + hi);
        err = bathtub_mass(&potential, lambda, area) - mass;
        if err.abs() < tol || hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
        if err < 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }
    if err.abs() >= tol {
        return Err(Error::NoConvergence { iterations: 400, residual: err.abs() });
    }
    let values: Vec<f64> = potential.iter().map(|v| (lambda - v).max(0.0) / (4.0 * PI)).collect();
    if (0..grid.len()).any(|k| grid.is_boundary(k) && values[k] > 0.0) {
        return Err(Error::DomainTooSmall(format!(
            "bathtub support at λ = {lambda} reaches the edge of the ±{} box",
            grid.half_width
        )));
    }
    let rho = DensityField::new(grid, values)?;
    let energy = tf_energy(&rho, trap);
    Ok(TFSolution { mass: rho.mass(), rho, lambda, energy })
}

/// Lower bound `(1 − 2ε)(1 − γ)·e_TF` for the problem with the Pauli bound relaxed
/// to `1 + ε` and the mass lowered to `1 − γ`.
pub fn perturbed_infimum_bound(e_tf: f64, eps: f64, gamma: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) || !(0.0..0.5).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ eps, gamma < 1/2, got eps = {eps}, gamma = {gamma}"
        )));
    }
    Ok((1.0 - 2.0 * eps) * (1.0 - gamma) * e_tf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn harmonic(n: usize) -> TFSolution {
        solve_tf(&Trap::harmonic(), 1.0, Grid2D::new(n, 2.0).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn energy_of_zero_and_uniform_disc() {
        let g = Grid2D::new(400, 1.5).unwrap();
        assert_eq!(tf_energy(&DensityField::zeros(g), &Trap::harmonic()), 0.0);
        let disc = DensityField::from_fn(g, |[x, y]| if x * x + y * y <= 1.0 { 1.0 / PI } else { 0.0 }).unwrap();
        let kinetic = 2.0 * PI * disc.l2_norm_sq();
        // 2π·(1/π)²·π = 2
        assert!((kinetic - 2.0).abs() < 1e-3);
    }

    #[test]
    fn harmonic_multiplier() {
        let s = harmonic(256);
        assert!((s.lambda - 2.0 * 2f64.sqrt()).abs() < 1e-4);
        assert!((s.mass - 1.0).abs() < 1e-12);
        for (k, v) in s.rho.values.iter().enumerate() {
            let want = (s.lambda - Trap::harmonic().evaluate(s.rho.grid.point(k))).max(0.0) / (4.0 * PI);
            assert!((v - want).abs() <= 1e-15);
        }
    }

    #[test]
    fn small_box_rejected() {
        let r = solve_tf(&Trap::harmonic(), 1.0, Grid2D::new(64, 1.2).unwrap(), 1e-10);
        assert!(matches!(r, Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn vanishing_mass_limit() {
        let s = solve_tf(&Trap::harmonic(), 1e-8, Grid2D::new(64, 2.0).unwrap(), 1e-14).unwrap();
        let v_min = Trap::harmonic().evaluate([2.0 / 64.0, 2.0 / 64.0]);
        assert!(s.lambda - v_min < 1e-2);
        assert!(s.energy < 1e-6);
    }

    #[test]
    fn monotone_in_mass() {
        let g = Grid2D::new(128, 2.5).unwrap();
        let sols: Vec<_> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&m| solve_tf(&Trap::harmonic(), m, g, 1e-12).unwrap())
            .collect();
        assert!(sols.windows(2).all(|w| w[1].lambda > w[0].lambda && w[1].energy > w[0].energy));
    }

    #[test]
    fn perturbations_do_not_lower_energy() {
        let s = harmonic(96);
        let g = s.rho.grid;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            // Move mass between two random nodes, keeping positivity and total mass.
            let mut v = s.rho.values.clone();
            let from = loop {
                let k = rng.gen_range(0..g.len());
                if v[k] > 0.0 {
                    break k;
                }
            };
            let to = rng.gen_range(0..g.len());
            let amount = rng.gen_range(0.0..1.0) * v[from];
            v[from] -= amount;
            v[to] += amount;
            let e = tf_energy(&DensityField::new(g, v).unwrap(), &Trap::harmonic());
            assert!(e >= s.energy - 1e-12);
        }
    }

    #[test]
    fn infimum_bound_examples() {
        assert_eq!(perturbed_infimum_bound(2.0, 0.0, 0.0).unwrap(), 2.0);
        assert!((perturbed_infimum_bound(2.0, 0.1, 0.0).unwrap() - 1.6).abs() < 1e-15);
        assert_eq!(perturbed_infimum_bound(2.0, 0.0, 0.25).unwrap(), 1.5);
        assert!(perturbed_infimum_bound(2.0, 0.5, 0.0).is_err());
    }
}
