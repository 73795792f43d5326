//! Orthonormal orbital families on a grid, i.e. Slater determinants described by
//! their one-body orbitals.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid2D};

pub type Orbital = Vec<Complex64>;

/// `⟨a, b⟩ = Σ ā·b h²`.
pub fn inner(grid: &Grid2D, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * grid.cell_area()
}

pub fn norm_sq(grid: &Grid2D, a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>() * grid.cell_area()
}

/// Normalised one-dimensional Hermite function `h_k(t)`.
pub fn hermite_function(k: usize, t: f64) -> f64 {
    let g = std::f64::consts::PI.powf(-0.25) * (-0.5 * t * t).exp();
    let mut prev = 0.0;
    let mut cur = g;
    for j in 0..k {
        let next = (2.0 / (j as f64 + 1.0)).sqrt() * t * cur - (j as f64 / (j as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Product Hermite function `σ^{-1} h_a((y₁−c₁)/σ) h_b((y₂−c₂)/σ)` sampled on the grid.
pub fn hermite_gaussian(grid: &Grid2D, modes: (usize, usize), sigma: f64, center: [f64; 2]) -> Orbital {
    grid.points()
        .map(|y| {
            let v = hermite_function(modes.0, (y[0] - center[0]) / sigma)
                * hermite_function(modes.1, (y[1] - center[1]) / sigma)
                / sigma;
            Complex64::new(v, 0.0)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SlaterState {
    pub grid: Grid2D,
    pub orbitals: Vec<Orbital>,
}

impl SlaterState {
    /// Wrap orbitals after checking that their Gram matrix is the identity to 1e-8.
    pub fn new(grid: Grid2D, orbitals: Vec<Orbital>) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::InvalidArgument("a Slater state needs at least one orbital".into()));
        }
        if let Some(o) = orbitals.iter().find(|o| o.len() != grid.len()) {
            return Err(Error::GridMismatch(format!("orbital of {} values on {} nodes", o.len(), grid.len())));
        }
        let s = Self { grid, orbitals };
        let deviation = s.gram_deviation();
        if deviation > 1e-8 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(s)
    }

    /// Orthonormalise by two passes of modified Gram-Schmidt.
    pub fn orthonormalized(grid: Grid2D, mut functions: Vec<Orbital>) -> Result<Self> {
        for _ in 0..2 {
            for i in 0..functions.len() {
                let (done, rest) = functions.split_at_mut(i);
                let f = &mut rest[0];
                for q in done.iter() {
                    let c = inner(&grid, q, f);
                    for (v, w) in f.iter_mut().zip(q) {
                        *v -= c * w;
                    }
                }
                let nrm = norm_sq(&grid, f).sqrt();
                if nrm < 1e-12 {
                    return Err(Error::InvalidArgument("linearly dependent orbitals".into()));
                }
                f.iter_mut().for_each(|v| *v /= nrm);
            }
        }
        Self::new(grid, functions)
    }

    pub fn n(&self) -> usize {
        self.orbitals.len()
    }

    pub fn gram(&self) -> DMatrix<Complex64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| inner(&self.grid, &self.orbitals[i], &self.orbitals[j]))
    }

    /// `max_{jk} |⟨ψ_j, ψ_k⟩ − δ_jk|`.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `ρ_γ = Σ_j |ψ_j|²`.
    pub fn density(&self) -> DensityField {
        let mut values = vec![0.0; self.grid.len()];
        for o in &self.orbitals {
            for (v, p) in values.iter_mut().zip(o) {
                *v += p.norm_sqr();
            }
        }
        DensityField { grid: self.grid, values }
    }

    /// Orbitals `φ_j = Σ_k U_kj ψ_k`; the one-body density matrix is unchanged
    /// when `U` is unitary.
    pub fn mixed(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        let n = self.n();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::InvalidArgument(format!("mixing matrix must be {n}×{n}")));
        }
        let orbitals = (0..n)
            .map(|j| {
                (0..self.grid.len())
                    .map(|p| (0..n).map(|k| u[(k, j)] * self.orbitals[k][p]).sum())
                    .collect()
            })
            .collect();
        Self::new(self.grid, orbitals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_family_is_orthonormal() {
        let g = Grid2D::new(64, 6.0).unwrap();
        let fs = vec![
            hermite_gaussian(&g, (0, 0), 0.8, [0.0, 0.0]),
            hermite_gaussian(&g, (1, 0), 0.8, [0.0, 0.0]),
            hermite_gaussian(&g, (2, 1), 0.8, [0.0, 0.0]),
        ];
        assert!(SlaterState::new(g, fs).is_ok());
    }

    #[test]
    fn non_orthonormal_rejected() {
        let g = Grid2D::new(32, 5.0).unwrap();
        let a = hermite_gaussian(&g, (0, 0), 1.0, [0.0, 0.0]);
        let b = hermite_gaussian(&g, (0, 0), 1.0, [0.3, 0.0]);
        assert!(matches!(SlaterState::new(g, vec![a.clone(), b.clone()]), Err(Error::NotOrthonormal { .. })));
        let s = SlaterState::orthonormalized(g, vec![a, b]).unwrap();
        assert!(s.gram_deviation() < 1e-12);
        assert!((s.density().mass() - 2.0).abs() < 1e-12);
    }
}
