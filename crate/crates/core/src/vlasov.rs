//! Phase-space densities `m(x, p)` with `0 ≤ m ≤ 1` and the Vlasov energy
//!
//! ```text
//! E[m] = (2π)^{-2} ∬ |p + A_e(x) + βA[ρ_m](x)|² m(x,p) dx dp + ∫ V ρ_m,
//! ρ_m(x) = (2π)^{-2} ∫ m(x,p) dp.
//! ```
//!
//! For a fixed density the minimiser in `p` is the indicator of a ball of radius
//! `√(4πρ(x))` centred at `−A_e(x) − βA[ρ](x)`, which is stored per `x` node as
//! a (centre, radius) pair instead of a dense 4D array.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{cell_fraction, disc_rect_area};
use crate::grid::{DensityField, Grid2D, VectorField2D};
use crate::kernels::{gauge_field, Kernel};
use crate::potentials::{ExternalField, Trap};

const TWO_PI_SQ: f64 = 4.0 * PI * PI;

#[derive(Debug, Clone)]
pub struct VlasovSetup {
    pub trap: Trap,
    pub external: ExternalField,
    pub beta: f64,
    pub kernel: Kernel,
}

impl VlasovSetup {
    /// `A_e + βA[ρ]` on the grid of `rho`.
    pub fn total_field(&self, rho: &DensityField) -> Result<VectorField2D> {
        let a_e = self.external.sample(&rho.grid)?;
        if self.beta == 0.0 {
            return Ok(a_e);
        }
        let a = gauge_field(rho, &self.kernel)?;
        a_e.add_scaled(&a, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// `m(x, ·) = height·1{|p − centre(x)|² ≤ radius_sq(x)}` with boundary cells
    /// carrying their exact covered fraction.
    Balls { height: f64, centers: Vec<[f64; 2]>, radius_sq: Vec<f64> },
    /// Nodal values, `x` index slow, `p` index fast.
    Dense { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDensity {
    pub x_grid: Grid2D,
    pub p_grid: Grid2D,
    pub storage: Storage,
}

impl PhaseSpaceDensity {
    pub fn zeros(x_grid: Grid2D, p_grid: Grid2D) -> Self {
        Self { x_grid, p_grid, storage: Storage::Dense { values: vec![0.0; x_grid.len() * p_grid.len()] } }
    }

    pub fn from_fn<F: Fn([f64; 2], [f64; 2]) -> f64 + Sync>(x_grid: Grid2D, p_grid: Grid2D, f: F) -> Self {
        let values = (0..x_grid.len())
            .into_par_iter()
            .flat_map_iter(|kx| {
                let x = x_grid.point(kx);
                let f = &f;
                (0..p_grid.len()).map(move |kp| f(x, p_grid.point(kp)))
            })
            .collect();
        Self { x_grid, p_grid, storage: Storage::Dense { values } }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let storage = match &self.storage {
            Storage::Balls { height, centers, radius_sq } => {
                Storage::Balls { height: height * factor, centers: centers.clone(), radius_sq: radius_sq.clone() }
            }
            Storage::Dense { values } => Storage::Dense { values: values.iter().map(|v| v * factor).collect() },
        };
        Self { storage, ..self.clone() }
    }

    /// Materialise the nodal values.
    pub fn to_dense(&self) -> Self {
        let np = self.p_grid.len();
        let mut values = vec![0.0; self.x_grid.len() * np];
        values.par_chunks_mut(np).enumerate().for_each(|(kx, row)| {
            self.for_each_cell(kx, |kp, v| row[kp] = v);
        });
        Self { storage: Storage::Dense { values }, ..self.clone() }
    }

    /// Visit the (possibly) nonzero cells at `x` node `kx`.
    fn for_each_cell<F: FnMut(usize, f64)>(&self, kx: usize, mut f: F) {
        let pg = self.p_grid;
        match &self.storage {
            Storage::Dense { values } => {
                let np = pg.len();
                for (kp, v) in values[kx * np..(kx + 1) * np].iter().enumerate() {
                    f(kp, *v);
                }
            }
            Storage::Balls { height, centers, radius_sq } => {
                let r2 = radius_sq[kx];
                if r2 <= 0.0 {
                    return;
                }
                let r = r2.sqrt();
                let c = centers[kx];
                let h = pg.spacing();
                let span = |lo: f64, hi: f64| -> (usize, usize) {
                    let a = ((lo + pg.half_width) / h).floor().max(0.0) as usize;
                    let b = (((hi + pg.half_width) / h).ceil().max(0.0) as usize).min(pg.n);
                    (a.min(pg.n), b)
                };
                let (ix0, ix1) = span(c[0] - r, c[0] + r);
                let (iy0, iy1) = span(c[1] - r, c[1] + r);
                for iy in iy0..iy1 {
                    for ix in ix0..ix1 {
                        let p = [pg.coord(ix), pg.coord(iy)];
                        let frac = cell_fraction(c, r, p, h);
                        if frac > 0.0 {
                            f(pg.index(ix, iy), height * frac);
                        }
                    }
                }
            }
        }
    }

    /// `∬ m dx dp` by quadrature.
    pub fn total_mass(&self) -> f64 {
        self.position_values().iter().sum::<f64>() * self.x_grid.cell_area() * TWO_PI_SQ
    }

    fn position_values(&self) -> Vec<f64> {
        let pg = self.p_grid;
        let hp2 = pg.cell_area();
        (0..self.x_grid.len())
            .into_par_iter()
            .map(|kx| match &self.storage {
                Storage::Balls { height, centers, radius_sq } => {
                    let r = radius_sq[kx].max(0.0).sqrt();
                    let w = pg.half_width;
                    height * disc_rect_area(centers[kx], r, -w, w, -w, w) / TWO_PI_SQ
                }
                Storage::Dense { .. } => {
                    let mut acc = 0.0;
                    self.for_each_cell(kx, |_, v| acc += v);
                    acc * hp2 / TWO_PI_SQ
                }
            })
            .collect()
    }
}

/// `ρ_m(x) = (2π)^{-2} ∫ m(x, p) dp`.
///
/// Negative nodal values of an arbitrary dense `m` are clipped to zero in the
/// returned density.
pub fn position_marginal(m: &PhaseSpaceDensity) -> DensityField {
    let values = m.position_values().into_iter().map(|v| v.max(0.0)).collect();
    DensityField { grid: m.x_grid, values }
}

fn balls(rho: &DensityField, setup: &VlasovSetup, p_grid: Grid2D, height: f64) -> Result<PhaseSpaceDensity> {
    let field = setup.total_field(rho)?;
    let centers: Vec<[f64; 2]> = (0..rho.grid.len()).map(|k| [-field.x[k], -field.y[k]]).collect();
    let radius_sq: Vec<f64> = rho.values.iter().map(|r| 4.0 * PI * r / height).collect();
    let needed = centers
        .iter()
        .zip(&radius_sq)
        .filter(|(_, r2)| **r2 > 0.0)
        .map(|(c, r2)| c[0].abs().max(c[1].abs()) + r2.sqrt())
        .fold(0.0, f64::max);
    if needed > p_grid.half_width {
        return Err(Error::MomentumBoxTooSmall { needed, available: p_grid.half_width });
    }
    Ok(PhaseSpaceDensity { x_grid: rho.grid, p_grid, storage: Storage::Balls { height, centers, radius_sq } })
}

/// `m(x,p) = 1{|p + A_e(x) + βA[ρ](x)|² ≤ 4πρ(x)}`.
pub fn build_minimizer(rho: &DensityField, setup: &VlasovSetup, p_grid: Grid2D) -> Result<PhaseSpaceDensity> {
    balls(rho, setup, p_grid, 1.0)
}

/// Minimiser under the relaxed bound `m ≤ 1 + ε`: height `1 + ε` on the ball of
/// squared radius `4πρ/(1 + ε)`.
pub fn build_relaxed_minimizer(
    rho: &DensityField,
    setup: &VlasovSetup,
    p_grid: Grid2D,
    eps: f64,
) -> Result<PhaseSpaceDensity> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be nonnegative, got {eps}")));
    }
    balls(rho, setup, p_grid, 1.0 + eps)
}

/// Kinetic and potential parts of the Vlasov energy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VlasovEnergy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn vlasov_energy(m: &PhaseSpaceDensity, setup: &VlasovSetup) -> Result<VlasovEnergy> {
    let rho = position_marginal(m);
    let field = setup.total_field(&rho)?;
    let pg = m.p_grid;
    let per_x: Vec<f64> = (0..m.x_grid.len())
        .into_par_iter()
        .map(|kx| {
            let s = field.at(kx);
            let mut acc = 0.0;
            m.for_each_cell(kx, |kp, v| {
                let p = pg.point(kp);
                let (a, b) = (p[0] + s[0], p[1] + s[1]);
                acc += v * (a * a + b * b);
            });
            acc
        })
        .collect();
    let kinetic = per_x.iter().sum::<f64>() * pg.cell_area() * m.x_grid.cell_area() / TWO_PI_SQ;
    let potential = m
        .x_grid
        .points()
        .zip(&rho.values)
        .map(|(x, r)| setup.trap.evaluate(x) * r)
        .sum::<f64>()
        * m.x_grid.cell_area();
    Ok(VlasovEnergy { kinetic, potential, total: kinetic + potential })
}

/// `t(p) = ∫ 1{|p + A_e(x) + βA[ρ](x)|² ≤ 4πρ(x)} dx`, evaluated pointwise in `x`.
#[derive(Debug, Clone)]
pub struct MomentumDistribution {
    centers: Vec<[f64; 2]>,
    radius_sq: Vec<f64>,
    cell_area: f64,
}

impl MomentumDistribution {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let count = self
            .centers
            .iter()
            .zip(&self.radius_sq)
            .filter(|(c, r2)| {
                let (a, b) = (p[0] - c[0], p[1] - c[1]);
                **r2 > 0.0 && a * a + b * b <= **r2
            })
            .count();
        count as f64 * self.cell_area
    }

    pub fn eval_many(&self, ps: &[[f64; 2]]) -> Vec<f64> {
        ps.par_iter().map(|p| self.eval(*p)).collect()
    }

    pub fn on_grid(&self, p_grid: &Grid2D) -> Vec<f64> {
        let ps: Vec<[f64; 2]> = p_grid.points().collect();
        self.eval_many(&ps)
    }

    /// Smallest radius beyond which `t` vanishes.
    pub fn support_radius(&self) -> f64 {
        self.centers
            .iter()
            .zip(&self.radius_sq)
            .filter(|(_, r2)| **r2 > 0.0)
            .map(|(c, r2)| c[0].hypot(c[1]) + r2.sqrt())
            .fold(0.0, f64::max)
    }
}

pub fn momentum_distribution(rho: &DensityField, setup: &VlasovSetup) -> Result<MomentumDistribution> {
    let field = setup.total_field(rho)?;
    Ok(MomentumDistribution {
        centers: (0..rho.grid.len()).map(|k| [-field.x[k], -field.y[k]]).collect(),
        radius_sq: rho.values.iter().map(|r| 4.0 * PI * r).collect(),
        cell_area: rho.grid.cell_area(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliReport {
    pub max: f64,
    pub min: f64,
    pub mass_ratio: f64,
    pub violations: usize,
}

/// Extremes of `m`, `∬m/(2π)²`, and the number of nodes violating `0 ≤ m ≤ 1`.
pub fn pauli_and_mass_report(m: &PhaseSpaceDensity) -> PauliReport {
    const SLACK: f64 = 1e-12;
    let np = m.p_grid.len();
    let per_x: Vec<(f64, f64, usize, usize)> = (0..m.x_grid.len())
        .into_par_iter()
        .map(|kx| {
            let (mut hi, mut lo, mut bad, mut seen) = (f64::NEG_INFINITY, f64::INFINITY, 0, 0);
            m.for_each_cell(kx, |_, v| {
                hi = hi.max(v);
                lo = lo.min(v);
                seen += 1;
                if !(-SLACK..=1.0 + SLACK).contains(&v) {
                    bad += 1;
                }
            });
            (hi, lo, bad, seen)
        })
        .collect();
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut violations = 0;
    for (hi, lo, bad, seen) in per_x {
        max = max.max(hi);
        min = min.min(lo);
        violations += bad;
        // Cells not visited hold zero.
        if seen < np {
            max = max.max(0.0);
            min = min.min(0.0);
        }
    }
    PauliReport { max, min, mass_ratio: m.total_mass() / TWO_PI_SQ, violations }
}
