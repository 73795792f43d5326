//! Squeezed coherent states `F_{x,p}` and Husimi functions of Slater determinants.
//!
//! `F_{x,p}(y) = ħ_x^{-1/2} f((y − x)/√ħ_x) e^{ip·y/ħ}` with the normalised
//! Gaussian `f(z) = π^{-1/2} e^{-|z|²/2}` and `ħ = √ħ_x √ħ_p`. Everything here
//! factorises over the two coordinates, which keeps overlaps cheap.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::slater::{Orbital, SlaterState};

/// Gaussian tails beyond this many `√ħ_x` are dropped from overlaps.
const TAIL: f64 = 8.0;

pub type PhasePoint = ([f64; 2], [f64; 2]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedScales {
    pub hbar_x: f64,
    pub hbar_p: f64,
    pub hbar: f64,
}

impl SqueezedScales {
    pub fn new(hbar_x: f64, hbar_p: f64) -> Result<Self> {
        if !(hbar_x > 0.0 && hbar_p > 0.0 && hbar_x.is_finite() && hbar_p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "squeezing scales must be positive, got ħ_x = {hbar_x}, ħ_p = {hbar_p}"
            )));
        }
        Ok(Self { hbar_x, hbar_p, hbar: hbar_x.sqrt() * hbar_p.sqrt() })
    }

    pub fn isotropic(hbar: f64) -> Result<Self> {
        Self::new(hbar, hbar)
    }

    /// One coordinate factor of `F_{x,p}`: `(πħ_x)^{-1/4} e^{-(t−c)²/(2ħ_x)} e^{iqt/ħ}`.
    #[inline]
    fn factor(&self, t: f64, c: f64, q: f64) -> Complex64 {
        let amp = (PI * self.hbar_x).powf(-0.25) * (-(t - c) * (t - c) / (2.0 * self.hbar_x)).exp();
        Complex64::from_polar(amp, q * t / self.hbar)
    }
}

/// The state is resolved when `√ħ_x` spans at least four grid cells.
pub fn check_resolution(grid: &Grid2D, scales: &SqueezedScales) -> Result<()> {
    let h = grid.spacing();
    if scales.hbar_x.sqrt() < 4.0 * h {
        return Err(Error::UnderResolved(format!(
            "coherent width √ħ_x = {:.4e} spans fewer than 4 cells of {h:.4e}",
            scales.hbar_x.sqrt()
        )));
    }
    Ok(())
}

fn check_momentum(grid: &Grid2D, p: [f64; 2], scales: &SqueezedScales) -> Result<()> {
    let nyquist = PI / grid.spacing();
    let k = p[0].abs().max(p[1].abs()) / scales.hbar;
    if k > nyquist {
        return Err(Error::UnderResolved(format!(
            "momentum {p:?} has wavenumber {k:.4e} beyond the grid Nyquist {nyquist:.4e}"
        )));
    }
    Ok(())
}

/// Index range of nodes within the Gaussian window around `c`.
fn window(grid: &Grid2D, c: f64, scales: &SqueezedScales) -> std::ops::Range<usize> {
    let h = grid.spacing();
    let reach = TAIL * scales.hbar_x.sqrt();
    let lo = ((c - reach + grid.half_width) / h - 0.5).ceil().max(0.0) as usize;
    let hi = (((c + reach + grid.half_width) / h - 0.5).floor() + 1.0).clamp(0.0, grid.n as f64) as usize;
    lo.min(hi)..hi
}

/// Sample `F_{x,p}` on the grid.
pub fn coherent_state(grid: &Grid2D, x: [f64; 2], p: [f64; 2], scales: &SqueezedScales) -> Orbital {
    grid.points()
        .map(|y| scales.factor(y[0], x[0], p[0]) * scales.factor(y[1], x[1], p[1]))
        .collect()
}

/// `⟨F_{x,p}, ψ⟩` by the midpoint rule over the Gaussian window.
pub fn coherent_overlap(
    psi: &[Complex64],
    grid: &Grid2D,
    x: [f64; 2],
    p: [f64; 2],
    scales: &SqueezedScales,
) -> Result<Complex64> {
    check_resolution(grid, scales)?;
    check_momentum(grid, p, scales)?;
    Ok(overlap_unchecked(psi, grid, x, p, scales))
}

fn overlap_unchecked(psi: &[Complex64], grid: &Grid2D, x: [f64; 2], p: [f64; 2], scales: &SqueezedScales) -> Complex64 {
    let wx = window(grid, x[0], scales);
    let wy = window(grid, x[1], scales);
    let gx: Vec<Complex64> = wx.clone().map(|i| scales.factor(grid.coord(i), x[0], p[0]).conj()).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for iy in wy {
        let gy = scales.factor(grid.coord(iy), x[1], p[1]).conj();
        let row = &psi[iy * grid.n..(iy + 1) * grid.n];
        let s: Complex64 = wx.clone().zip(&gx).map(|(ix, g)| g * row[ix]).sum();
        acc += gy * s;
    }
    acc * grid.cell_area()
}

/// `⟨F_{x,p}, ψ⟩` for every node `p` of `p_grid`, reusing the separable structure.
pub fn overlaps_on_p_grid(
    psi: &[Complex64],
    grid: &Grid2D,
    x: [f64; 2],
    p_grid: &Grid2D,
    scales: &SqueezedScales,
) -> Result<Vec<Complex64>> {
    check_resolution(grid, scales)?;
    check_momentum(grid, [p_grid.coord(0), p_grid.coord(0)], scales)?;
    let wx = window(grid, x[0], scales);
    let wy = window(grid, x[1], scales);
    let np = p_grid.n;
    // partial[a][iy] = Σ_ix conj(g(y_ix; x₁, q_a)) ψ(ix, iy)
    let partial: Vec<Vec<Complex64>> = (0..np)
        .map(|a| {
            let q = p_grid.coord(a);
            let gx: Vec<Complex64> = wx.clone().map(|i| scales.factor(grid.coord(i), x[0], q).conj()).collect();
            wy.clone()
                .map(|iy| {
                    let row = &psi[iy * grid.n..(iy + 1) * grid.n];
                    wx.clone().zip(&gx).map(|(ix, g)| g * row[ix]).sum()
                })
                .collect()
        })
        .collect();
    let area = grid.cell_area();
    let mut out = vec![Complex64::new(0.0, 0.0); p_grid.len()];
    for b in 0..np {
        let q = p_grid.coord(b);
        let gy: Vec<Complex64> = wy.clone().map(|i| scales.factor(grid.coord(i), x[1], q).conj()).collect();
        for a in 0..np {
            let s: Complex64 = partial[a].iter().zip(&gy).map(|(u, g)| u * g).sum();
            out[p_grid.index(a, b)] = s * area;
        }
    }
    Ok(out)
}

/// `G_{ħ_p}(p) = (πħ_p)^{-1/2} e^{-|p|²/(2ħ_p)}`, the ħ-Fourier transform of `F_{0,0}`.
pub fn fourier_of_ground(scales: &SqueezedScales, p: [f64; 2]) -> f64 {
    (PI * scales.hbar_p).powf(-0.5) * (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * scales.hbar_p)).exp()
}

/// Unitary ħ-Fourier transform `(2πħ)^{-1} ∫ ψ(y) e^{-ip·y/ħ} dy` by quadrature.
pub fn hbar_fourier(psi: &[Complex64], grid: &Grid2D, p: [f64; 2], hbar: f64) -> Complex64 {
    let n = grid.n;
    let ex: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, -p[0] * grid.coord(i) / hbar)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for iy in 0..n {
        let ey = Complex64::from_polar(1.0, -p[1] * grid.coord(iy) / hbar);
        let row = &psi[iy * n..(iy + 1) * n];
        acc += ey * row.iter().zip(&ex).map(|(v, e)| v * e).sum::<Complex64>();
    }
    acc * grid.cell_area() / (2.0 * PI * hbar)
}

/// Discrete ħ-Fourier transform of `F_{0,0}` sampled on `grid`, for comparison with
/// [`fourier_of_ground`].
pub fn discrete_fourier_of_ground(scales: &SqueezedScales, grid: &Grid2D, p: [f64; 2]) -> Complex64 {
    let f = coherent_state(grid, [0.0, 0.0], [0.0, 0.0], scales);
    hbar_fourier(&f, grid, p, scales.hbar)
}

/// A product grid of phase-space points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub x: Grid2D,
    pub p: Grid2D,
}

/// `(2πħ)^{-2} ∬ |⟨F_{x,p}, u⟩|² dx dp` over the phase grid.
pub fn resolution_of_identity_check(
    u: &[Complex64],
    grid: &Grid2D,
    scales: &SqueezedScales,
    xp: &PhaseGrid,
) -> Result<f64> {
    check_resolution(grid, scales)?;
    let per_x: Vec<f64> = (0..xp.x.len())
        .into_par_iter()
        .map(|k| {
            overlaps_on_p_grid(u, grid, xp.x.point(k), &xp.p, scales).map(|o| o.iter().map(|c| c.norm_sqr()).sum())
        })
        .collect::<Result<_>>()?;
    let total = per_x.iter().sum::<f64>() * xp.x.cell_area() * xp.p.cell_area();
    Ok(total / (2.0 * PI * scales.hbar).powi(2))
}

/// Product of the position and momentum standard deviations of `F_{x,p}` along the
/// first axis, by quadrature on `points` nodes spanning ±12√ħ_x (momentum side
/// through the discrete Fourier transform).
pub fn heisenberg_product(scales: &SqueezedScales, x: f64, p: f64, points: usize) -> f64 {
    let half = 12.0 * scales.hbar_x.sqrt();
    let h = 2.0 * half / points as f64;
    let t: Vec<f64> = (0..points).map(|i| x - half + (i as f64 + 0.5) * h).collect();
    let g: Vec<Complex64> = t.iter().map(|&s| scales.factor(s, x, p)).collect();
    let w: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
    let mass: f64 = w.iter().sum();
    let mean_x = t.iter().zip(&w).map(|(s, v)| s * v).sum::<f64>() / mass;
    let var_x = t.iter().zip(&w).map(|(s, v)| (s - mean_x).powi(2) * v).sum::<f64>() / mass;

    let mut buf = g.clone();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let k: Vec<f64> = (0..points)
        .map(|m| {
            let m = if m <= points / 2 { m as f64 } else { m as f64 - points as f64 };
            2.0 * PI * m / (points as f64 * h)
        })
        .collect();
    let wk: Vec<f64> = buf.iter().map(|v| v.norm_sqr()).collect();
    let mass_k: f64 = wk.iter().sum();
    let mean_k = k.iter().zip(&wk).map(|(a, v)| a * v).sum::<f64>() / mass_k;
    let var_k = k.iter().zip(&wk).map(|(a, v)| (a - mean_k).powi(2) * v).sum::<f64>() / mass_k;
    var_x.sqrt() * scales.hbar * var_k.sqrt()
}

fn overlaps(state: &SlaterState, z: PhasePoint, scales: &SqueezedScales) -> Result<Vec<Complex64>> {
    check_resolution(&state.grid, scales)?;
    check_momentum(&state.grid, z.1, scales)?;
    Ok(state.orbitals.iter().map(|o| overlap_unchecked(o, &state.grid, z.0, z.1, scales)).collect())
}

/// `m^(1)(x,p) = Σ_j |⟨ψ_j, F_{x,p}⟩|²`.
pub fn husimi1(state: &SlaterState, x: [f64; 2], p: [f64; 2], scales: &SqueezedScales) -> Result<f64> {
    Ok(overlaps(state, (x, p), scales)?.iter().map(|c| c.norm_sqr()).sum())
}

/// `m^(1)` on `{x} × p_grid`.
pub fn husimi1_on_p_grid(state: &SlaterState, x: [f64; 2], p_grid: &Grid2D, scales: &SqueezedScales) -> Result<Vec<f64>> {
    let mut out = vec![0.0; p_grid.len()];
    for o in &state.orbitals {
        for (v, c) in out.iter_mut().zip(overlaps_on_p_grid(o, &state.grid, x, p_grid, scales)?) {
            *v += c.norm_sqr();
        }
    }
    Ok(out)
}

/// `Σ_j ⟨F_{z1}, ψ_j⟩⟨ψ_j, F_{z2}⟩`, the one-body density matrix between two
/// coherent states.
pub fn exchange_kernel(state: &SlaterState, z1: PhasePoint, z2: PhasePoint, scales: &SqueezedScales) -> Result<Complex64> {
    let a = overlaps(state, z1, scales)?;
    let b = overlaps(state, z2, scales)?;
    Ok(a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum())
}

/// `m^(2)(z1, z2) = m^(1)(z1)m^(1)(z2) − |Σ_j ⟨F_{z1}, ψ_j⟩⟨ψ_j, F_{z2}⟩|²`.
pub fn husimi2(state: &SlaterState, z1: PhasePoint, z2: PhasePoint, scales: &SqueezedScales) -> Result<f64> {
    let a = overlaps(state, z1, scales)?;
    let b = overlaps(state, z2, scales)?;
    let m1 = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let m2 = b.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let ex: Complex64 = a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum();
    Ok(m1 * m2 - ex.norm_sqr())
}

/// Both sides of the position and momentum marginal identities
///
/// ```text
/// (2π)^{-2} ∫ m^(1)(x,p) dp = ħ² (ρ ∗ |F_{0,0}|²)(x)
/// (2π)^{-2} ∫ m^(1)(x,p) dx = ħ² (t ∗ |G|²)(p),   t = Σ_j |F_ħψ_j|²
/// ```
///
/// with the left sides integrated over `quad` and the sup discrepancies taken
/// over its nodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginalReport {
    pub position_discrepancy: f64,
    pub momentum_discrepancy: f64,
    pub normalization: f64,
}

pub fn marginal_relation_check(state: &SlaterState, scales: &SqueezedScales, quad: &PhaseGrid) -> Result<MarginalReport> {
    if state.n() > 4 {
        return Err(Error::BudgetExceeded(format!("marginal check supports N ≤ 4, got {}", state.n())));
    }
    let grid = state.grid;
    let hbar2 = scales.hbar * scales.hbar;
    let tau2 = 4.0 * PI * PI;
    let m: Vec<Vec<f64>> = (0..quad.x.len())
        .into_par_iter()
        .map(|k| husimi1_on_p_grid(state, quad.x.point(k), &quad.p, scales))
        .collect::<Result<_>>()?;

    let rho = state.density();
    let position_discrepancy = (0..quad.x.len())
        .into_par_iter()
        .map(|k| {
            let x = quad.x.point(k);
            let lhs = m[k].iter().sum::<f64>() * quad.p.cell_area() / tau2;
            let smeared: f64 = grid
                .points()
                .zip(&rho.values)
                .map(|(y, r)| {
                    let g = scales.factor(y[0] - x[0], 0.0, 0.0) * scales.factor(y[1] - x[1], 0.0, 0.0);
                    g.norm_sqr() * r
                })
                .sum::<f64>()
                * grid.cell_area();
            (lhs - hbar2 * smeared).abs()
        })
        .reduce(|| 0.0, f64::max);

    let t: Vec<f64> = (0..quad.p.len())
        .into_par_iter()
        .map(|k| {
            let p = quad.p.point(k);
            state.orbitals.iter().map(|o| hbar_fourier(o, &grid, p, scales.hbar).norm_sqr()).sum()
        })
        .collect();
    let momentum_discrepancy = (0..quad.p.len())
        .into_par_iter()
        .map(|kp| {
            let p = quad.p.point(kp);
            let lhs = m.iter().map(|row| row[kp]).sum::<f64>() * quad.x.cell_area() / tau2;
            let smeared: f64 = quad
                .p
                .points()
                .zip(&t)
                .map(|(k, tv)| fourier_of_ground(scales, [p[0] - k[0], p[1] - k[1]]).powi(2) * tv)
                .sum::<f64>()
                * quad.p.cell_area();
            (lhs - hbar2 * smeared).abs()
        })
        .reduce(|| 0.0, f64::max);

    let total: f64 = m.iter().map(|row| row.iter().sum::<f64>()).sum::<f64>() * quad.x.cell_area() * quad.p.cell_area();
    Ok(MarginalReport {
        position_discrepancy,
        momentum_discrepancy,
        normalization: total / (2.0 * PI * scales.hbar).powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Grid2D, SqueezedScales) {
        (Grid2D::new(80, 2.5).unwrap(), SqueezedScales::new(0.08, 0.125).unwrap())
    }

    #[test]
    fn scales_relation() {
        let s = SqueezedScales::new(0.04, 0.25).unwrap();
        assert!((s.hbar - 0.1).abs() < 1e-16);
    }

    #[test]
    fn ground_overlaps_closed_form() {
        let (g, s) = setup();
        let f00 = coherent_state(&g, [0.0, 0.0], [0.0, 0.0], &s);
        let one = coherent_overlap(&f00, &g, [0.0, 0.0], [0.0, 0.0], &s).unwrap();
        assert!((one - 1.0).norm() < 1e-10);
        for (x, p) in [([0.2, -0.1], [0.3, 0.5]), ([0.5, 0.4], [-0.7, 0.1])] {
            let o = coherent_overlap(&f00, &g, x, p, &s).unwrap();
            let x2 = x[0] * x[0] + x[1] * x[1];
            let p2 = p[0] * p[0] + p[1] * p[1];
            let want = (-x2 / (4.0 * s.hbar_x) - p2 / (4.0 * s.hbar_p)).exp();
            assert!((o.norm() - want).abs() < 1e-10);
            // ⟨F_{x,p}, F_{0,0}⟩ carries the phase e^{−ip·x/(2ħ)}.
            let phase = -(p[0] * x[0] + p[1] * x[1]) / (2.0 * s.hbar);
            assert!((o - Complex64::from_polar(want, phase)).norm() < 1e-10);
        }
        let far = coherent_overlap(&f00, &g, [2.2, 2.2], [0.0, 0.0], &s).unwrap();
        assert!(far.norm() < 1e-8);
    }

    #[test]
    fn under_resolution_detected() {
        let g = Grid2D::new(16, 2.5).unwrap();
        let s = SqueezedScales::isotropic(0.1).unwrap();
        let psi = vec![Complex64::new(0.0, 0.0); g.len()];
        assert!(matches!(coherent_overlap(&psi, &g, [0.0; 2], [0.0; 2], &s), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn ground_fourier_transform() {
        let (g, s) = setup();
        assert!((fourier_of_ground(&s, [0.0, 0.0]) - (PI * s.hbar_p).powf(-0.5)).abs() < 1e-15);
        for p in [[0.0, 0.0], [0.3, -0.2], [0.6, 0.1]] {
            let d = discrete_fourier_of_ground(&s, &g, p);
            assert!((d.re - fourier_of_ground(&s, p)).abs() < 1e-6 && d.im.abs() < 1e-6);
        }
        let pg = Grid2D::new(64, 3.0).unwrap();
        let norm = pg.integrate(&pg.sample(|p| fourier_of_ground(&s, p).powi(2)));
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn heisenberg_saturation() {
        let s = SqueezedScales::new(0.05, 0.2).unwrap();
        let prod = heisenberg_product(&s, 0.3, 0.4, 512);
        assert!((prod - s.hbar / 2.0).abs() < 1e-6);
    }

    #[test]
    fn husimi2_diagonal_and_symmetry() {
        let (g, s) = setup();
        let state = SlaterState::orthonormalized(
            g,
            vec![
                crate::slater::hermite_gaussian(&g, (0, 0), 0.5, [0.0, 0.0]),
                crate::slater::hermite_gaussian(&g, (1, 0), 0.5, [0.0, 0.0]),
            ],
        )
        .unwrap();
        let z1 = ([0.1, 0.2], [0.3, -0.1]);
        let z2 = ([-0.3, 0.0], [0.1, 0.2]);
        assert!(husimi2(&state, z1, z1, &s).unwrap().abs() < 1e-10);
        let a = husimi2(&state, z1, z2, &s).unwrap();
        let b = husimi2(&state, z2, z1, &s).unwrap();
        assert!((a - b).abs() < 1e-14);
        let k12 = exchange_kernel(&state, z1, z2, &s).unwrap();
        let k21 = exchange_kernel(&state, z2, z1, &s).unwrap();
        assert!((k12 - k21.conj()).norm() < 1e-14);
    }
}
