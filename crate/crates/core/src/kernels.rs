//! The smeared two-dimensional Coulomb kernel `w_R = log|·| ∗ χ_R`, its radial
//! derivatives and the statistical gauge field `A[ρ] = ∇⊥w ∗ ρ`.
//!
//! By Newton's theorem the radial derivative of `w_R` only sees the mass of
//! `χ_R` enclosed in the disc of radius `u`, so everything here is driven by the
//! cumulative mass `M(u) = ∫_{B(0,u)} χ_R`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Convolver;
use crate::grid::{DensityField, Grid2D, VectorField2D};
use crate::quad::{bisect, Composite};

const INNER_VALUE: f64 = 1.0 / (PI * PI);
/// Subintervals of the internal cumulative-mass table on the bridge `1 ≤ s ≤ 2`.
const BRIDGE_TABLE: usize = 2048;

/// Radial profile `χ` of unit mass: `1/π²` on the unit disc, a cosine-power
/// bridge `(1/π²)(1 + cos(π(r−1)^q))/2` on `[1, 2]`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearingProfile {
    pub inner_value: f64,
    pub bridge_shape: f64,
    pub normalization_residual: f64,
}

impl SmearingProfile {
    /// Profile with an explicit bridge exponent, not necessarily of unit mass.
    pub fn with_shape(bridge_shape: f64) -> Result<Self> {
        if !(bridge_shape > 0.5 && bridge_shape.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bridge exponent must exceed 1/2 for a C¹ profile, got {bridge_shape}"
            )));
        }
        let mut p = Self { inner_value: INNER_VALUE, bridge_shape, normalization_residual: 0.0 };
        p.normalization_residual = p.mass() - 1.0;
        Ok(p)
    }

    pub fn chi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            self.inner_value
        } else if r >= 2.0 {
            0.0
        } else {
            let t = (r - 1.0).powf(self.bridge_shape);
            self.inner_value * 0.5 * (1.0 + (PI * t).cos())
        }
    }

    pub fn chi_prime(&self, r: f64) -> f64 {
        if r <= 1.0 || r >= 2.0 {
            return 0.0;
        }
        let q = self.bridge_shape;
        let t = r - 1.0;
        -self.inner_value * 0.5 * PI * q * t.powf(q - 1.0) * (PI * t.powf(q)).sin()
    }

    /// `2π ∫_a^b χ(r) r dr` for `1 ≤ a ≤ b ≤ 2`.
    fn bridge_mass_between(&self, a: f64, b: f64, rule: &Composite) -> f64 {
        2.0 * PI * rule.integrate(a, b, |r| self.chi(r) * r)
    }

    /// Mass carried by the annulus `1 ≤ |x| ≤ 2`.
    pub fn bridge_mass(&self) -> f64 {
        let rule = Composite::new(24, 64).expect("valid rule");
        self.bridge_mass_between(1.0, 2.0, &rule)
    }

    pub fn mass(&self) -> f64 {
        PI * self.inner_value + self.bridge_mass()
    }
}

/// Solve the bridge exponent for unit mass by bisection on `[1/2, max_exponent]`.
///
/// The mass is increasing in the exponent, from below `1` at `1/2` towards
/// `1/π + π/π²·3/2 > 1`; the unit-mass root sits near `2.915`, so any
/// `max_exponent` above that brackets it.
pub fn build_profile(max_exponent: f64) -> Result<SmearingProfile> {
    if !(max_exponent > 0.5) {
        return Err(Error::NoBracket(format!("empty exponent bracket [0.5, {max_exponent}]")));
    }
    let mass = |q: f64| SmearingProfile::with_shape(q).map(|p| p.mass() - 1.0).unwrap_or(-1.0);
    let lo = 0.5 + 1e-9;
    let q = bisect(mass, lo, max_exponent, 1e-14)
        .map_err(|e| Error::NoBracket(format!("unit mass not reachable with exponent ≤ {max_exponent}: {e}")))?;
    SmearingProfile::with_shape(q)
}

/// Node layout for exported kernel tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialGrid {
    pub points: usize,
    pub u_max: f64,
}

impl RadialGrid {
    /// Geometric near `0` and `2R`, linear across the bridge, geometric beyond.
    pub fn nodes(&self, r: f64) -> Vec<f64> {
        let per = (self.points / 4).max(4);
        let mut s: Vec<f64> = vec![0.0];
        let geo = |from: f64, to: f64, k: usize| -> Vec<f64> {
            let ratio = (to / from).powf(1.0 / (k - 1) as f64);
            (0..k).map(|i| from * ratio.powi(i as i32)).collect()
        };
        s.extend(geo(1e-6, 0.1, per));
        s.extend((0..2 * per).map(|i| 0.1 + 1.8 * i as f64 / (2 * per - 1) as f64));
        s.extend(geo(1e-6, 0.1, per).into_iter().map(|d| 2.0 - d));
        s.push(2.0);
        let s_max = self.u_max / r;
        if s_max > 2.0 {
            s.extend(geo(2.0, s_max, per).into_iter().skip(1));
        }
        s.retain(|v| *v * r <= self.u_max);
        s.sort_by(|a, b| a.total_cmp(b));
        s.dedup();
        s.into_iter().map(|v| v * r).collect()
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self { points: 512, u_max: 10.0 }
    }
}

/// One row of a kernel table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelRow {
    pub u: f64,
    pub m: f64,
    pub dw: f64,
    pub d2w: f64,
    pub d3w: f64,
}

/// `w_R` through its cumulative mass, tabulated in the scale-free variable `s = u/R`.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    pub r: f64,
    pub profile: SmearingProfile,
    bridge_mass: Vec<f64>,
    pub table: Vec<KernelRow>,
}

impl RadialKernel {
    /// `M(s)` on the bridge by cubic Hermite interpolation with exact slopes.
    fn scaled_mass(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return s * s / PI;
        }
        if s >= 2.0 {
            return 1.0;
        }
        let h = 1.0 / BRIDGE_TABLE as f64;
        let x = (s - 1.0) / h;
        let i = (x.floor() as usize).min(BRIDGE_TABLE - 1);
        let t = x - i as f64;
        let (s0, s1) = (1.0 + i as f64 * h, 1.0 + (i + 1) as f64 * h);
        let slope = |v: f64| 2.0 * PI * v * self.profile.chi(v);
        let (m0, m1) = (self.bridge_mass[i], self.bridge_mass[i + 1]);
        let (d0, d1) = (slope(s0) * h, slope(s1) * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * m0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * m1 + (t3 - t2) * d1
    }

    pub fn chi_r(&self, u: f64) -> f64 {
        self.profile.chi(u / self.r) / (self.r * self.r)
    }

    pub fn chi_r_prime(&self, u: f64) -> f64 {
        self.profile.chi_prime(u / self.r) / (self.r * self.r * self.r)
    }

    /// Cumulative mass `M(u) = ∫_{B(0,u)} χ_R`.
    pub fn mass(&self, u: f64) -> f64 {
        self.scaled_mass(u / self.r)
    }

    pub fn dw(&self, u: f64) -> f64 {
        let s = u / self.r;
        if s <= 1.0 {
            u / (PI * self.r * self.r)
        } else if s >= 2.0 {
            1.0 / u
        } else {
            self.scaled_mass(s) / u
        }
    }

    pub fn d2w(&self, u: f64) -> f64 {
        let s = u / self.r;
        if s <= 1.0 {
            1.0 / (PI * self.r * self.r)
        } else if s >= 2.0 {
            -1.0 / (u * u)
        } else {
            -self.scaled_mass(s) / (u * u) + 2.0 * PI * self.chi_r(u)
        }
    }

    pub fn d3w(&self, u: f64) -> f64 {
        let s = u / self.r;
        if s <= 1.0 {
            0.0
        } else if s >= 2.0 {
            2.0 / (u * u * u)
        } else {
            2.0 * self.scaled_mass(s) / (u * u * u) - 2.0 * PI * self.chi_r(u) / u
                + 2.0 * PI * self.chi_r_prime(u)
        }
    }

    fn row(&self, u: f64) -> KernelRow {
        KernelRow { u, m: self.mass(u), dw: self.dw(u), d2w: self.d2w(u), d3w: self.d3w(u) }
    }

    /// `(max R·|∂_u w_R|, max R²·|∂²_u w_R|)` over the table.
    pub fn sup_bounds(&self) -> (f64, f64) {
        self.table.iter().fold((0.0, 0.0), |(a, b), row| {
            (f64::max(a, self.r * row.dw.abs()), f64::max(b, self.r * self.r * row.d2w.abs()))
        })
    }

    /// Write the table as CSV with columns `u,M,dw,d2w,d3w`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "u,M,dw,d2w,d3w")?;
        for row in &self.table {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", row.u, row.m, row.dw, row.d2w, row.d3w)?;
        }
        Ok(())
    }
}

pub fn radial_kernel(profile: SmearingProfile, r: f64, radial_grid: RadialGrid) -> Result<RadialKernel> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("smearing radius must be positive, got {r}")));
    }
    if radial_grid.points < 16 || !(radial_grid.u_max > 0.0) {
        return Err(Error::InvalidArgument("radial grid needs ≥ 16 points and u_max > 0".into()));
    }
    let rule = Composite::new(12, 1)?;
    let h = 1.0 / BRIDGE_TABLE as f64;
    let mut bridge_mass = Vec::with_capacity(BRIDGE_TABLE + 1);
    let mut acc = PI * profile.inner_value;
    bridge_mass.push(acc);
    for i in 0..BRIDGE_TABLE {
        let a = 1.0 + i as f64 * h;
        acc += profile.bridge_mass_between(a, a + h, &rule);
        bridge_mass.push(acc);
    }
    // Absorb the residual normalization error so that M(2R) = 1 exactly and
    // the exterior identity ∂_u w_R = 1/u is continuous at 2R.
    let total = *bridge_mass.last().expect("nonempty");
    let inner = PI * profile.inner_value;
    for m in bridge_mass.iter_mut() {
        *m = inner + (*m - inner) * (1.0 - inner) / (total - inner);
    }
    let mut k = RadialKernel { r, profile, bridge_mass, table: Vec::new() };
    k.table = radial_grid.nodes(r).into_iter().map(|u| k.row(u)).collect();
    Ok(k)
}

/// Either the pointlike log kernel or its smeared version.
#[derive(Debug, Clone)]
pub enum Kernel {
    Pointlike,
    Smeared(RadialKernel),
}

impl Kernel {
    pub fn dw(&self, u: f64) -> f64 {
        match self {
            Kernel::Pointlike => 1.0 / u,
            Kernel::Smeared(k) => k.dw(u),
        }
    }

    /// `∇⊥w(x) = (∂_u w(|x|)/|x|)·x⊥` with `x⊥ = (−x₂, x₁)`; zero at the origin.
    pub fn grad_perp(&self, x: [f64; 2]) -> [f64; 2] {
        let u = x[0].hypot(x[1]);
        if u == 0.0 {
            return [0.0, 0.0];
        }
        let f = self.dw(u) / u;
        [-f * x[1], f * x[0]]
    }

    pub fn radius(&self) -> f64 {
        match self {
            Kernel::Pointlike => 0.0,
            Kernel::Smeared(k) => k.r,
        }
    }
}

/// Convolver applying `∇⊥w` (as the complex kernel `K_x + iK_y`) to real sources.
///
/// The singular origin cell of the pointlike kernel is replaced by its cell
/// average, which vanishes because the kernel is odd.
pub fn gauge_convolver(grid: Grid2D, kernel: &Kernel, pad_factor: usize) -> Result<Convolver> {
    let h = grid.spacing();
    Convolver::new(grid.n, pad_factor, |dx, dy| {
        let [kx, ky] = kernel.grad_perp([dx as f64 * h, dy as f64 * h]);
        Complex64::new(kx, ky)
    })
}

/// Convolvers for the two components of `∇⊥w` separately, for complex sources.
pub fn component_convolvers(grid: Grid2D, kernel: &Kernel, pad_factor: usize) -> Result<[Convolver; 2]> {
    let h = grid.spacing();
    let comp = |c: usize| {
        Convolver::new(grid.n, pad_factor, |dx, dy| {
            Complex64::new(kernel.grad_perp([dx as f64 * h, dy as f64 * h])[c], 0.0)
        })
    };
    Ok([comp(0)?, comp(1)?])
}

/// `A[ρ] = ∇⊥w ∗ ρ` with the default twofold padding.
pub fn gauge_field(rho: &DensityField, kernel: &Kernel) -> Result<VectorField2D> {
    gauge_field_padded(rho, kernel, 2)
}

pub fn gauge_field_padded(rho: &DensityField, kernel: &Kernel, pad_factor: usize) -> Result<VectorField2D> {
    let conv = gauge_convolver(rho.grid, kernel, pad_factor)?;
    Ok(apply_gauge(&conv, rho))
}

pub fn apply_gauge(conv: &Convolver, rho: &DensityField) -> VectorField2D {
    let area = rho.grid.cell_area();
    let out = conv.apply_real(&rho.values);
    VectorField2D {
        grid: rho.grid,
        x: out.iter().map(|c| c.re * area).collect(),
        y: out.iter().map(|c| c.im * area).collect(),
    }
}

/// `‖∇w_R − ∇w_0‖_{L^p(ℝ²)}` by radial quadrature.
///
/// The difference is `(1 − M(u))/u` on `u < 2R` and vanishes beyond, so the norm
/// scales like `R^{2/p − 1}`: linearly for `p = 1`, as `R^{1/2}` for `p = 4/3`.
pub fn kernel_gap_lp_norm(profile: SmearingProfile, r: f64, p: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    if !(p >= 1.0 && p < 2.0) {
        return Err(Error::InvalidArgument(format!("gap norm exponent must lie in [1, 2), got {p}")));
    }
    let k = radial_kernel(profile, r, RadialGrid { points: 16, u_max: 2.0 * r })?;
    // u = 2R s³ removes the u^{1−p} singularity at the origin.
    let integrand = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let u = 2.0 * r * s * s * s;
        let g = (1.0 - k.mass(u)) / u;
        2.0 * PI * g.powf(p) * u * 6.0 * r * s * s
    };
    let rule = Composite::new(20, 16)?;
    let knee = 0.5f64.cbrt();
    let total = rule.integrate(0.0, knee, integrand) + rule.integrate(knee, 1.0, integrand);
    Ok(total.powf(1.0 / p))
}

pub fn kernel_gap_norm(profile: SmearingProfile, r: f64) -> Result<f64> {
    kernel_gap_lp_norm(profile, r, 4.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kernel(r: f64) -> RadialKernel {
        radial_kernel(build_profile(8.0).unwrap(), r, RadialGrid { points: 400, u_max: 10.0 * r }).unwrap()
    }

    #[test]
    fn profile_values_and_mass() {
        let p = build_profile(8.0).unwrap();
        assert!((p.chi(0.5) - 0.101321).abs() < 1e-6);
        assert_eq!(p.chi(2.5), 0.0);
        assert!((p.bridge_mass() - (1.0 - 1.0 / PI)).abs() < 1e-10);
        assert!(p.normalization_residual.abs() < 1e-12);
        assert!((p.bridge_shape - 2.914888961207).abs() < 1e-8);
    }

    #[test]
    fn profile_bracket_failure() {
        assert!(matches!(build_profile(2.0), Err(Error::NoBracket(_))));
    }

    #[test]
    fn derivative_examples() {
        for r in [0.3, 1.0] {
            let k = kernel(r);
            assert!((k.dw(3.0 * r) - 1.0 / (3.0 * r)).abs() < 1e-14);
            assert!((k.d2w(3.0 * r) + 1.0 / (9.0 * r * r)).abs() < 1e-12);
            assert!(k.dw(1e-9 * r).abs() < 1e-8 / r);
        }
    }

    #[test]
    fn bridge_mass_table_matches_quadrature() {
        let k = kernel(1.0);
        let rule = Composite::new(20, 40).unwrap();
        for s in [1.1, 1.37, 1.5, 1.93] {
            let direct = 1.0 / PI + 2.0 * PI * rule.integrate(1.0, s, |r| k.profile.chi(r) * r);
            assert!((k.mass(s) - direct).abs() < 1e-11, "s = {s}");
        }
    }

    #[test]
    fn third_derivative_matches_finite_difference() {
        let k = kernel(0.7);
        for u in [0.2, 0.8, 1.0, 1.2] {
            let e = 1e-5;
            let fd = (k.d2w(u + e) - k.d2w(u - e)) / (2.0 * e);
            assert!((fd - k.d3w(u)).abs() < 1e-5 * (1.0 + fd.abs()), "u = {u}: {fd} vs {}", k.d3w(u));
        }
    }

    #[test]
    fn exterior_newton_identity_on_table() {
        let k = kernel(0.05);
        for row in k.table.iter().filter(|row| row.u >= 2.0 * k.r) {
            assert!((row.dw - 1.0 / row.u).abs() <= 1e-10);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let k = kernel(1.0);
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u,M,dw,d2w,d3w\n"));
        assert_eq!(text.lines().count(), k.table.len() + 1);
    }

    #[test]
    fn gap_norm_scalings() {
        let p = build_profile(8.0).unwrap();
        assert_eq!(kernel_gap_norm(p, 0.0).unwrap(), 0.0);
        let a = kernel_gap_norm(p, 0.1).unwrap();
        let b = kernel_gap_norm(p, 0.05).unwrap();
        assert!((a / b - 2f64.sqrt()).abs() < 1e-10);
        let a1 = kernel_gap_lp_norm(p, 0.1, 1.0).unwrap();
        let b1 = kernel_gap_lp_norm(p, 0.05, 1.0).unwrap();
        assert!((a1 / b1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let g = Grid2D::new(16, 2.0).unwrap();
        let a = gauge_field(&DensityField::zeros(g), &Kernel::Pointlike).unwrap();
        assert_eq!(a.max_norm(), 0.0);
    }

    #[test]
    fn padding_below_two_rejected() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let rho = DensityField::zeros(g);
        assert!(matches!(
            gauge_field_padded(&rho, &Kernel::Pointlike, 1),
            Err(Error::InsufficientPadding { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn profile_is_nonincreasing(a in 0.0f64..2.5, b in 0.0f64..2.5) {
            let p = build_profile(8.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(p.chi(lo) >= p.chi(hi));
        }

        #[test]
        fn gauge_field_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.2f64..1.0) {
            let g = Grid2D::new(12, 1.5).unwrap();
            let r1 = g.sample(|[x, y]| (-(x * x + y * y) / c).exp());
            let r2 = g.sample(|[x, y]| (-(x - 0.3).powi(2) - 2.0 * y * y).exp());
            let k = Kernel::Smeared(kernel(0.4));
            let conv = gauge_convolver(g, &k, 2).unwrap();
            let f = |v: &[f64]| apply_gauge(&conv, &DensityField { grid: g, values: v.to_vec() });
            let mix: Vec<f64> = r1.iter().zip(&r2).map(|(u, v)| a * u + b * v).collect();
            let lhs = f(&mix);
            let (f1, f2) = (f(&r1), f(&r2));
            for k in 0..g.len() {
                prop_assert!((lhs.x[k] - a * f1.x[k] - b * f2.x[k]).abs() < 1e-12);
                prop_assert!((lhs.y[k] - a * f1.y[k] - b * f2.y[k]).abs() < 1e-12);
            }
        }
    }
}
