//! Empirical phase-space measures, their Diaconis-Freedman resampling, the
//! Pauli-principle violation bounds and the tile-averaging map.
//!
//! Phase-space points are `[x₁, x₂, p₁, p₂]`.

pub mod measure;
pub mod montecarlo;
pub mod stirling;

use serde::Serialize;

use crate::error::{Error, Result};

pub use measure::{
    df_box_mass_by_partitions, df_marginal_exact, df_marginal_formula, tv_distance, DiscreteSymmetricMeasure,
    TupleMeasure,
};
pub use montecarlo::{df_sample, mc_violation_probability, TfPhaseSampler, ViolationEstimate};
pub use stirling::{
    box_mass_moment_bound, optimal_pauli_bound, pauli_violation_bound, stirling2, stirling2_upper, OptimalBound,
};

pub type PhasePoint = [f64; 4];

/// `N` phase-space points, carrying weight `1/N` each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalConfig {
    pub points: Vec<PhasePoint>,
}

impl EmpiricalConfig {
    pub fn new(points: Vec<PhasePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("an empirical measure needs at least one point".into()));
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }
}

/// Tiles `Ω_m` of side `l_x` in position and `l_p` in momentum filling
/// `S_L = [−n l_x, n l_x]² × [−n l_p, n l_p]²`, so `2n` tiles per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tiling {
    pub l_x: f64,
    pub l_p: f64,
    pub n_per_axis: usize,
}

impl Tiling {
    pub fn new(l_x: f64, l_p: f64, n_per_axis: usize) -> Result<Self> {
        if !(l_x > 0.0 && l_p > 0.0) || n_per_axis == 0 {
            return Err(Error::InvalidArgument(format!(
                "tile sides must be positive and n ≥ 1, got l_x = {l_x}, l_p = {l_p}, n = {n_per_axis}"
            )));
        }
        Ok(Self { l_x, l_p, n_per_axis })
    }

    /// Square tiles with `|Ω_m| = N^{−exponent}`, i.e. `l_x = l_p = N^{−exponent/4}`
    /// and half-side `L = n N^{−exponent/4}`.
    pub fn from_exponent(n_particles: usize, exponent: f64, n_per_axis: usize) -> Result<Self> {
        let side = (n_particles as f64).powf(-exponent / 4.0);
        Self::new(side, side, n_per_axis)
    }

    pub fn tile_volume(&self) -> f64 {
        self.l_x * self.l_x * self.l_p * self.l_p
    }

    pub fn tiles_per_axis(&self) -> usize {
        2 * self.n_per_axis
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_per_axis().pow(4)
    }

    pub fn half_sides(&self) -> [f64; 2] {
        let n = self.n_per_axis as f64;
        [n * self.l_x, n * self.l_p]
    }

    fn side(&self, axis: usize) -> f64 {
        if axis < 2 {
            self.l_x
        } else {
            self.l_p
        }
    }

    /// Tile containing `z`, or `None` outside `S_L`. A point on a face shared by
    /// two tiles belongs to the lower one.
    pub fn tile_of(&self, z: &PhasePoint) -> Option<usize> {
        let per = self.tiles_per_axis();
        let mut index = 0;
        for (axis, &c) in z.iter().enumerate() {
            let l = self.side(axis);
            let t = (c + self.n_per_axis as f64 * l) / l;
            if !(0.0..=per as f64).contains(&t) {
                return None;
            }
            let i = (t.ceil() as usize).saturating_sub(1).min(per - 1);
            index = index * per + i;
        }
        Some(index)
    }

    /// Lower and upper corners of tile `m`.
    pub fn tile_box(&self, m: usize) -> ([f64; 4], [f64; 4]) {
        let per = self.tiles_per_axis();
        let mut lo = [0.0; 4];
        let mut hi = [0.0; 4];
        let mut rest = m;
        for axis in (0..4).rev() {
            let i = rest % per;
            rest /= per;
            let l = self.side(axis);
            lo[axis] = (i as f64 - self.n_per_axis as f64) * l;
            hi[axis] = lo[axis] + l;
        }
        (lo, hi)
    }

    /// Number of points in each tile, and the number outside `S_L`.
    pub fn occupancy(&self, points: &[PhasePoint]) -> (Vec<u32>, usize) {
        let mut counts = vec![0u32; self.tile_count()];
        let mut outside = 0;
        for z in points {
            match self.tile_of(z) {
                Some(m) => counts[m] += 1,
                None => outside += 1,
            }
        }
        (counts, outside)
    }

    /// Smallest point count that puts `∫_{Ω_m} Emp ≥ (1+ε)(2π)^{-2}|Ω_m|`.
    pub fn violation_threshold(&self, n_particles: usize, eps: f64) -> u64 {
        let need = (1.0 + eps) * self.tile_volume() * n_particles as f64 / (4.0 * std::f64::consts::PI.powi(2));
        need.ceil().max(0.0) as u64
    }
}

/// `Ave[μ]`: piecewise constant on tiles, equal to `μ(Ω_m)/|Ω_m|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMeasure {
    pub tiling: Tiling,
    pub tile_values: Vec<f64>,
}

impl AveragedMeasure {
    pub fn value_at(&self, z: &PhasePoint) -> f64 {
        self.tiling.tile_of(z).map_or(0.0, |m| self.tile_values[m])
    }

    pub fn mass(&self) -> f64 {
        self.tile_values.iter().sum::<f64>() * self.tiling.tile_volume()
    }

    pub fn max_value(&self) -> f64 {
        self.tile_values.iter().copied().fold(0.0, f64::max)
    }

    /// `ρ_{Ave}(x) = Σ_{m_p} μ(Ω_{m_x} × Ω_{m_p}) / |Ω_{m_x}|`.
    pub fn position_density(&self, x: [f64; 2]) -> f64 {
        let t = &self.tiling;
        let per = t.tiles_per_axis();
        let Some(m) = t.tile_of(&[x[0], x[1], 0.0, 0.0]) else {
            return 0.0;
        };
        let base = m / (per * per);
        let start = base * per * per;
        let mass: f64 = self.tile_values[start..start + per * per].iter().sum::<f64>() * t.tile_volume();
        mass / (t.l_x * t.l_x)
    }
}

pub fn average_map(config: &EmpiricalConfig, tiling: &Tiling) -> AveragedMeasure {
    let (counts, _) = tiling.occupancy(&config.points);
    let scale = 1.0 / (config.n() as f64 * tiling.tile_volume());
    AveragedMeasure { tiling: *tiling, tile_values: counts.iter().map(|&c| c as f64 * scale).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_points_in_one_tile() {
        let t = Tiling::new(0.5, 0.25, 2).unwrap();
        let cfg = EmpiricalConfig::new(vec![[0.1, 0.1, 0.05, 0.05]; 7]).unwrap();
        let ave = average_map(&cfg, &t);
        assert!((ave.max_value() - 1.0 / t.tile_volume()).abs() < 1e-12);
        assert_eq!(ave.tile_values.iter().filter(|&&v| v > 0.0).count(), 1);
        assert!((ave.mass() - 1.0).abs() < 1e-12);
        assert!((ave.position_density([0.2, 0.2]) - 1.0 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_go_to_lower_tile() {
        let t = Tiling::new(1.0, 1.0, 1).unwrap();
        let on_face = t.tile_of(&[0.0, -0.5, -0.5, -0.5]).unwrap();
        let below = t.tile_of(&[-0.5, -0.5, -0.5, -0.5]).unwrap();
        assert_eq!(on_face, below);
        assert_eq!(t.tile_of(&[-1.0, -1.0, -1.0, -1.0]), Some(0));
        assert_eq!(t.tile_of(&[1.0, 1.0, 1.0, 1.0]), Some(15));
        assert_eq!(t.tile_of(&[1.01, 0.0, 0.0, 0.0]), None);
    }

    #[test]
    fn tile_box_round_trip() {
        let t = Tiling::new(0.3, 0.7, 3).unwrap();
        for m in [0, 17, 400, t.tile_count() - 1] {
            let (lo, hi) = t.tile_box(m);
            let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            assert_eq!(t.tile_of(&[mid[0], mid[1], mid[2], mid[3]]), Some(m));
        }
    }

    #[test]
    fn mass_counts_only_points_in_box() {
        let t = Tiling::new(0.5, 0.5, 1).unwrap();
        let cfg = EmpiricalConfig::new(vec![[0.0; 4], [0.2, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -0.9]]).unwrap();
        assert!((average_map(&cfg, &t).mass() - 0.5).abs() < 1e-12);
    }
}
