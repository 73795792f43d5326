//! Sampling: Diaconis-Freedman resampling and the Monte Carlo estimate of the
//! probability that some tile is over-occupied.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::{stirling, PhasePoint, Tiling};
use crate::error::{Error, Result};
use crate::grid::DensityField;

/// Minimum number of trials accepted by [`mc_violation_probability`].
pub const MIN_TRIALS: usize = 1000;
const WILSON_Z: f64 = 1.959963984540054;

/// Draw `Z_N` from `sampler`, then `n` independent uniform picks among its
/// points: one draw from `μ̃^(n)`.
pub fn df_sample<T, R, F>(mut sampler: F, n: usize, rng: &mut R) -> Result<Vec<T>>
where
    T: Clone,
    R: Rng,
    F: FnMut(&mut R) -> Vec<T>,
{
    let z = sampler(rng);
    if n == 0 || n > z.len() {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ N = {}, got {n}", z.len())));
    }
    Ok((0..n).map(|_| z[rng.gen_range(0..z.len())].clone()).collect())
}

/// iid sampler for the phase-space density `(2π)^{-2}·1(|p|² ≤ 4πρ(x))`
/// with `ρ` piecewise constant on the cells of a grid density of unit mass.
#[derive(Debug, Clone)]
pub struct TfPhaseSampler {
    rho: DensityField,
    cells: WeightedIndex<f64>,
}

impl TfPhaseSampler {
    pub fn new(rho: &DensityField) -> Result<Self> {
        let cells = WeightedIndex::new(&rho.values).map_err(|e| Error::InvalidArgument(format!("density: {e}")))?;
        Ok(Self { rho: rho.clone(), cells })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PhasePoint {
        let k = self.cells.sample(rng);
        let g = &self.rho.grid;
        let c = g.point(k);
        let h = g.spacing();
        let x = [c[0] + h * (rng.gen::<f64>() - 0.5), c[1] + h * (rng.gen::<f64>() - 0.5)];
        let radius = (4.0 * PI * self.rho.values[k]).sqrt() * rng.gen::<f64>().sqrt();
        let angle = 2.0 * PI * rng.gen::<f64>();
        [x[0], x[1], radius * angle.cos(), radius * angle.sin()]
    }

    pub fn sample_config<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<PhasePoint> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationEstimate {
    pub trials: usize,
    pub violations: usize,
    pub estimate: f64,
    pub standard_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Count threshold per tile.
    pub threshold: u64,
    /// `worst_occupancy[c]` = number of trials whose fullest tile in `S_L`
    /// held `c` points.
    pub worst_occupancy: Vec<usize>,
}

fn wilson(successes: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Largest number of points sharing a tile of `S_L`.
pub fn worst_tile_count(tiling: &Tiling, points: &[PhasePoint]) -> u64 {
    let mut tiles: Vec<usize> = points.iter().filter_map(|z| tiling.tile_of(z)).collect();
    tiles.sort_unstable();
    let mut best = 0u64;
    let mut i = 0;
    while i < tiles.len() {
        let j = tiles[i..].iter().position(|&t| t != tiles[i]).map_or(tiles.len(), |d| i + d);
        best = best.max((j - i) as u64);
        i = j;
    }
    best
}

/// Fraction of sampled configurations with some tile `Ω_m ⊂ S_L` holding at
/// least `(1+ε)(2π)^{-2}|Ω_m|` of the empirical mass.
///
/// Trial `t` draws from the ChaCha stream `t` of `seed`, so results do not
/// depend on the thread count.
pub fn mc_violation_probability<F>(sampler: F, tiling: &Tiling, eps: f64, trials: usize, seed: u64) -> Result<ViolationEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<PhasePoint> + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if !(eps > -1.0) {
        return Err(Error::InvalidArgument(format!("need ε > −1, got {eps}")));
    }
    let worst: Vec<(usize, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let points = sampler(&mut rng);
            (points.len(), worst_tile_count(tiling, &points))
        })
        .collect();
    let n_particles = worst[0].0;
    if n_particles == 0 || worst.iter().any(|(n, _)| *n != n_particles) {
        return Err(Error::InvalidArgument("sampler must return the same nonzero number of points each trial".into()));
    }
    let threshold = tiling.violation_threshold(n_particles, eps);
    let violations = worst.iter().filter(|(_, w)| *w >= threshold).count();
    let top = worst.iter().map(|(_, w)| *w).max().unwrap_or(0) as usize;
    let mut hist = vec![0usize; top + 1];
    for (_, w) in &worst {
        hist[*w as usize] += 1;
    }
    let p = violations as f64 / trials as f64;
    let (lo, hi) = wilson(violations, trials);
    Ok(ViolationEstimate {
        trials,
        violations,
        estimate: p,
        standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        wilson_low: lo,
        wilson_high: hi,
        threshold,
        worst_occupancy: hist,
    })
}

/// `Σ_m` over the tiles of `S_L` of the single-tile bound at its best moment order.
pub fn union_bound(tiling: &Tiling, eps: f64, n_particles: usize, hbar: f64, n_max: usize) -> Result<stirling::OptimalBound> {
    let one = stirling::optimal_pauli_bound(tiling.tile_volume(), eps, n_particles, hbar, n_max)?;
    Ok(stirling::OptimalBound { n: one.n, bound: one.bound * tiling.tile_count() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustered_sampler_always_violates() {
        let t = Tiling::from_exponent(256, 0.5, 3).unwrap();
        let est = mc_violation_probability(|_| vec![[0.01; 4]; 256], &t, 1.0, 1000, 3).unwrap();
        assert_eq!(est.estimate, 1.0);
    }

    #[test]
    fn huge_eps_never_violates() {
        let t = Tiling::from_exponent(64, 0.5, 2).unwrap();
        let eps = 64.0 * 4.0 * PI * PI / t.tile_volume();
        let est = mc_violation_probability(|_| vec![[0.01; 4]; 64], &t, eps, 1000, 3).unwrap();
        assert_eq!(est.violations, 0);
        assert!(est.wilson_high > 0.0 && est.wilson_high < 0.01);
    }

    #[test]
    fn resampling_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = vec![[1.0, 2.0, 3.0, 4.0], [-1.0, 0.0, 0.5, 0.0]];
        let draw = df_sample(|_: &mut ChaCha8Rng| z.clone(), 2, &mut rng).unwrap();
        assert!(draw.iter().all(|p| z.contains(p)));
        assert!(df_sample(|_: &mut ChaCha8Rng| z.clone(), 3, &mut rng).is_err());
    }

    #[test]
    fn worst_count() {
        let t = Tiling::new(1.0, 1.0, 1).unwrap();
        let pts = vec![[0.5; 4], [0.6; 4], [-0.5; 4], [9.0; 4]];
        assert_eq!(worst_tile_count(&t, &pts), 2);
    }
}
