//! `⟨Ψ, H Ψ⟩` evaluated on the many-body wave function itself, without Wick's
//! theorem: a dense 4D sum for two particles, importance-sampled Monte Carlo for
//! more.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{central_difference, InteractionOperators};
use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::slater::SlaterState;

const CHUNK: usize = 1 << 14;
const UNIFORM_SHARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    /// Zero for the deterministic dense sum.
    pub standard_error: f64,
    pub samples: usize,
}

/// Pair field `∇⊥w` tabulated on all grid offsets.
struct PairTable {
    n: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
}

impl PairTable {
    fn new(grid: &Grid2D, ops: &InteractionOperators) -> Self {
        let n = grid.n;
        let h = grid.spacing();
        let w = 2 * n - 1;
        let mut kx = vec![0.0; w * w];
        let mut ky = vec![0.0; w * w];
        for oy in 0..w {
            for ox in 0..w {
                let d = [(ox as f64 - (n - 1) as f64) * h, (oy as f64 - (n - 1) as f64) * h];
                let g = ops.kernel.grad_perp(d);
                kx[oy * w + ox] = g[0];
                ky[oy * w + ox] = g[1];
            }
        }
        Self { n, kx, ky }
    }

    /// `∇⊥w(x_j − x_k)` for node indices `j`, `k`.
    fn at(&self, j: usize, k: usize) -> [f64; 2] {
        let n = self.n;
        let w = 2 * n - 1;
        let ox = j % n + (n - 1) - k % n;
        let oy = j / n + (n - 1) - k / n;
        [self.kx[oy * w + ox], self.ky[oy * w + ox]]
    }
}

/// Dense evaluation for two particles on the full `n⁴` product grid.
pub fn direct_energy_oracle_dense(state: &SlaterState, ops: &InteractionOperators) -> Result<f64> {
    if state.n() != 2 {
        return Err(Error::InvalidArgument(format!("the dense oracle needs N = 2, got {}", state.n())));
    }
    let grid = state.grid;
    let (n, m) = (grid.n, grid.len());
    let h = grid.spacing();
    let (a, b) = (&state.orbitals[0], &state.orbitals[1]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // psi[k1 * m + k2] = Ψ(x_{k1}, x_{k2})
    let psi: Vec<Complex64> = (0..m * m)
        .map(|i| {
            let (k1, k2) = (i / m, i % m);
            (a[k1] * b[k2] - b[k1] * a[k2]) * s
        })
        .collect();
    let a_e = ops.external.sample(&grid)?;
    let v = ops.trap.sample(&grid);
    let table = PairTable::new(&grid, ops);
    let zero = Complex64::new(0.0, 0.0);
    let hbar = ops.hbar;
    let alpha = ops.alpha;

    let total: f64 = (0..m)
        .into_par_iter()
        .map(|k1| {
            let (i1x, i1y) = grid.unravel(k1);
            let mut acc = 0.0;
            for k2 in 0..m {
                let (i2x, i2y) = grid.unravel(k2);
                let here = psi[k1 * m + k2];
                acc += (v[k1] + v[k2]) * here.norm_sqr();
                for (particle, (me, other)) in [(k1, k2), (k2, k1)].into_iter().enumerate() {
                    let pair = table.at(me, other);
                    for axis in 0..2 {
                        let (pos, stride) = match (particle, axis) {
                            (0, 0) => (i1x, m),
                            (0, _) => (i1y, n * m),
                            (_, 0) => (i2x, 1),
                            _ => (i2y, n),
                        };
                        let idx = k1 * m + k2;
                        let fwd = if pos + 1 < n { psi[idx + stride] } else { zero };
                        let bwd = if pos > 0 { psi[idx - stride] } else { zero };
                        let d = (fwd - bwd) / (2.0 * h);
                        let field = if axis == 0 { a_e.x[me] } else { a_e.y[me] };
                        let op = Complex64::new(0.0, -hbar) * d + (field + alpha * pair[axis]) * here;
                        acc += op.norm_sqr();
                    }
                }
            }
            acc
        })
        .sum();
    let area = grid.cell_area();
    Ok(total * area * area)
}

/// `det[φ_a(x_j)]`, with row `row` taken from `table` instead when given.
fn determinant(nodes: &[usize], replace: Option<(usize, &[Vec<Complex64>])>, orbitals: &[Vec<Complex64>]) -> Complex64 {
    let n = nodes.len();
    let mat = DMatrix::from_fn(n, n, |j, a| match replace {
        Some((row, table)) if row == j => table[a][nodes[j]],
        _ => orbitals[a][nodes[j]],
    });
    mat.determinant()
}

/// Importance-sampled estimate: the particle positions are drawn independently
/// from a mixture of `ρ_γ/N` and the uniform law on the grid.
///
/// Samples are drawn in fixed chunks, each with its own ChaCha stream, so the
/// result depends only on `seed` and `samples`. When `target_rel_stderr` is
/// given and not met, [`Error::BudgetExceeded`] is returned.
pub fn direct_energy_oracle_mc(
    state: &SlaterState,
    ops: &InteractionOperators,
    samples: usize,
    seed: u64,
    target_rel_stderr: Option<f64>,
) -> Result<OracleEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let grid = state.grid;
    let np = state.n();
    let m = grid.len();
    let rho = state.density();
    let area = grid.cell_area();
    let weights: Vec<f64> = rho
        .values
        .iter()
        .map(|r| (1.0 - UNIFORM_SHARE) * r * area / np as f64 + UNIFORM_SHARE / m as f64)
        .collect();
    let law = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let orbitals = &state.orbitals;
    let dx: Vec<Vec<Complex64>> = orbitals.iter().map(|o| central_difference(o, &grid, 0)).collect();
    let dy: Vec<Vec<Complex64>> = orbitals.iter().map(|o| central_difference(o, &grid, 1)).collect();
    let a_e = ops.external.sample(&grid)?;
    let v = ops.trap.sample(&grid);
    let pair = PairTable::new(&grid, ops);
    let norm = (1..=np).map(|k| k as f64).product::<f64>().sqrt().recip();
    let cell_volume = area.powi(np as i32);

    let integrand = |nodes: &[usize]| -> f64 {
        let psi = determinant(nodes, None, orbitals) * norm;
        let mut f = nodes.iter().map(|&k| v[k]).sum::<f64>() * psi.norm_sqr();
        for (j, &kj) in nodes.iter().enumerate() {
            let mut field = [a_e.x[kj], a_e.y[kj]];
            for (k, &kk) in nodes.iter().enumerate() {
                if k != j {
                    let g = pair.at(kj, kk);
                    field[0] += ops.alpha * g[0];
                    field[1] += ops.alpha * g[1];
                }
            }
            for (axis, table) in [&dx, &dy].into_iter().enumerate() {
                let d = determinant(nodes, Some((j, table.as_slice())), orbitals) * norm;
                f += (Complex64::new(0.0, -ops.hbar) * d + field[axis] * psi).norm_sqr();
            }
        }
        f
    };

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut nodes = vec![0usize; np];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let mut q = 1.0;
                for slot in nodes.iter_mut() {
                    *slot = law.sample(&mut rng);
                    q *= weights[*slot];
                }
                let x = integrand(&nodes) * cell_volume / q;
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let count = samples as f64;
    let mean = s1 / count;
    let var = ((s2 / count - mean * mean) * count / (count - 1.0)).max(0.0);
    let est = OracleEstimate { value: mean, standard_error: (var / count).sqrt(), samples };
    if let Some(target) = target_rel_stderr {
        let achieved = est.standard_error / est.value.abs();
        if !(achieved <= target) {
            return Err(Error::BudgetExceeded(format!(
                "relative standard error {achieved:.2e} after {samples} samples exceeds {target:.2e}"
            )));
        }
    }
    Ok(est)
}

/// Dense sum for two particles, Monte Carlo with `samples` draws otherwise.
pub fn direct_energy_oracle(
    state: &SlaterState,
    ops: &InteractionOperators,
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    match state.n() {
        1 => Err(Error::InvalidArgument("the oracle needs at least two particles".into())),
        2 => Ok(OracleEstimate { value: direct_energy_oracle_dense(state, ops)?, standard_error: 0.0, samples: 0 }),
        _ => direct_energy_oracle_mc(state, ops, samples, seed, None),
    }
}

#[cfg(test)]
mod tests {
    use super::super::hf_energy;
    use super::super::tests::{ops, state};
    use super::*;

    #[test]
    fn dense_oracle_matches_wick() {
        let s = state(2);
        let o = ops(0.3, 0.5);
        let wick = hf_energy(&s, &o).unwrap().total;
        let dense = direct_energy_oracle_dense(&s, &o).unwrap();
        assert!((wick - dense).abs() < 1e-10 * wick.abs(), "{wick} vs {dense}");
    }

    #[test]
    fn dense_oracle_without_coupling() {
        let s = state(2);
        let o = ops(0.0, 0.5);
        let single: f64 = s
            .orbitals
            .iter()
            .map(|p| hf_energy(&SlaterState::new(s.grid, vec![p.clone()]).unwrap(), &o).unwrap().total)
            .sum();
        let dense = direct_energy_oracle_dense(&s, &o).unwrap();
        assert!((dense - single).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let s = state(3);
        let o = ops(0.3, 0.5);
        let a = direct_energy_oracle_mc(&s, &o, 40_000, 7, None).unwrap();
        let b = direct_energy_oracle_mc(&s, &o, 40_000, 7, None).unwrap();
        assert_eq!(a, b);
        let wick = hf_energy(&s, &o).unwrap().total;
        assert!((a.value - wick).abs() < 4.0 * a.standard_error, "{a:?} vs {wick}");
    }

    #[test]
    fn unattainable_budget_reported() {
        let s = state(3);
        let r = direct_energy_oracle_mc(&s, &ops(0.3, 0.5), 100, 1, Some(1e-9));
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }
}
