#![allow(dead_code)]

use anyonvlasov::diaconis_freedman::DiscreteSymmetricMeasure;
use anyonvlasov::hartree_fock::InteractionOperators;
use anyonvlasov::kernels::{build_profile, radial_kernel, Kernel, RadialGrid};
use anyonvlasov::slater::{hermite_gaussian, SlaterState};
use anyonvlasov::{ExternalField, Grid2D, Trap};
use num_complex::Complex64;
use rand::Rng;

pub fn smeared(r: f64) -> Kernel {
    Kernel::Smeared(radial_kernel(build_profile(8.0).unwrap(), r, RadialGrid::default()).unwrap())
}

pub fn hf_ops(alpha: f64, r: f64) -> InteractionOperators {
    InteractionOperators {
        hbar: 0.5,
        alpha,
        trap: Trap::harmonic(),
        external: ExternalField::damped_rotation(0.6, 1.5),
        kernel: smeared(r),
    }
}

pub fn hf_grid() -> Grid2D {
    Grid2D::new(24, 4.0).unwrap()
}

const MODES: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)];

/// Orthonormalised random complex combinations of low Hermite functions.
pub fn random_state<R: Rng>(grid: Grid2D, n: usize, rng: &mut R) -> SlaterState {
    let basis: Vec<Vec<Complex64>> = MODES.iter().map(|&m| hermite_gaussian(&grid, m, 0.8, [0.1, -0.05])).collect();
    let fs = (0..n)
        .map(|_| {
            let c: Vec<Complex64> =
                (0..MODES.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            (0..grid.len()).map(|k| basis.iter().zip(&c).map(|(b, c)| b[k] * c).sum()).collect()
        })
        .collect();
    SlaterState::orthonormalized(grid, fs).unwrap()
}

pub fn hermite_state(grid: Grid2D, modes: &[(usize, usize)], sigma: f64) -> SlaterState {
    let fs = modes.iter().map(|&m| hermite_gaussian(&grid, m, sigma, [0.0, 0.0])).collect();
    SlaterState::orthonormalized(grid, fs).unwrap()
}

/// Symmetrised random integer weights on three fixed phase-space atoms.
pub fn random_measure<R: Rng>(n_particles: usize, rng: &mut R) -> DiscreteSymmetricMeasure {
    let support = vec![[0.0, 0.0, 0.0, 0.0], [0.5, 0.0, 0.1, 0.0], [0.0, 0.5, 0.0, -0.1]];
    let raw: Vec<u64> = (0..3usize.pow(n_particles as u32)).map(|_| rng.gen_range(0..20)).collect();
    DiscreteSymmetricMeasure::symmetrized(support, n_particles, &raw).unwrap()
}

/// Number of set partitions of `{0..n}` into exactly `k` blocks, by walking
/// all restricted growth strings.
pub fn count_partitions(n: usize, k: usize) -> u64 {
    fn walk(pos: usize, n: usize, used: usize, k: usize) -> u64 {
        if pos == n {
            return u64::from(used == k);
        }
        if used + (n - pos) < k {
            return 0;
        }
        // Put element `pos` into each open block in turn, or open a new one.
        let mut total = 0;
        for _block in 0..used {
            total += walk(pos + 1, n, used, k);
        }
        if used < k {
            total += walk(pos + 1, n, used + 1, k);
        }
        total
    }
    if n == 0 {
        return u64::from(k == 0);
    }
    walk(0, n, 0, k)
}
