mod common;

use std::f64::consts::PI;

use anyonvlasov::diaconis_freedman::measure::{index_of, tuple_of};
use anyonvlasov::diaconis_freedman::montecarlo::worst_tile_count;
use anyonvlasov::diaconis_freedman::{
    average_map, df_marginal_exact, df_sample, optimal_pauli_bound, pauli_violation_bound, stirling2,
    tv_distance, DiscreteSymmetricMeasure, EmpiricalConfig, PhasePoint, TfPhaseSampler, Tiling,
};
use anyonvlasov::tf_solver::solve_tf;
use anyonvlasov::{Grid2D, Trap};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest standardised deviation between sampled `n`-tuple frequencies and
/// the exact resampled marginal.
fn histogram_z_score(mu: &DiscreteSymmetricMeasure, n: usize, trials: usize, seed: u64) -> f64 {
    let atoms = mu.atoms();
    let np = mu.n_particles();
    let configs = WeightedIndex::new(mu.weights_f64()).unwrap();
    let draw_config = |rng: &mut ChaCha8Rng| tuple_of(configs.sample(rng), atoms, np);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; atoms.pow(n as u32)];
    for _ in 0..trials {
        let tuple = df_sample(draw_config, n, &mut rng).unwrap();
        counts[index_of(&tuple, atoms)] += 1;
    }
    let exact = df_marginal_exact(mu, n).unwrap();
    counts
        .iter()
        .zip(&exact.weights)
        .map(|(&c, w)| {
            let p = w.to_f64().unwrap();
            let se = (p * (1.0 - p) / trials as f64).sqrt().max(1e-12);
            (c as f64 / trials as f64 - p).abs() / se
        })
        .fold(0.0, f64::max)
}

#[test]
fn resampled_histograms_match_exact_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for np in [2, 3, 4] {
        let mu = common::random_measure(np, &mut rng);
        for n in [1, 2] {
            let z = histogram_z_score(&mu, n, 100_000, 100 + np as u64);
            assert!(z < 5.0, "N = {np}, n = {n}: z = {z}");
        }
        // The first resampled marginal is the first marginal itself.
        assert_eq!(df_marginal_exact(&mu, 1).unwrap(), mu.marginal(1).unwrap());
    }
}

#[test]
fn resampling_preserves_the_one_body_marginal_in_tv() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for np in 1..=4 {
        let mu = common::random_measure(np, &mut rng);
        let tv = tv_distance(&mu.marginal(1).unwrap(), &df_marginal_exact(&mu, 1).unwrap()).unwrap();
        assert!(tv.to_f64().unwrap() == 0.0);
    }
}

/// `∫ sin(a·z) dAve` in closed form: on each tile the average of `e^{ia·z}` is
/// `Π_j e^{ia_j c_j} sinc(a_j l_j / 2)`.
fn averaged_sine(tiling: &Tiling, counts: &[u32], n: usize, a: [f64; 4]) -> f64 {
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    let mut total = 0.0;
    for (m, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (lo, hi) = tiling.tile_box(m);
        let (mut phase, mut amp) = (0.0, 1.0);
        for j in 0..4 {
            phase += a[j] * 0.5 * (lo[j] + hi[j]);
            amp *= sinc(0.5 * a[j] * (hi[j] - lo[j]));
        }
        total += c as f64 / n as f64 * amp * phase.sin();
    }
    total
}

#[test]
fn averaging_moves_lipschitz_integrals_by_at_most_the_tile_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let tiling = Tiling::new(0.3, 0.2, 4).unwrap();
    let [lx, lp] = tiling.half_sides();
    let points: Vec<PhasePoint> = (0..500)
        .map(|_| {
            [
                rng.gen_range(-lx..lx),
                rng.gen_range(-lx..lx),
                rng.gen_range(-lp..lp),
                rng.gen_range(-lp..lp),
            ]
        })
        .collect();
    let (counts, outside) = tiling.occupancy(&points);
    assert_eq!(outside, 0);
    // Mean distance from a tile point to a uniform point of the same tile is at
    // most the corner RMS distance √((2l_x² + 2l_p²)/3) < √(l_x² + l_p²).
    let reach = (tiling.l_x * tiling.l_x + tiling.l_p * tiling.l_p).sqrt();
    for _ in 0..20 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-8.0..8.0));
        let lip = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let emp: f64 = points.iter().map(|z| (0..4).map(|j| a[j] * z[j]).sum::<f64>().sin()).sum::<f64>() / 500.0;
        let ave = averaged_sine(&tiling, &counts, points.len(), a);
        assert!((ave - emp).abs() <= reach * lip, "{ave} vs {emp}");
    }
    // Constant test function: averaging keeps the mass inside S_L.
    let ave = average_map(&EmpiricalConfig::new(points).unwrap(), &tiling);
    assert!((ave.mass() - 1.0).abs() < 1e-12);
}

#[test]
fn good_configurations_respect_the_averaged_pauli_bound() {
    let np = 2048;
    let rho = solve_tf(&Trap::harmonic(), 1.0, Grid2D::new(64, 2.0).unwrap(), 1e-12).unwrap().rho;
    let sampler = TfPhaseSampler::new(&rho).unwrap();
    let tiling = Tiling::from_exponent(np, 0.25, 3).unwrap();
    let eps = 1.0;
    let threshold = tiling.violation_threshold(np, eps);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut good = 0;
    for _ in 0..20 {
        let points = sampler.sample_config(np, &mut rng);
        let worst = worst_tile_count(&tiling, &points);
        let ave = average_map(&EmpiricalConfig::new(points).unwrap(), &tiling);
        let by_count = worst as f64 / (np as f64 * tiling.tile_volume());
        assert!((ave.max_value() - by_count).abs() < 1e-12 * by_count.max(1.0));
        if worst < threshold {
            good += 1;
            assert!(ave.max_value() <= (1.0 + eps) / (4.0 * PI * PI));
        } else {
            assert!(ave.max_value() >= (1.0 + eps) / (4.0 * PI * PI));
        }
    }
    assert!(good > 0, "no good configuration drawn");
}

#[test]
fn moment_order_sweep_has_interior_minimiser() {
    let np = 10_000;
    let hbar = (np as f64).powf(-0.5);
    let volume = (np as f64).powf(-0.5);
    let eps = 0.5;
    let bounds: Vec<f64> = (1..=64).map(|n| pauli_violation_bound(n, volume, eps, np, hbar).unwrap()).collect();
    let (arg, min) = bounds
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &b)| if b < acc.1 { (i + 1, b) } else { acc });
    let best = optimal_pauli_bound(volume, eps, np, hbar, 64).unwrap();
    assert_eq!(best.n, arg);
    assert_eq!(best.bound, min);
    assert!(arg > 1 && arg < 64, "minimiser at the edge: n = {arg}");
    assert!(bounds[..arg].windows(2).all(|w| w[1] < w[0]));
    assert!(bounds[arg - 1..].windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stirling_numbers_expand_powers(n in 0usize..=30, x in 1u64..12) {
        // x^n = Σ_k S(n,k)·x(x−1)…(x−k+1).
        let mut sum = BigUint::from(0u32);
        for k in 0..=n {
            let falling = (0..k as u64).fold(BigUint::from(1u32), |acc, j| {
                if j < x { acc * BigUint::from(x - j) } else { BigUint::from(0u32) }
            });
            sum += stirling2(n, k).unwrap() * falling;
        }
        prop_assert_eq!(sum, BigUint::from(x).pow(n as u32));
    }

    #[test]
    fn tile_centres_round_trip(n in 1usize..4, m_seed in 0usize..10_000, l_x in 0.05f64..2.0, l_p in 0.05f64..2.0) {
        let t = Tiling::new(l_x, l_p, n).unwrap();
        let m = m_seed % t.tile_count();
        let (lo, hi) = t.tile_box(m);
        let centre: PhasePoint = std::array::from_fn(|j| 0.5 * (lo[j] + hi[j]));
        prop_assert_eq!(t.tile_of(&centre), Some(m));
    }

    #[test]
    fn violation_threshold_monotone_in_eps(np in 1usize..100_000, e1 in 0.0f64..5.0, de in 0.0f64..5.0) {
        let t = Tiling::from_exponent(np.max(2), 0.5, 2).unwrap();
        prop_assert!(t.violation_threshold(np, e1) <= t.violation_threshold(np, e1 + de));
    }

    #[test]
    fn tv_is_a_metric_on_marginals(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_measure(3, &mut rng).marginal(2).unwrap();
        let b = common::random_measure(3, &mut rng).marginal(2).unwrap();
        let c = common::random_measure(3, &mut rng).marginal(2).unwrap();
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert_eq!(&ab, &tv_distance(&b, &a).unwrap());
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap());
        prop_assert!(tv_distance(&a, &a).unwrap() == num_rational::BigRational::from_integer(0.into()));
    }
}
