//! Stirling numbers of the second kind and the box-occupation bounds built on
//! them.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest `n` served by [`stirling2`].
pub const STIRLING_MAX: usize = 64;

/// Rows `0..=n` of the Stirling triangle, `S(n, k) = k·S(n−1, k) + S(n−1, k−1)`.
pub fn stirling2_table(n: usize) -> Result<Vec<Vec<BigUint>>> {
    if n > STIRLING_MAX {
        return Err(Error::Overflow(format!("Stirling numbers are tabulated up to n = {STIRLING_MAX}, got {n}")));
    }
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for m in 1..=n {
        let prev = &rows[m - 1];
        let row = (0..=m)
            .map(|k| {
                let stay = if k < m { prev[k].clone() * BigUint::from(k) } else { BigUint::zero() };
                let join = if k > 0 { prev[k - 1].clone() } else { BigUint::zero() };
                stay + join
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

pub fn stirling2(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Ok(BigUint::zero());
    }
    Ok(stirling2_table(n)?.swap_remove(n).swap_remove(k))
}

/// `C(n, k)·k^{n−k}`, the upper bound on `S(n, k)`.
pub fn stirling2_upper(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut binom = BigUint::one();
    for j in 0..k {
        binom = binom * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    binom * BigUint::from(k).pow((n - k) as u32)
}

fn ln_big(v: &BigUint) -> f64 {
    // to_f64 saturates near 1.8e308; S(64, k) stays far below that.
    v.to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top == f64::INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

fn check_args(n: usize, box_volume: f64, n_particles: usize, hbar: f64) -> Result<()> {
    if n == 0 || n > STIRLING_MAX {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ {STIRLING_MAX}, got {n}")));
    }
    if !(box_volume > 0.0) || !(hbar > 0.0) || n_particles == 0 {
        return Err(Error::InvalidArgument("box volume, ħ and N must be positive".into()));
    }
    Ok(())
}

/// Natural log of `N^{-n} Σ_{k=1}^n |Ω|^k S(n,k) / (2πħ)^{2k}`.
pub fn ln_box_mass_moment_bound(n: usize, box_volume: f64, n_particles: usize, hbar: f64) -> Result<f64> {
    check_args(n, box_volume, n_particles, hbar)?;
    let row = stirling2_table(n)?.swap_remove(n);
    let ln_ratio = box_volume.ln() - 2.0 * (2.0 * PI * hbar).ln();
    let terms: Vec<f64> = (1..=n).map(|k| k as f64 * ln_ratio + ln_big(&row[k])).collect();
    Ok(log_sum_exp(&terms) - n as f64 * (n_particles as f64).ln())
}

/// Upper bound on `∫_{Ω^n} μ̃^(n)` for a measure whose marginals obey the
/// semiclassical Pauli bound.
pub fn box_mass_moment_bound(n: usize, box_volume: f64, n_particles: usize, hbar: f64) -> Result<f64> {
    Ok(ln_box_mass_moment_bound(n, box_volume, n_particles, hbar)?.exp())
}

/// Natural log of [`pauli_violation_bound`].
pub fn ln_pauli_violation_bound(n: usize, box_volume: f64, eps: f64, n_particles: usize, hbar: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("need ε ≥ 0, got {eps}")));
    }
    let nf = n as f64;
    Ok(ln_box_mass_moment_bound(n, box_volume, n_particles, hbar)? - nf * (1.0 + eps).ln()
        + 2.0 * nf * (2.0 * PI).ln()
        - nf * box_volume.ln())
}

/// Markov bound on the probability that one box holds at least
/// `(1+ε)(2π)^{-2}|Ω|` of the empirical mass, using the `n`th moment.
pub fn pauli_violation_bound(n: usize, box_volume: f64, eps: f64, n_particles: usize, hbar: f64) -> Result<f64> {
    Ok(ln_pauli_violation_bound(n, box_volume, eps, n_particles, hbar)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBound {
    pub n: usize,
    pub bound: f64,
}

/// Minimise [`pauli_violation_bound`] over `1 ≤ n ≤ min(N, n_max)`.
pub fn optimal_pauli_bound(box_volume: f64, eps: f64, n_particles: usize, hbar: f64, n_max: usize) -> Result<OptimalBound> {
    let top = n_max.min(n_particles).min(STIRLING_MAX);
    let mut best = OptimalBound { n: 0, bound: f64::INFINITY };
    for n in 1..=top {
        let b = pauli_violation_bound(n, box_volume, eps, n_particles, hbar)?;
        if b < best.bound {
            best = OptimalBound { n, bound: b };
        }
    }
    if best.n == 0 {
        return Err(Error::InvalidArgument("empty range of moment orders".into()));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(stirling2(4, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(stirling2(10, 3).unwrap(), BigUint::from(9330u32));
        for n in 1..20 {
            assert!(stirling2(n, 1).unwrap().is_one());
            assert!(stirling2(n, n).unwrap().is_one());
        }
        assert!(stirling2(0, 0).unwrap().is_one());
        assert!(stirling2(3, 5).unwrap().is_zero());
    }

    #[test]
    fn range_limit() {
        assert!(stirling2(64, 30).is_ok());
        assert!(matches!(stirling2(65, 3), Err(Error::Overflow(_))));
    }

    #[test]
    fn first_moment() {
        let (v, np, hbar) = (0.3, 50, 0.2);
        let want = v / (np as f64 * (2.0 * PI * hbar).powi(2));
        assert!((box_mass_moment_bound(1, v, np, hbar).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn doubling_one_plus_eps() {
        let a = pauli_violation_bound(5, 0.01, 0.5, 10_000, 0.01).unwrap();
        let b = pauli_violation_bound(5, 0.01, 2.0, 10_000, 0.01).unwrap();
        assert!((a / b - 32.0).abs() < 1e-10);
    }

    #[test]
    fn moment_bound_monotone_in_volume() {
        let mut last = 0.0;
        for v in [0.01, 0.02, 0.05, 0.1] {
            let b = box_mass_moment_bound(6, v, 100, 0.1).unwrap();
            assert!(b > last);
            last = b;
        }
    }
}
