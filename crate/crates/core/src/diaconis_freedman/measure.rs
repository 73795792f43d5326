//! Symmetric probability measures on `Nth` powers of a finite atom set, their
//! marginals and their Diaconis-Freedman approximations, all in exact rational
//! arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `N` and atom count accepted by the exact enumeration.
pub const MAX_PARTICLES: usize = 5;
pub const MAX_ATOMS: usize = 4;

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Mixed-radix digits of `index` in base `atoms`, most significant first.
pub fn tuple_of(index: usize, atoms: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % atoms;
        rest /= atoms;
    }
    out
}

pub fn index_of(tuple: &[usize], atoms: usize) -> usize {
    tuple.iter().fold(0, |acc, &a| acc * atoms + a)
}

/// A measure on `atoms^arity` tuples, stored densely in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleMeasure {
    pub atoms: usize,
    pub arity: usize,
    pub weights: Vec<BigRational>,
}

impl TupleMeasure {
    pub fn zeros(atoms: usize, arity: usize) -> Self {
        Self { atoms, arity, weights: vec![BigRational::zero(); atoms.pow(arity as u32)] }
    }

    pub fn weight(&self, tuple: &[usize]) -> &BigRational {
        &self.weights[index_of(tuple, self.atoms)]
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// Mass of `set^arity`, `set` given as a membership mask over atoms.
    pub fn mass_of_power(&self, set: &[bool]) -> BigRational {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| tuple_of(*i, self.atoms, self.arity).iter().all(|&a| set[a]))
            .fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    /// Sum over the trailing coordinates, keeping the first `arity`.
    pub fn marginal(&self, arity: usize) -> Result<Self> {
        if arity == 0 || arity > self.arity {
            return Err(Error::InvalidArgument(format!(
                "marginal of order {arity} of a measure on {}-tuples",
                self.arity
            )));
        }
        let mut out = Self::zeros(self.atoms, arity);
        let drop = self.atoms.pow((self.arity - arity) as u32);
        for (i, w) in self.weights.iter().enumerate() {
            out.weights[i / drop] += w;
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.atoms != other.atoms || self.arity != other.arity {
            return Err(Error::InvalidArgument(format!(
                "measures on {}^{} and {}^{} tuples",
                self.atoms, self.arity, other.atoms, other.arity
            )));
        }
        Ok(())
    }
}

/// `sup_{‖φ‖_∞ ≤ 1} |∫φ d(a − b)| = Σ |a − b|`, so values lie in `[0, 2]` for
/// probability measures (not the half-L¹ convention).
pub fn tv_distance(a: &TupleMeasure, b: &TupleMeasure) -> Result<BigRational> {
    a.check_compatible(b)?;
    Ok(a.weights.iter().zip(&b.weights).fold(BigRational::zero(), |acc, (x, y)| acc + (x - y).abs()))
}

/// A symmetric probability measure on configurations of `n_particles` atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSymmetricMeasure {
    /// Phase-space location `(x, p)` of each atom.
    pub support: Vec<[f64; 4]>,
    pub joint: TupleMeasure,
}

impl DiscreteSymmetricMeasure {
    /// Validate nonnegativity, unit mass and permutation symmetry, within the
    /// enumeration budget.
    pub fn new(support: Vec<[f64; 4]>, n_particles: usize, joint_weights: Vec<BigRational>) -> Result<Self> {
        check_budget(n_particles, support.len())?;
        let atoms = support.len();
        if joint_weights.len() != atoms.pow(n_particles as u32) {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {atoms}^{n_particles} configurations",
                joint_weights.len()
            )));
        }
        let joint = TupleMeasure { atoms, arity: n_particles, weights: joint_weights };
        if joint.weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidArgument("negative weight".into()));
        }
        if !joint.total().is_one() {
            return Err(Error::InvalidArgument("weights do not sum to one".into()));
        }
        for (i, w) in joint.weights.iter().enumerate() {
            let mut t = tuple_of(i, atoms, n_particles);
            t.sort_unstable();
            if joint.weight(&t) != w {
                return Err(Error::InvalidArgument(format!("weights not symmetric at configuration {i}")));
            }
        }
        Ok(Self { support, joint })
    }

    /// Symmetrise arbitrary nonnegative integer weights and normalise them.
    pub fn symmetrized(support: Vec<[f64; 4]>, n_particles: usize, raw: &[u64]) -> Result<Self> {
        check_budget(n_particles, support.len())?;
        let atoms = support.len();
        if raw.len() != atoms.pow(n_particles as u32) {
            return Err(Error::InvalidArgument(format!("{} weights for {atoms}^{n_particles} configurations", raw.len())));
        }
        // Configurations with the same sorted tuple share the orbit total.
        let mut orbit_total = vec![0u64; raw.len()];
        let mut orbit_size = vec![0u64; raw.len()];
        for (i, &w) in raw.iter().enumerate() {
            let mut t = tuple_of(i, atoms, n_particles);
            t.sort_unstable();
            let key = index_of(&t, atoms);
            orbit_total[key] += w;
            orbit_size[key] += 1;
        }
        let total: u64 = raw.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("all weights are zero".into()));
        }
        let weights = (0..raw.len())
            .map(|i| {
                let mut t = tuple_of(i, atoms, n_particles);
                t.sort_unstable();
                let key = index_of(&t, atoms);
                BigRational::new(
                    BigInt::from(orbit_total[key]),
                    BigInt::from(orbit_size[key]) * BigInt::from(total),
                )
            })
            .collect();
        Self::new(support, n_particles, weights)
    }

    pub fn n_particles(&self) -> usize {
        self.joint.arity
    }

    pub fn atoms(&self) -> usize {
        self.joint.atoms
    }

    /// `μ^(n)`.
    pub fn marginal(&self, n: usize) -> Result<TupleMeasure> {
        self.joint.marginal(n)
    }

    /// Configuration probabilities as floats, for sampling.
    pub fn weights_f64(&self) -> Vec<f64> {
        self.joint.weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect()
    }
}

fn check_budget(n_particles: usize, atoms: usize) -> Result<()> {
    if n_particles == 0 || atoms == 0 {
        return Err(Error::InvalidArgument("need at least one particle and one atom".into()));
    }
    if n_particles > MAX_PARTICLES || atoms > MAX_ATOMS {
        return Err(Error::BudgetExceeded(format!(
            "exact enumeration limited to N ≤ {MAX_PARTICLES}, {MAX_ATOMS} atoms; got N = {n_particles}, {atoms} atoms"
        )));
    }
    Ok(())
}

/// `μ̃^(n)` by enumerating every configuration and every map `{1..n} → {1..N}`:
/// each configuration `Z` contributes `μ(Z)·N^{-n}` to `(z_{γ(1)}, …, z_{γ(n)})`.
pub fn df_marginal_exact(mu: &DiscreteSymmetricMeasure, n: usize) -> Result<TupleMeasure> {
    let np = mu.n_particles();
    let atoms = mu.atoms();
    if n == 0 || n > MAX_PARTICLES {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ {MAX_PARTICLES}, got {n}")));
    }
    let maps = np.pow(n as u32);
    let scale = BigRational::new(BigInt::one(), BigInt::from(maps));
    let mut out = TupleMeasure::zeros(atoms, n);
    let mut image = vec![0usize; n];
    for (ci, w) in mu.joint.weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let z = tuple_of(ci, atoms, np);
        let share = w * &scale;
        for g in 0..maps {
            for (slot, j) in image.iter_mut().zip(tuple_of(g, np, n)) {
                *slot = z[j];
            }
            out.weights[index_of(&image, atoms)] += &share;
        }
    }
    Ok(out)
}

/// `μ̃^(1) = μ^(1)`.
pub fn df_first_marginal_formula(mu: &DiscreteSymmetricMeasure) -> Result<TupleMeasure> {
    mu.marginal(1)
}

/// `μ̃^(2) = (N−1)/N·μ^(2) + N^{-1}μ^(1)(X₁)δ_{X₁=X₂}`.
pub fn df_second_marginal_formula(mu: &DiscreteSymmetricMeasure) -> Result<TupleMeasure> {
    let np = mu.n_particles() as i64;
    let atoms = mu.atoms();
    let m1 = mu.marginal(1)?;
    let mut out = TupleMeasure::zeros(atoms, 2);
    if np >= 2 {
        let m2 = mu.marginal(2)?;
        let c = BigRational::new(BigInt::from(np - 1), BigInt::from(np));
        for (o, w) in out.weights.iter_mut().zip(&m2.weights) {
            *o += w * &c;
        }
    }
    let d = BigRational::new(BigInt::one(), BigInt::from(np));
    for a in 0..atoms {
        out.weights[index_of(&[a, a], atoms)] += &m1.weights[a] * &d;
    }
    Ok(out)
}

/// The four-term expansion of `μ̃^(3)` in `μ^(3)`, `μ^(2)` and `μ^(1)`.
pub fn df_third_marginal_formula(mu: &DiscreteSymmetricMeasure) -> Result<TupleMeasure> {
    let np = mu.n_particles() as i64;
    let atoms = mu.atoms();
    let n2 = rational(np * np);
    let m1 = mu.marginal(1)?;
    let mut out = TupleMeasure::zeros(atoms, 3);
    if np >= 3 {
        let m3 = mu.marginal(3)?;
        let c = rational(np * (np - 1) * (np - 2)) / rational(np * np * np);
        for (o, w) in out.weights.iter_mut().zip(&m3.weights) {
            *o += w * &c;
        }
    }
    if np >= 2 {
        let m2 = mu.marginal(2)?;
        let c = rational(np - 1) / &n2;
        for i in 0..out.weights.len() {
            let t = tuple_of(i, atoms, 3);
            let (x1, x2, x3) = (t[0], t[1], t[2]);
            let mut acc = BigRational::zero();
            if x1 == x2 {
                acc += m2.weight(&[x1, x3]);
            }
            if x2 == x3 {
                acc += m2.weight(&[x2, x1]);
            }
            if x3 == x1 {
                acc += m2.weight(&[x3, x2]);
            }
            out.weights[i] += acc * &c;
        }
    }
    let d = rational(1) / &n2;
    for a in 0..atoms {
        out.weights[index_of(&[a, a, a], atoms)] += &m1.weights[a] * &d;
    }
    Ok(out)
}

/// Closed form of `μ̃^(n)` for `n ≤ 3`.
pub fn df_marginal_formula(mu: &DiscreteSymmetricMeasure, n: usize) -> Result<TupleMeasure> {
    match n {
        1 => df_first_marginal_formula(mu),
        2 => df_second_marginal_formula(mu),
        3 => df_third_marginal_formula(mu),
        _ => Err(Error::InvalidArgument(format!("closed forms exist for n ≤ 3, got {n}"))),
    }
}

/// `∫_{Ω^n} μ̃^(n) = N^{-n} Σ_k N!/(N−k)!·S(n,k)·μ^(k)(Ω^k)`, the identity behind
/// the box moment bound, evaluated exactly.
pub fn df_box_mass_by_partitions(mu: &DiscreteSymmetricMeasure, set: &[bool], n: usize) -> Result<BigRational> {
    let np = mu.n_particles();
    let mut acc = BigRational::zero();
    for k in 1..=n.min(np) {
        let falling: BigInt = (0..k).map(|j| BigInt::from(np - j)).product();
        let s = BigInt::from(super::stirling::stirling2(n, k)?);
        acc += BigRational::from_integer(falling * s) * mu.marginal(k)?.mass_of_power(set);
    }
    Ok(acc / BigRational::from_integer(BigInt::from(np).pow(n as u32)))
}
