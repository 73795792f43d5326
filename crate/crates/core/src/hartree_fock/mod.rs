//! Energies of Slater determinants for the extended-anyon Hamiltonian
//!
//! ```text
//! H = Σ_j (p_j^A + α Σ_{k≠j} ∇⊥w_R(x_j − x_k))² + V(x_j),   p^A = −iħ∇ + A_e,
//! ```
//!
//! expanded into one-body, mixed two-body, singular two-body and three-body
//! pieces, each reduced by Wick's theorem to integrals of the orbitals.
//! [`oracle`] evaluates the same expectation without the reduction.

pub mod oracle;
pub mod semiclassical;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{fft2, Convolver};
use crate::grid::{DensityField, Grid2D, VectorField2D};
use crate::kernels::{apply_gauge, component_convolvers, gauge_convolver, radial_kernel, Kernel, RadialGrid, SmearingProfile};
use crate::potentials::{ExternalField, Trap};
use crate::regime::ScalingRegime;
use crate::slater::SlaterState;

pub use oracle::{direct_energy_oracle, direct_energy_oracle_dense, direct_energy_oracle_mc, OracleEstimate};
pub use semiclassical::{semiclassical_probe, SemiclassicalProbe};

/// Fraction of spectral weight allowed above half the Nyquist frequency.
const TAIL_BUDGET: f64 = 1e-3;

/// The ingredients of `H`: one-body symbol `|p + A_e|² + V`, the pair field
/// `∇⊥w_R` and the coupling `α`.
#[derive(Debug, Clone)]
pub struct InteractionOperators {
    pub hbar: f64,
    pub alpha: f64,
    pub trap: Trap,
    pub external: ExternalField,
    pub kernel: Kernel,
}

impl InteractionOperators {
    pub fn from_regime(
        regime: &ScalingRegime,
        trap: Trap,
        external: ExternalField,
        profile: SmearingProfile,
        radial_grid: RadialGrid,
    ) -> Result<Self> {
        let kernel = Kernel::Smeared(radial_kernel(profile, regime.r(), radial_grid)?);
        Ok(Self { hbar: regime.hbar(), alpha: regime.alpha(), trap, external, kernel })
    }

    pub fn with_kernel(&self, kernel: Kernel) -> Self {
        Self { kernel, ..self.clone() }
    }

    /// One-body symbol `|p + A_e(x)|² + V(x)`.
    pub fn w1(&self, x: [f64; 2], p: [f64; 2]) -> f64 {
        let a = self.external.evaluate(x);
        (p[0] + a[0]).powi(2) + (p[1] + a[1]).powi(2) + self.trap.evaluate(x)
    }

    /// Three-body symbol `∇⊥w_R(x₁ − x₂)·∇⊥w_R(x₁ − x₃)`.
    pub fn w123(&self, x1: [f64; 2], x2: [f64; 2], x3: [f64; 2]) -> f64 {
        let a = self.kernel.grad_perp([x1[0] - x2[0], x1[1] - x2[1]]);
        let b = self.kernel.grad_perp([x1[0] - x3[0], x1[1] - x3[1]]);
        a[0] * b[0] + a[1] * b[1]
    }
}

/// Every term of the Wick-expanded energy; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HFEnergyBreakdown {
    pub kinetic_potential: f64,
    pub mixed_direct: f64,
    pub mixed_exchange: f64,
    pub singular_two_body_direct: f64,
    pub singular_two_body_exchange: f64,
    pub three_body_direct: f64,
    pub three_body_exchange_single: f64,
    pub three_body_exchange_cyclic: f64,
    pub total: f64,
}

impl HFEnergyBreakdown {
    pub fn assemble(&self) -> f64 {
        self.kinetic_potential
            + self.mixed_direct
            + self.mixed_exchange
            + self.singular_two_body_direct
            + self.singular_two_body_exchange
            + self.three_body_direct
            + self.three_body_exchange_single
            + self.three_body_exchange_cyclic
    }

    pub fn exchange_parts(&self) -> f64 {
        self.mixed_exchange + self.singular_two_body_exchange + self.three_body_exchange_single + self.three_body_exchange_cyclic
    }
}

/// Central difference along axis `axis` with zero values outside the grid.
pub fn central_difference(psi: &[Complex64], grid: &Grid2D, axis: usize) -> Vec<Complex64> {
    let n = grid.n;
    let h2 = 2.0 * grid.spacing();
    let zero = Complex64::new(0.0, 0.0);
    (0..grid.len())
        .map(|k| {
            let (ix, iy) = grid.unravel(k);
            let (i, stride) = if axis == 0 { (ix, 1) } else { (iy, n) };
            let fwd = if i + 1 < n { psi[k + stride] } else { zero };
            let bwd = if i > 0 { psi[k - stride] } else { zero };
            (fwd - bwd) / h2
        })
        .collect()
}

/// `p^A ψ = −iħDψ + A_e ψ`, componentwise.
pub fn magnetic_momentum(psi: &[Complex64], grid: &Grid2D, hbar: f64, a_e: &VectorField2D) -> [Vec<Complex64>; 2] {
    let comp = |axis: usize, a: &[f64]| -> Vec<Complex64> {
        central_difference(psi, grid, axis)
            .into_iter()
            .zip(psi.iter().zip(a))
            .map(|(d, (v, av))| Complex64::new(0.0, -hbar) * d + v * av)
            .collect()
    };
    [comp(0, &a_e.x), comp(1, &a_e.y)]
}

/// Share of `Σ|ψ̂|²` carried by wavenumbers beyond half the Nyquist frequency
/// along either axis.
pub fn spectral_tail_fraction(psi: &[Complex64], grid: &Grid2D) -> f64 {
    let n = grid.n;
    let spec = fft2(psi, n);
    let high = |m: usize| m.min(n - m) > n / 4;
    let (mut tail, mut total) = (0.0, 0.0);
    for (k, v) in spec.iter().enumerate() {
        let w = v.norm_sqr();
        total += w;
        if high(k % n) || high(k / n) {
            tail += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

fn check_resolved(state: &SlaterState) -> Result<()> {
    for (j, o) in state.orbitals.iter().enumerate() {
        let f = spectral_tail_fraction(o, &state.grid);
        if f > TAIL_BUDGET {
            return Err(Error::UnderResolved(format!(
                "orbital {j} carries {f:.2e} of its spectral weight above half Nyquist"
            )));
        }
    }
    Ok(())
}

fn dot_re(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pieces shared by the Hartree functional and the full expansion.
struct OneBody {
    rho: DensityField,
    momenta: Vec<[Vec<Complex64>; 2]>,
    field: VectorField2D,
    kinetic_potential: f64,
    mixed_direct: f64,
    three_body_direct: f64,
}

fn one_body(state: &SlaterState, ops: &InteractionOperators) -> Result<OneBody> {
    let grid = state.grid;
    let area = grid.cell_area();
    let a_e = ops.external.sample(&grid)?;
    let momenta: Vec<[Vec<Complex64>; 2]> = state
        .orbitals
        .par_iter()
        .map(|o| magnetic_momentum(o, &grid, ops.hbar, &a_e))
        .collect();
    let rho = state.density();
    let field = apply_gauge(&gauge_convolver(grid, &ops.kernel, 2)?, &rho);

    let kinetic: f64 = momenta
        .iter()
        .map(|[px, py]| px.iter().chain(py).map(|c| c.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * area;
    let potential = dot_re(&ops.trap.sample(&grid), &rho.values) * area;

    let mixed: f64 = state
        .orbitals
        .iter()
        .zip(&momenta)
        .map(|(psi, [px, py])| {
            (0..grid.len())
                .map(|k| (psi[k].conj() * (field.x[k] * px[k] + field.y[k] * py[k])).re)
                .sum::<f64>()
        })
        .sum::<f64>()
        * area;
    let a2: Vec<f64> = field.x.iter().zip(&field.y).map(|(x, y)| x * x + y * y).collect();
    let three = dot_re(&rho.values, &a2) * area;
    Ok(OneBody {
        rho,
        momenta,
        field,
        kinetic_potential: kinetic + potential,
        mixed_direct: 2.0 * ops.alpha * mixed,
        three_body_direct: ops.alpha * ops.alpha * three,
    })
}

/// `N^{-1}(Tr[(p^A + αA[ρ_γ])²γ] + ∫Vρ_γ)` for the projector onto the orbitals.
pub fn hartree_energy(state: &SlaterState, ops: &InteractionOperators) -> Result<f64> {
    let ob = one_body(state, ops)?;
    Ok((ob.kinetic_potential + ob.mixed_direct + ob.three_body_direct) / state.n() as f64)
}

/// The Wick-expanded energy `⟨Ψ^SL, H Ψ^SL⟩` term by term.
pub fn hf_energy(state: &SlaterState, ops: &InteractionOperators) -> Result<HFEnergyBreakdown> {
    let Kernel::Smeared(radial) = &ops.kernel else {
        return Err(Error::InvalidArgument(
            "the singular two-body term needs a smeared kernel (R > 0)".into(),
        ));
    };
    check_resolved(state)?;
    let grid = state.grid;
    let area = grid.cell_area();
    let n_orb = state.n();
    let alpha = ops.alpha;
    let ob = one_body(state, ops)?;
    let psi = &state.orbitals;

    let [kx, ky] = component_convolvers(grid, &ops.kernel, 2)?;
    let h = grid.spacing();
    let k2 = Convolver::new(grid.n, 2, |dx, dy| {
        let u = (dx as f64).hypot(dy as f64) * h;
        let d = if u == 0.0 { 0.0 } else { radial.dw(u) };
        Complex64::new(d * d, 0.0)
    })?;

    // Pair sources ψ_a ψ̄_b and their convolutions; the (b, a) entries follow by
    // conjugation because the kernels are real.
    let pairs: Vec<(usize, usize)> = (0..n_orb).flat_map(|a| (a..n_orb).map(move |b| (a, b))).collect();
    let computed: Vec<((usize, usize), [Vec<Complex64>; 2], Vec<Complex64>)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let src: Vec<Complex64> = psi[a].iter().zip(&psi[b]).map(|(u, v)| u * v.conj()).collect();
            let scale = |v: Vec<Complex64>| -> Vec<Complex64> { v.into_iter().map(|c| c * area).collect() };
            ((a, b), [scale(kx.apply(&src)), scale(ky.apply(&src))], scale(k2.apply(&src)))
        })
        .collect();
    let mut bfield: Vec<Vec<Option<[Vec<Complex64>; 2]>>> = vec![vec![None; n_orb]; n_orb];
    let mut sfield: Vec<Vec<Option<Vec<Complex64>>>> = vec![vec![None; n_orb]; n_orb];
    for ((a, b), bv, sv) in computed {
        if a != b {
            let conj = |v: &Vec<Complex64>| v.iter().map(|c| c.conj()).collect::<Vec<_>>();
            bfield[b][a] = Some([conj(&bv[0]), conj(&bv[1])]);
            sfield[b][a] = Some(conj(&sv));
        }
        bfield[a][b] = Some(bv);
        sfield[a][b] = Some(sv);
    }
    let b_of = |a: usize, b: usize| bfield[a][b].as_ref().expect("filled");
    let s_of = |a: usize, b: usize| sfield[a][b].as_ref().expect("filled");

    let rho = &ob.rho.values;
    let field = &ob.field;
    let mut mixed_ex = 0.0;
    let mut sing_ex = 0.0;
    let mut three_single = 0.0;
    for a in 0..n_orb {
        for b in 0..n_orb {
            let [bx, by] = b_of(a, b);
            let s = s_of(a, b);
            let [px, py] = &ob.momenta[b];
            let mut m = Complex64::new(0.0, 0.0);
            let mut sx = Complex64::new(0.0, 0.0);
            let mut t1 = 0.0;
            let mut t2 = Complex64::new(0.0, 0.0);
            for k in 0..grid.len() {
                let pair = psi[a][k] * psi[b][k].conj();
                m += psi[a][k].conj() * (px[k] * bx[k] + py[k] * by[k]);
                sx += pair.conj() * s[k];
                t1 += rho[k] * (bx[k].norm_sqr() + by[k].norm_sqr());
                t2 += pair * (field.x[k] * bx[k].conj() + field.y[k] * by[k].conj());
            }
            mixed_ex += m.re;
            sing_ex += sx.re;
            three_single += t1 + 2.0 * t2.re;
        }
    }
    let mut cyclic = 0.0;
    for a in 0..n_orb {
        for b in 0..n_orb {
            let [bab_x, bab_y] = b_of(a, b);
            for c in 0..n_orb {
                let [bbc_x, bbc_y] = b_of(b, c);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..grid.len() {
                    let dot = bab_x[k].conj() * bbc_x[k].conj() + bab_y[k].conj() * bbc_y[k].conj();
                    acc += psi[a][k] * psi[c][k].conj() * dot;
                }
                cyclic += acc.re;
            }
        }
    }
    let sing_direct: f64 = {
        let conv = k2.apply_real(rho);
        rho.iter().zip(&conv).map(|(r, c)| r * c.re).sum::<f64>() * area * area
    };

    let mut out = HFEnergyBreakdown {
        kinetic_potential: ob.kinetic_potential,
        mixed_direct: ob.mixed_direct,
        mixed_exchange: -2.0 * alpha * mixed_ex * area,
        singular_two_body_direct: alpha * alpha * sing_direct,
        singular_two_body_exchange: -alpha * alpha * sing_ex * area,
        three_body_direct: ob.three_body_direct,
        three_body_exchange_single: -alpha * alpha * three_single * area,
        three_body_exchange_cyclic: 2.0 * alpha * alpha * cyclic * area,
        total: 0.0,
    };
    out.total = out.assemble();
    Ok(out)
}

/// `C·R·e^{3/2}`, the regularisation-gap bound with a calibrated constant.
pub fn regularization_gap_bound(e_af: f64, r: f64, constant: f64) -> Result<f64> {
    if !(e_af >= 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("need e_af ≥ 0 and R ≥ 0, got {e_af}, {r}")));
    }
    Ok(constant * r * e_af.powf(1.5))
}

/// `max_R ‖∇w_R − ∇w_0‖_{L¹}/R` over a decade sweep of `R`, the constant used in
/// [`regularization_gap_bound`].
pub fn calibrate_gap_constant(profile: SmearingProfile) -> Result<f64> {
    [1.0, 0.3, 0.1, 0.03, 0.01]
        .iter()
        .map(|&r| crate::kernels::kernel_gap_lp_norm(profile, r, 1.0).map(|v| v / r))
        .try_fold(0.0, |acc, v| v.map(|v| f64::max(acc, v)))
}
