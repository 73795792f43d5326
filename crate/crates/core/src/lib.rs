//! Mean-field and semi-classical ground-state numerics for a 2D gas of
//! almost-fermionic anyons.
//!
//! The crate is organised by subsystem:
//!
//! * [`kernels`]: the smeared 2D Coulomb kernel `w_R`, its radial derivatives
//!   and the statistical gauge field `A^R[ρ] = ∇⊥w_R * ρ`.
//! * [`tf_solver`]: the Thomas-Fermi bathtub minimiser under a mass constraint.
//! * [`vlasov`]: phase-space densities, the Vlasov energy with the
//!   self-consistent gauge field, the explicit minimiser and its marginals.
//! * [`coherent_husimi`]: squeezed coherent states and Husimi functions of
//!   Slater determinants.
//! * [`hartree_fock`]: Wick-expanded energies of Slater determinants, the
//!   Hartree functional and brute-force many-body oracles.
//! * [`diaconis_freedman`]: empirical measures, the Diaconis-Freedman
//!   construction, Stirling numbers and Pauli-violation probabilities.
//! * [`regime`]: the `N`-dependent scaling of `ħ`, `α` and `R`.

pub mod coherent_husimi;
pub mod diaconis_freedman;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod grid;
pub mod hartree_fock;
pub mod kernels;
pub mod potentials;
pub mod quad;
pub mod regime;
pub mod slater;
pub mod tf_solver;
pub mod vlasov;

pub use error::{Error, Result};
pub use grid::{DensityField, Grid2D, VectorField2D};
pub use potentials::{ExternalField, Trap};
pub use regime::ScalingRegime;
