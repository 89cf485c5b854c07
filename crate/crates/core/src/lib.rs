//! Numerical laboratory for false-vacuum decay on a ferromagnetic quantum
//! Ising ring.
//!
//! The model is the transverse/longitudinal-field Ising chain on a ring of
//! `N` sites,
//!
//! ```text
//! H = -J Σ_j σᶻ_j σᶻ_{j+1} - h_x Σ_j σˣ_j - h_z Σ_j σᶻ_j ,
//! ```
//!
//! with periodic boundary conditions. Quenching the longitudinal field to
//! the resonant values `h_z = -2J/n` balances the domain-wall surface cost
//! `4J` against the volume gain `2|h_z|n` and nucleates quantized
//! `n`-bubbles of flipped spins out of the polarized state. This crate
//! provides everything needed to reproduce that physics at desk scale:
//!
//! - [`lattice`]: ring bit-configurations, sectors, bubble decomposition;
//! - [`hamiltonian`]: sparse operators for the full and annealer-form model;
//! - [`effective`]: the resonance effective Hamiltonians, the blockaded
//!   (PXP) subspace, and their couplings;
//! - [`swt`]: a numerical quasi-degenerate perturbation-theory extractor
//!   used as the oracle for the effective coupling coefficients;
//! - [`schedule`] and [`evolve`]: drive protocols and exact state-vector
//!   propagation (Krylov and dense-eigenbasis backends);
//! - [`mps`]: 4th-order TEBD matrix-product-state evolution for open chains
//!   beyond exact reach;
//! - [`redfield`]: Bloch-Redfield master-equation dynamics with per-site
//!   σᶻ bath coupling and an Ohmic spectrum;
//! - [`observables`]: magnetization, n-bubble densities λₙ, the blockade
//!   density Q_B, interface profiles, and z-basis shot sampling;
//! - [`analysis`]: resonance scans, Landau-Zener exponent fits, and
//!   scaling-collapse quantification.
//!
//! All energies are measured in units of `J` and times in units of `1/J`
//! with `ħ = 1`; an optional user-supplied scale factor maps one time unit
//! to physical nanoseconds where needed.
//!
//! The hot loops (sparse matvec, basis enumeration, shot sampling, scans,
//! Redfield assembly) are data-parallel over rayon when the default
//! `parallel` feature is enabled; disabling it yields a fully sequential
//! build with identical results.

pub mod analysis;
pub mod effective;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod hamiltonian;
pub mod lattice;
pub mod mps;
pub mod observables;
pub mod pauli;
pub mod redfield;
pub mod schedule;
pub mod sparse;
pub mod swt;

pub use error::{Error, Result};

/// Shorthand for the complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Largest ring size handled by the dense-eigenbasis backend.
pub const N_MAX_DENSE: usize = 14;

/// Largest ring size handled by the sparse Krylov backend.
pub const N_MAX_KRYLOV: usize = 24;
