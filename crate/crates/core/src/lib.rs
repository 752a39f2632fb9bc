//! Finite-volume random lattice Schrödinger operators and their exact spectral
//! shift functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`], [`disorder`], [`model`], [`operator`]: periodic boxes, iid
//!   couplings and the Hamiltonians `H0 + lambda * sum_j omega_j u_j`.
//! - [`eig`]: dense symmetric eigendecomposition, counting functions and
//!   weighted spectral traces.
//! - [`ssf`]: spectral shift functions as exact integer step curves, trace
//!   formula and coupling-averaged identities, finite-rank bounds.
//! - [`mc`]: reproducible Monte Carlo over disorder realizations.
//! - [`lab`]: experiment configs, spectrum cache and report files behind the
//!   `ssf-lab` binary.

// `!(x >= 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod disorder;
pub mod eig;
pub mod error;
pub mod geometry;
pub mod lab;
pub mod mc;
pub mod model;
pub mod operator;
pub mod report;
pub mod ssf;

pub use disorder::{sample_disorder, DisorderDistribution, DisorderSample};
pub use eig::{eigen_decompose, EnergyInterval, Spectrum};
pub use error::{Error, Result};
pub use geometry::BoxGeometry;
pub use model::{assemble_hamiltonian, build_free_hamiltonian, random_potential, ModelSpec, SiteProfile};
pub use operator::SymmetricOperator;
pub use ssf::SsfCurve;
