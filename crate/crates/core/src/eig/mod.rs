//! Symmetric eigendecomposition and the spectral functionals built on it.

mod solver;
mod spectrum;

pub use solver::MAX_QL_SWEEPS;
pub use spectrum::{eigen_decompose, EnergyInterval, Spectrum};

#[cfg(test)]
mod tests;
