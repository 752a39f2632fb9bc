//! Spectral shift functions of finite-dimensional operator pairs.
//!
//! In finite dimension `xi(E; H1, H0) = N0(E) - N1(E)`, the difference of the
//! eigenvalue counting functions, so every curve here is an exact integer step
//! function. The sign makes `xi >= 0` whenever `H1 - H0 >= 0`.

mod averaging;
mod curve;
mod trace;

pub use averaging::{
    birman_solomyak_residual, birman_solomyak_residual_with, piecewise_quadrature, rank_bound_report,
    spectral_averaging_value, spectral_averaging_value_with, BirmanSolomyakCheck, QuadratureOptions, QuadratureResult,
    RankBoundReport, RankNPerturbation, SpectralAveraging,
};
pub use curve::{merge_tolerance, ssf_from_spectra, SsfCurve, MERGE_RTOL};
pub use trace::{trace_formula_residual, TestFunction, TraceFormulaCheck};
