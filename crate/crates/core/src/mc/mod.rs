//! Reproducible Monte Carlo over disorder realizations.
//!
//! Every realization `i` is drawn from its own ChaCha stream seeded by
//! `(master_seed, i)`, evaluated independently, and aggregated in index order,
//! so results do not depend on the worker count.

mod engine;
mod measures;
mod ssd;
mod thermo;
mod wegner;

pub use engine::{
    map_indexed, run_indexed, run_realizations, spectral_bounds, Aggregate, BinGrid, McPlan, EDGE_OFFSET,
};
pub use measures::{
    dos_bins, dos_ssf_identity_report, expected_ssf_bins, kappa_bins, IdentityReport, KappaEstimate, MeasureEstimate,
    Normalization,
};
pub use ssd::{ssd_curve, ssd_scan, SsdReport, SSD_REFERENCE_TAG};
pub use thermo::{thermo_error_scan, ThermoReport, ThermoRow};
pub use wegner::{wegner_scan, WegnerPoint, WegnerReport};
