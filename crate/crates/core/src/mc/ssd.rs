use serde::Serialize;

use super::engine::{cached_spectrum, run_indexed, McPlan};
use crate::cache::SpectrumStore;
use crate::disorder::{sample_disorder, splitmix64, DisorderSample};
use crate::eig::{eigen_decompose, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;
use crate::model::{build_free_hamiltonian, embed_sample, FillRule, ModelSpec};
use crate::report::Table;

/// Mixed into the master seed for the fully disordered reference boxes, so the
/// reference never reuses the couplings of the inner boxes.
pub const SSD_REFERENCE_TAG: u64 = 0x7373_645F_7265_6673;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsdReport {
    pub outer_side: usize,
    pub inner_sides: Vec<usize>,
    pub energies: Vec<f64>,
    pub samples: u64,
    /// `E{xi(E; H0 + chi_Lambda V, H0)} / |Lambda|`, one curve per inner side.
    pub curves: Vec<Vec<f64>>,
    pub curve_stderr: Vec<Vec<f64>>,
    /// `N0(E) - N(E)` per site of the outer box.
    pub reference: Vec<f64>,
    pub reference_stderr: Vec<f64>,
    /// `max_E |curve - reference|` per inner side.
    pub sup_gap: Vec<f64>,
    /// Combined standard error at the maximizing energy.
    pub sup_gap_stderr: Vec<f64>,
    pub sup_gap_energy: Vec<f64>,
}

impl SsdReport {
    /// Sup-gap nonincreasing in `L` up to `k` combined standard errors.
    pub fn sup_gap_nonincreasing(&self, k: f64) -> bool {
        (1..self.sup_gap.len()).all(|i| {
            self.sup_gap[i] <= self.sup_gap[i - 1] + k * self.sup_gap_stderr[i - 1].hypot(self.sup_gap_stderr[i])
        })
    }

    /// One row per energy.
    pub fn table(&self) -> Table {
        let mut cols = vec!["energy".to_string(), "reference".into(), "reference_stderr".into()];
        for l in &self.inner_sides {
            cols.push(format!("ssd_L{l}"));
            cols.push(format!("ssd_L{l}_stderr"));
        }
        let mut t = Table::new(cols);
        for (k, &e) in self.energies.iter().enumerate() {
            let mut row = vec![e, self.reference[k], self.reference_stderr[k]];
            for (c, s) in self.curves.iter().zip(&self.curve_stderr) {
                row.extend([c[k], s[k]]);
            }
            t.push(row).expect("row width matches");
        }
        t
    }

    /// One row per inner side.
    pub fn gap_table(&self) -> Table {
        let mut t = Table::new(["inner_side", "sup_gap", "sup_gap_stderr", "sup_gap_energy"]);
        for i in 0..self.inner_sides.len() {
            t.push(vec![
                self.inner_sides[i] as f64,
                self.sup_gap[i],
                self.sup_gap_stderr[i],
                self.sup_gap_energy[i],
            ])
            .expect("row width matches");
        }
        t
    }
}

/// `xi(E; H0 + chi_Lambda V_omega, H0) / |Lambda|` at each energy, for the inner
/// sample embedded centred in `outer_model`'s box with zero couplings outside.
/// `free` is the spectrum of the outer `H0`.
pub fn ssd_curve(
    outer_model: &ModelSpec,
    inner: &DisorderSample,
    free: &Spectrum,
    energies: &[f64],
    store: &dyn SpectrumStore,
) -> Result<Vec<f64>> {
    let embedded = embed_sample(inner, outer_model.geometry(), &FillRule::Zeros)?;
    let spec = cached_spectrum(outer_model, &embedded, store)?;
    let n = inner.geometry().site_count() as f64;
    Ok(energies
        .iter()
        .map(|&e| (free.counting(e) as f64 - spec.counting(e) as f64) / n)
        .collect())
}

/// Averaged SSF per inner site for boxes of increasing side inside a fixed
/// outer box, against the outer-box estimate of `N0 - N`, on the bin centres of
/// the plan's grid.
pub fn ssd_scan(
    model: &ModelSpec,
    inner_sides: &[usize],
    outer_side: usize,
    plan: &McPlan,
    store: &dyn SpectrumStore,
) -> Result<SsdReport> {
    if let Some(l) = inner_sides.iter().find(|&&l| l >= outer_side) {
        return Err(Error::param(
            "inner_L",
            format!("inner side {l} must be smaller than the outer side {outer_side}"),
        ));
    }
    let dim = model.geometry().dim();
    let outer = BoxGeometry::new(dim, outer_side)?;
    let outer_model = model.with_geometry(outer)?;
    let free = eigen_decompose(&build_free_hamiltonian(&outer, model.background())?, false)?;
    let energies = plan.grid().centers();
    let n_out = outer.site_count() as f64;

    let ref_plan = plan.with_master_seed(splitmix64(plan.master_seed() ^ SSD_REFERENCE_TAG));
    let reference = run_indexed(&ref_plan, |i| {
        let s = sample_disorder(model.disorder(), &outer, ref_plan.master_seed(), i);
        let spec = cached_spectrum(&outer_model, &s, store)?;
        Ok(energies
            .iter()
            .map(|&e| (free.counting(e) as f64 - spec.counting(e) as f64) / n_out)
            .collect())
    })?;

    let mut report = SsdReport {
        outer_side,
        inner_sides: inner_sides.to_vec(),
        energies: energies.clone(),
        samples: reference.samples,
        curves: Vec::new(),
        curve_stderr: Vec::new(),
        reference: reference.mean.clone(),
        reference_stderr: reference.stderr.clone(),
        sup_gap: Vec::new(),
        sup_gap_stderr: Vec::new(),
        sup_gap_energy: Vec::new(),
    };
    for &side in inner_sides {
        let inner = BoxGeometry::new(dim, side)?;
        let agg = run_indexed(plan, |i| {
            let s = sample_disorder(model.disorder(), &inner, plan.master_seed(), i);
            ssd_curve(&outer_model, &s, &free, &energies, store)
        })?;
        let (mut gap, mut at) = (f64::NEG_INFINITY, 0);
        for k in 0..energies.len() {
            let g = (agg.mean[k] - reference.mean[k]).abs();
            if g > gap {
                gap = g;
                at = k;
            }
        }
        report.sup_gap.push(gap);
        report.sup_gap_stderr.push(agg.stderr[at].hypot(reference.stderr[at]));
        report.sup_gap_energy.push(energies[at]);
        report.curves.push(agg.mean);
        report.curve_stderr.push(agg.stderr);
    }
    Ok(report)
}
