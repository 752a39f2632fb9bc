use serde::Serialize;

use super::engine::{cached_spectrum, run_realizations, BinGrid, McPlan};
use crate::cache::SpectrumStore;
use crate::disorder::DisorderSample;
use crate::eig::eigen_decompose;
use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, sum_profile_potential, with_site_coupling, ModelSpec};
use crate::report::Table;
use crate::ssf::{ssf_from_spectra, SsfCurve};

/// Whether bin values were divided by the site count `n = |Lambda|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    PerSite,
    Raw,
}

/// Per-bin Monte Carlo estimate of a density (bin mass divided by the bin width).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub grid: BinGrid,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub normalization: Normalization,
    pub plan: McPlan,
    pub model_hash: u64,
}

impl MeasureEstimate {
    /// `sum_bins mean * h`.
    pub fn total_mass(&self) -> f64 {
        self.mean.iter().sum::<f64>() * self.grid.width()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["bin_start", "bin_end", "mean", "stderr"]);
        for (k, bin) in self.grid.bins().enumerate() {
            t.push(vec![bin.start(), bin.end(), self.mean[k], self.stderr[k]])
                .expect("row width matches");
        }
        t
    }
}

/// `xi(E; H_{j-perp} + u_j, H_{j-perp})` at the box centre `j`, where
/// `H_{j-perp}` has the coupling at `j` set to zero.
pub(crate) fn centre_site_ssf(
    model: &ModelSpec,
    sample: &DisorderSample,
    store: &dyn SpectrumStore,
) -> Result<SsfCurve> {
    let j = model.geometry().center();
    let off = with_site_coupling(sample, j, 0.0);
    let on = with_site_coupling(sample, j, 1.0);
    ssf_from_spectra(
        &cached_spectrum(model, &off, store)?,
        &cached_spectrum(model, &on, store)?,
    )
}

/// `E{int_bin xi(E; H_{j-perp} + u_j, H_{j-perp}) dE} / h` with `j` at the box centre.
///
/// Periodic boundary conditions make every site equivalent, so the centre is
/// representative.
pub fn expected_ssf_bins(model: &ModelSpec, plan: &McPlan, store: &dyn SpectrumStore) -> Result<MeasureEstimate> {
    let grid = *plan.grid();
    let h = grid.width();
    let agg = run_realizations(model, plan, |sample| {
        let curve = centre_site_ssf(model, sample, store)?;
        Ok(grid.bins().map(|b| curve.integrate(&b) / h).collect())
    })?;
    Ok(MeasureEstimate {
        grid,
        mean: agg.mean,
        stderr: agg.stderr,
        samples: agg.samples,
        normalization: Normalization::Raw,
        plan: *plan,
        model_hash: model.hash(),
    })
}

/// Finite-volume density of states `E{count_in(bin)} / (n h)`.
pub fn dos_bins(model: &ModelSpec, plan: &McPlan, store: &dyn SpectrumStore) -> Result<MeasureEstimate> {
    let grid = *plan.grid();
    let scale = 1.0 / (model.geometry().site_count() as f64 * grid.width());
    let agg = run_realizations(model, plan, |sample| {
        let spec = cached_spectrum(model, sample, store)?;
        Ok(grid.bins().map(|b| spec.count_in(&b) as f64 * scale).collect())
    })?;
    Ok(MeasureEstimate {
        grid,
        mean: agg.mean,
        stderr: agg.stderr,
        samples: agg.samples,
        normalization: Normalization::PerSite,
        plan: *plan,
        model_hash: model.hash(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub measure: MeasureEstimate,
    /// `C0 = max_x sum_j lambda u_j(x)`.
    pub c0: f64,
    /// Largest `sum_j Tr u_j^{1/2} E(bin) u_j^{1/2} - C0 Tr E(bin)` over all
    /// realizations and bins; never positive beyond rounding.
    pub max_bound_excess: f64,
    pub bound_holds: bool,
}

/// Slack for inequalities that hold exactly in exact arithmetic.
pub(crate) fn exact_slack(n: usize, scale: f64) -> f64 {
    1e-10 * n as f64 * scale.max(1.0)
}

/// `kappa_Lambda(bin) / h` with
/// `kappa_Lambda(bin) = E{sum_j Tr u_j^{1/2} E(bin) u_j^{1/2}} / |Lambda|`, plus the
/// per-realization bound against `C0 Tr E(bin)`. Needs eigenvectors, so no cache.
pub fn kappa_bins(model: &ModelSpec, plan: &McPlan) -> Result<KappaEstimate> {
    let grid = *plan.grid();
    let n = model.geometry().site_count();
    let w = sum_profile_potential(model.geometry(), model.profile(), model.coupling())?;
    let c0 = w.iter().copied().fold(0.0, f64::max);
    let scale = 1.0 / (n as f64 * grid.width());
    let agg = run_realizations(model, plan, |sample| {
        let spec = eigen_decompose(&assemble_hamiltonian(model, sample)?, true)?;
        let mut row = Vec::with_capacity(grid.len() + 1);
        let mut excess = f64::NEG_INFINITY;
        for b in grid.bins() {
            let k = spec.weighted_projector_trace(&w, &b)?;
            excess = excess.max(k - c0 * spec.count_in(&b) as f64);
            row.push(k * scale);
        }
        row.push(excess);
        Ok(row)
    })?;
    let m = grid.len();
    let max_bound_excess = agg.max[m];
    Ok(KappaEstimate {
        measure: MeasureEstimate {
            grid,
            mean: agg.mean[..m].to_vec(),
            stderr: agg.stderr[..m].to_vec(),
            samples: agg.samples,
            normalization: Normalization::PerSite,
            plan: *plan,
            model_hash: model.hash(),
        },
        c0,
        max_bound_excess,
        bound_holds: max_bound_excess <= exact_slack(n, c0),
    })
}

/// Bin masses of the averaged SSF, of `kappa` and of the DOS, side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub grid: BinGrid,
    pub samples: u64,
    /// `int_bin E{xi} dE`.
    pub ssf: Vec<f64>,
    pub ssf_stderr: Vec<f64>,
    /// `kappa_Lambda(bin)`.
    pub kappa: Vec<f64>,
    pub kappa_stderr: Vec<f64>,
    /// `nu(bin) * h`, i.e. the per-site eigenvalue count in the bin.
    pub nu: Vec<f64>,
    pub nu_stderr: Vec<f64>,
    /// `ssf - kappa`.
    pub diff: Vec<f64>,
    /// Standard error of `diff`: from paired per-realization differences when
    /// both estimators ran on the same realizations, otherwise the root sum of
    /// squares of the two marginal errors.
    pub diff_stderr: Vec<f64>,
    /// Largest `|sum_j Tr u_j^{1/2} E(bin) u_j^{1/2} - Tr E(bin)|` over realizations
    /// and bins; zero up to rounding for the delta profile. `None` when the report
    /// was assembled from separate estimates.
    pub max_kappa_nu_gap: Option<f64>,
}

impl IdentityReport {
    /// Fraction of bins with `|diff| <= k * diff_stderr`. Bins where every
    /// column is identically zero carry no information and are left out.
    pub fn agreement_fraction(&self, k: f64) -> f64 {
        let mut informative = 0usize;
        let mut agree = 0usize;
        for b in 0..self.grid.len() {
            let empty = self.ssf[b] == 0.0 && self.kappa[b] == 0.0 && self.diff_stderr[b] == 0.0;
            if empty {
                continue;
            }
            informative += 1;
            if self.diff[b].abs() <= k * self.diff_stderr[b] {
                agree += 1;
            }
        }
        if informative == 0 {
            1.0
        } else {
            agree as f64 / informative as f64
        }
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "bin_start",
            "bin_end",
            "ssf_integral",
            "ssf_stderr",
            "kappa",
            "kappa_stderr",
            "nu_h",
            "nu_stderr",
            "difference",
            "difference_stderr",
        ]);
        for (b, bin) in self.grid.bins().enumerate() {
            t.push(vec![
                bin.start(),
                bin.end(),
                self.ssf[b],
                self.ssf_stderr[b],
                self.kappa[b],
                self.kappa_stderr[b],
                self.nu[b],
                self.nu_stderr[b],
                self.diff[b],
                self.diff_stderr[b],
            ])
            .expect("row width matches");
        }
        t
    }

    /// Combines estimates computed separately. They must come from the same
    /// model and plan, so that they are built on the same realizations.
    pub fn from_estimates(ssf: &MeasureEstimate, kappa: &MeasureEstimate, dos: &MeasureEstimate) -> Result<Self> {
        for other in [kappa, dos] {
            if other.plan != ssf.plan {
                return Err(Error::param("plan", "estimates were computed with different plans"));
            }
            if other.model_hash != ssf.model_hash {
                return Err(Error::param("model", "estimates were computed for different models"));
            }
        }
        let h = ssf.grid.width();
        let scaled = |v: &[f64]| v.iter().map(|x| x * h).collect::<Vec<_>>();
        let diff = ssf.mean.iter().zip(&kappa.mean).map(|(a, b)| (a - b) * h).collect();
        let diff_stderr = ssf
            .stderr
            .iter()
            .zip(&kappa.stderr)
            .map(|(a, b)| a.hypot(*b) * h)
            .collect();
        Ok(IdentityReport {
            grid: ssf.grid,
            samples: ssf.samples,
            ssf: scaled(&ssf.mean),
            ssf_stderr: scaled(&ssf.stderr),
            kappa: scaled(&kappa.mean),
            kappa_stderr: scaled(&kappa.stderr),
            nu: scaled(&dos.mean),
            nu_stderr: scaled(&dos.stderr),
            diff,
            diff_stderr,
            max_kappa_nu_gap: None,
        })
    }
}

/// One pass over shared realizations computing the averaged SSF bin masses,
/// `kappa_Lambda` and the DOS, with paired standard errors for the difference.
///
/// The two sides agree in expectation when couplings are uniform on `[0, 1]`
/// and the background is translation invariant.
pub fn dos_ssf_identity_report(model: &ModelSpec, plan: &McPlan, store: &dyn SpectrumStore) -> Result<IdentityReport> {
    let grid = *plan.grid();
    let m = grid.len();
    let n = model.geometry().site_count() as f64;
    let w = sum_profile_potential(model.geometry(), model.profile(), model.coupling())?;
    let agg = run_realizations(model, plan, |sample| {
        let curve = centre_site_ssf(model, sample, store)?;
        let spec = eigen_decompose(&assemble_hamiltonian(model, sample)?, true)?;
        let mut row = vec![0.0; 4 * m + 1];
        let mut gap: f64 = 0.0;
        for (b, bin) in grid.bins().enumerate() {
            let x = curve.integrate(&bin);
            let k = spec.weighted_projector_trace(&w, &bin)?;
            let c = spec.count_in(&bin) as f64;
            gap = gap.max((k - c).abs());
            row[b] = x;
            row[m + b] = k / n;
            row[2 * m + b] = c / n;
            row[3 * m + b] = x - k / n;
        }
        row[4 * m] = gap;
        Ok(row)
    })?;
    let part = |v: &[f64], p: usize| v[p * m..(p + 1) * m].to_vec();
    Ok(IdentityReport {
        grid,
        samples: agg.samples,
        ssf: part(&agg.mean, 0),
        ssf_stderr: part(&agg.stderr, 0),
        kappa: part(&agg.mean, 1),
        kappa_stderr: part(&agg.stderr, 1),
        nu: part(&agg.mean, 2),
        nu_stderr: part(&agg.stderr, 2),
        diff: part(&agg.mean, 3),
        diff_stderr: part(&agg.stderr, 3),
        max_kappa_nu_gap: Some(agg.max[4 * m]),
    })
}
