use serde::Serialize;

use super::engine::{cached_spectrum, run_realizations, McPlan};
use crate::cache::SpectrumStore;
use crate::eig::EnergyInterval;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::report::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WegnerPoint {
    pub eps: f64,
    /// `E{count_in([E0 - eps, E0 + eps))} / |Lambda|`.
    pub count_per_site: f64,
    pub count_stderr: f64,
    /// `P{dist(sigma(H), E0) < eps}`.
    pub probability: f64,
    pub probability_stderr: f64,
    /// `|y - C_W eps| / |y|` against the through-origin fit.
    pub fit_residual: f64,
}

impl WegnerPoint {
    /// Per-site count divided by the window width `2 eps`.
    pub fn density(&self) -> f64 {
        self.count_per_site / (2.0 * self.eps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WegnerReport {
    pub e0: f64,
    pub sites: usize,
    pub samples: u64,
    pub points: Vec<WegnerPoint>,
    /// Least-squares slope of the per-site count against `eps`, through the origin.
    pub c_w: f64,
}

impl WegnerReport {
    pub fn max_fit_residual(&self) -> f64 {
        self.points.iter().map(|p| p.fit_residual).fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "eps",
            "count_per_site",
            "count_stderr",
            "density",
            "probability",
            "probability_stderr",
            "fit_residual",
            "c_w",
        ]);
        for p in &self.points {
            t.push(vec![
                p.eps,
                p.count_per_site,
                p.count_stderr,
                p.density(),
                p.probability,
                p.probability_stderr,
                p.fit_residual,
                self.c_w,
            ])
            .expect("row width matches");
        }
        t
    }
}

/// Wegner counts `E{Tr E([E0 - eps, E0 + eps))}/|Lambda|` and the probabilities
/// `P{dist(sigma, E0) < eps}` for every `eps` in `(0, 1]`.
pub fn wegner_scan(
    model: &ModelSpec,
    e0: f64,
    eps_list: &[f64],
    plan: &McPlan,
    store: &dyn SpectrumStore,
) -> Result<WegnerReport> {
    if !e0.is_finite() {
        return Err(Error::param("E0", "must be finite"));
    }
    if eps_list.is_empty() {
        return Err(Error::param("eps", "need at least one value"));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::param("eps", format!("must lie in (0, 1] (got {e})")));
    }
    let windows = eps_list
        .iter()
        .map(|&e| EnergyInterval::around(e0, e))
        .collect::<Result<Vec<_>>>()?;
    let n = model.geometry().site_count();
    let k = eps_list.len();
    let agg = run_realizations(model, plan, |sample| {
        let spec = cached_spectrum(model, sample, store)?;
        let v = spec.values();
        let i = v.partition_point(|&x| x < e0);
        let dist = [i.checked_sub(1).map(|j| e0 - v[j]), v.get(i).map(|&x| x - e0)]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        let mut row = Vec::with_capacity(2 * k);
        row.extend(windows.iter().map(|w| spec.count_in(w) as f64 / n as f64));
        row.extend(eps_list.iter().map(|&e| if dist < e { 1.0 } else { 0.0 }));
        Ok(row)
    })?;

    let num: f64 = eps_list.iter().zip(&agg.mean).map(|(e, y)| e * y).sum();
    let den: f64 = eps_list.iter().map(|e| e * e).sum();
    let c_w = num / den;
    let points = (0..k)
        .map(|j| {
            let y = agg.mean[j];
            let fit = c_w * eps_list[j];
            WegnerPoint {
                eps: eps_list[j],
                count_per_site: y,
                count_stderr: agg.stderr[j],
                probability: agg.mean[k + j],
                probability_stderr: agg.stderr[k + j],
                fit_residual: if y == fit { 0.0 } else { (y - fit).abs() / y.abs() },
            }
        })
        .collect();
    Ok(WegnerReport {
        e0,
        sites: n,
        samples: agg.samples,
        points,
        c_w,
    })
}
