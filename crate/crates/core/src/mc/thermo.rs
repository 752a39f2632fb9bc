use serde::Serialize;

use super::engine::{run_indexed, McPlan};
use crate::disorder::sample_disorder;
use crate::eig::{eigen_decompose, EnergyInterval};
use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;
use crate::model::{assemble_hamiltonian, embed_sample, embedded_site, sum_profile_potential, FillRule, ModelSpec};
use crate::report::Table;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoRow {
    pub inner_side: usize,
    pub outer_side: usize,
    /// `(1/|Lambda|) E{sum_{j in Lambda} Tr u_j^{1/2} [E_Lambda(window) - E_outer(window)] u_j^{1/2}}`.
    pub error: f64,
    pub error_stderr: f64,
    /// `(1/|Lambda|) E{Tr V_Lambda (e^{-t H_outer} - e^{-t H_Lambda})}`, one entry per `t`.
    pub laplace: Vec<f64>,
    pub laplace_stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoReport {
    pub outer_factor: usize,
    pub window: (f64, f64),
    pub times: Vec<f64>,
    pub samples: u64,
    pub rows: Vec<ThermoRow>,
}

/// `|b| <= |a| + k * sqrt(sa^2 + sb^2)` along consecutive entries.
fn nonincreasing_abs(values: &[(f64, f64)], k: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1].0.abs() <= w[0].0.abs() + k * w[0].1.hypot(w[1].1))
}

impl ThermoReport {
    /// `|error|` nonincreasing in `L` up to `k` combined standard errors.
    pub fn error_nonincreasing(&self, k: f64) -> bool {
        let v: Vec<_> = self.rows.iter().map(|r| (r.error, r.error_stderr)).collect();
        nonincreasing_abs(&v, k)
    }

    /// `|laplace(t)|` nonincreasing in `L` up to `k` combined standard errors.
    pub fn laplace_nonincreasing(&self, t_index: usize, k: f64) -> bool {
        let v: Vec<_> = self
            .rows
            .iter()
            .map(|r| (r.laplace[t_index], r.laplace_stderr[t_index]))
            .collect();
        nonincreasing_abs(&v, k)
    }

    pub fn table(&self) -> Table {
        let mut cols = vec![
            "inner_side".to_string(),
            "outer_side".to_string(),
            "error".to_string(),
            "error_stderr".to_string(),
        ];
        for t in &self.times {
            cols.push(format!("laplace_t{t}"));
            cols.push(format!("laplace_t{t}_stderr"));
        }
        let mut table = Table::new(cols);
        for r in &self.rows {
            let mut row = vec![r.inner_side as f64, r.outer_side as f64, r.error, r.error_stderr];
            for (m, s) in r.laplace.iter().zip(&r.laplace_stderr) {
                row.extend([*m, *s]);
            }
            table.push(row).expect("row width matches");
        }
        table
    }
}

/// Finite-volume error term and Laplace-transform proxy for each inner box.
///
/// The inner box of side `L` sits centred in an outer box of side
/// `outer_factor * L` standing in for the infinite lattice; the two share the
/// inner couplings and the rest of the outer box gets fresh iid couplings. The
/// site sum runs over the inner box in both terms. An `outer_factor` of 1 makes
/// the two boxes identical and every entry exactly zero.
pub fn thermo_error_scan(
    model: &ModelSpec,
    inner_sides: &[usize],
    outer_factor: usize,
    window: &EnergyInterval,
    times: &[f64],
    plan: &McPlan,
) -> Result<ThermoReport> {
    if outer_factor == 0 {
        return Err(Error::param("outer_factor", "must be at least 1"));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::param("t", format!("must be positive (got {t})")));
    }
    let dim = model.geometry().dim();
    let mut rows = Vec::with_capacity(inner_sides.len());
    let mut samples = 0;
    for &side in inner_sides {
        let inner = BoxGeometry::new(dim, side)?;
        let outer = BoxGeometry::new(dim, side * outer_factor)?;
        let inner_model = model.with_geometry(inner)?;
        let outer_model = model.with_geometry(outer)?;
        let n = inner.site_count() as f64;

        let w_in = sum_profile_potential(&inner, model.profile(), model.coupling())?;
        let mut w_out = vec![0.0; outer.site_count()];
        for j in 0..inner.site_count() {
            for (s, u) in model.profile().placed_at(&outer, embedded_site(&inner, &outer, j)) {
                w_out[s] += model.coupling() * u;
            }
        }
        let fill = FillRule::FreshIid(model.disorder().clone());

        let agg = run_indexed(plan, |i| {
            let s_in = sample_disorder(model.disorder(), &inner, plan.master_seed(), i);
            let s_out = embed_sample(&s_in, &outer, &fill)?;
            let spec_in = eigen_decompose(&assemble_hamiltonian(&inner_model, &s_in)?, true)?;
            let spec_out = eigen_decompose(&assemble_hamiltonian(&outer_model, &s_out)?, true)?;
            let mut row = Vec::with_capacity(1 + times.len());
            row.push(
                (spec_in.weighted_projector_trace(&w_in, window)?
                    - spec_out.weighted_projector_trace(&w_out, window)?)
                    / n,
            );
            for &t in times {
                row.push((spec_out.weighted_heat_trace(&w_out, t)? - spec_in.weighted_heat_trace(&w_in, t)?) / n);
            }
            Ok(row)
        })?;
        samples = agg.samples;
        rows.push(ThermoRow {
            inner_side: side,
            outer_side: outer.side(),
            error: agg.mean[0],
            error_stderr: agg.stderr[0],
            laplace: agg.mean[1..].to_vec(),
            laplace_stderr: agg.stderr[1..].to_vec(),
        });
    }
    Ok(ThermoReport {
        outer_factor,
        window: (window.start(), window.end()),
        times: times.to_vec(),
        samples,
        rows,
    })
}
