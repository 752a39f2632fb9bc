use std::fmt::Write as _;

use crate::eig::{EnergyInterval, Spectrum};
use crate::error::{Error, Result};

/// Relative width (per eigenvalue, per unit spectral scale) under which
/// breakpoints of the two spectra are treated as one point.
pub const MERGE_RTOL: f64 = 1e-12;

/// Exact spectral shift function `xi(E) = N0(E) - N1(E)` of a pair of
/// equal-dimension spectra, stored as an integer step function.
///
/// `values[0]` holds on `(-inf, e_1)`, `values[k]` on `[e_k, e_{k+1})`, and
/// `values[m]` on `[e_m, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsfCurve {
    breakpoints: Vec<f64>,
    values: Vec<i64>,
}

/// Merge width used for a pair of spectra.
pub fn merge_tolerance(spec0: &Spectrum, spec1: &Spectrum) -> f64 {
    let scale = [spec0.min(), spec0.max(), spec1.min(), spec1.max()]
        .into_iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    MERGE_RTOL * spec0.len().max(1) as f64 * scale
}

/// `xi(E; H1, H0) = N0(E) - N1(E)` from the spectra of `H0` (`spec0`) and `H1` (`spec1`).
///
/// Eigenvalues closer than [`merge_tolerance`] form one breakpoint; the value to
/// its right is read off after the whole cluster.
pub fn ssf_from_spectra(spec0: &Spectrum, spec1: &Spectrum) -> Result<SsfCurve> {
    if spec0.len() != spec1.len() {
        return Err(Error::DimensionMismatch {
            expected: spec0.len(),
            actual: spec1.len(),
        });
    }
    let tol = merge_tolerance(spec0, spec1);
    let mut all: Vec<f64> = spec0.values().iter().chain(spec1.values()).copied().collect();
    all.sort_by(f64::total_cmp);

    let mut breakpoints = Vec::new();
    let mut values = vec![0i64];
    let mut i = 0;
    while i < all.len() {
        let start = all[i];
        let mut end = start;
        let mut j = i + 1;
        while j < all.len() && all[j] - end <= tol {
            end = all[j];
            j += 1;
        }
        breakpoints.push(start);
        values.push(spec0.counting(end) as i64 - spec1.counting(end) as i64);
        i = j;
    }
    Ok(SsfCurve { breakpoints, values })
}

impl SsfCurve {
    pub fn zero() -> Self {
        SsfCurve {
            breakpoints: Vec::new(),
            values: vec![0],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `xi(E)`, right-continuous.
    pub fn value_at(&self, e: f64) -> i64 {
        self.values[self.breakpoints.partition_point(|&b| b <= e)]
    }

    /// `max_k |c_k|`.
    pub fn sup_abs(&self) -> u64 {
        self.values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn max_value(&self) -> i64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn min_value(&self) -> i64 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    /// Pieces `(start, end, value)` with finite ends, skipping the two unbounded tails.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, i64)> + '_ {
        self.breakpoints
            .windows(2)
            .enumerate()
            .map(move |(k, w)| (w[0], w[1], self.values[k + 1]))
    }

    /// `int_window xi(E) dE`, exact up to floating point summation.
    pub fn integrate(&self, window: &EnergyInterval) -> f64 {
        let (a, b) = (window.start(), window.end());
        let mut total = 0.0;
        let m = self.breakpoints.len();
        for k in 0..=m {
            let v = self.values[k];
            if v == 0 {
                continue;
            }
            let lo = if k == 0 {
                f64::NEG_INFINITY
            } else {
                self.breakpoints[k - 1]
            };
            let hi = if k == m { f64::INFINITY } else { self.breakpoints[k] };
            let overlap = hi.min(b) - lo.max(a);
            if overlap > 0.0 {
                total += v as f64 * overlap;
            }
        }
        total
    }

    /// `int_R xi(E) dE`; finite because both tails vanish.
    pub fn total_integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v as f64 * (b - a)).sum()
    }

    /// `int f'(E) xi(E) dE = sum_k c_k (f(e_{k+1}) - f(e_k))`, exact on the step function.
    pub fn integrate_derivative<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let fe: Vec<f64> = self.breakpoints.iter().map(|&e| f(e)).collect();
        (1..self.breakpoints.len())
            .map(|k| self.values[k] as f64 * (fe[k] - fe[k - 1]))
            .sum()
    }

    /// Pointwise sum, valid as a curve of the composed pair:
    /// `xi(H2, H0) = xi(H2, H1) + xi(H1, H0)`.
    pub fn add(&self, other: &SsfCurve) -> SsfCurve {
        let mut points: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut values = vec![self.values[0] + other.values[0]];
        values.extend(points.iter().map(|&e| self.value_at(e) + other.value_at(e)));
        SsfCurve {
            breakpoints: points,
            values,
        }
    }

    /// CSV with columns `breakpoint_energy,value_right_of_breakpoint`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("breakpoint_energy,value_right_of_breakpoint\n");
        for (e, v) in self.breakpoints.iter().zip(&self.values[1..]) {
            let _ = writeln!(out, "{e},{v}");
        }
        out
    }

    /// Parses the output of [`SsfCurve::to_csv`].
    pub fn from_csv(text: &str) -> Result<SsfCurve> {
        let mut lines = text.lines();
        match lines.next() {
            Some("breakpoint_energy,value_right_of_breakpoint") => {}
            other => {
                return Err(Error::Config(format!("unexpected SSF CSV header {other:?}")));
            }
        }
        let mut curve = SsfCurve::zero();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Config(format!("malformed SSF CSV row {}: {line:?}", lineno + 2));
            let (e, v) = line.split_once(',').ok_or_else(bad)?;
            let e: f64 = e.trim().parse().map_err(|_| bad())?;
            let v: i64 = v.trim().parse().map_err(|_| bad())?;
            if curve.breakpoints.last().is_some_and(|&last| last >= e) {
                return Err(bad());
            }
            curve.breakpoints.push(e);
            curve.values.push(v);
        }
        Ok(curve)
    }
}
