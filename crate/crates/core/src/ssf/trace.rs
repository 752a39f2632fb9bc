use std::f64::consts::PI;

use super::curve::ssf_from_spectra;
use crate::eig::Spectrum;
use crate::error::{Error, Result};

/// Normalized Gaussian `f(E) = exp(-(E - c)^2 / (2 s^2)) / (s sqrt(2 pi))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    center: f64,
    width: f64,
}

impl TestFunction {
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(Error::param("width", format!("must be positive (got {width})")));
        }
        Ok(TestFunction { center, width })
    }

    /// Gaussian centred on the joint spectral range, with width a quarter of its
    /// diameter (at least one unit).
    pub fn for_spectra(spec0: &Spectrum, spec1: &Spectrum) -> Self {
        let lo = spec0.min().unwrap_or(0.0).min(spec1.min().unwrap_or(0.0));
        let hi = spec0.max().unwrap_or(0.0).max(spec1.max().unwrap_or(0.0));
        TestFunction {
            center: 0.5 * (lo + hi),
            width: (0.25 * (hi - lo)).max(1.0),
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn value(&self, e: f64) -> f64 {
        let z = (e - self.center) / self.width;
        (-0.5 * z * z).exp() / (self.width * (2.0 * PI).sqrt())
    }

    pub fn derivative(&self, e: f64) -> f64 {
        -(e - self.center) / (self.width * self.width) * self.value(e)
    }

    /// `||f||_inf`.
    pub fn sup_norm(&self) -> f64 {
        1.0 / (self.width * (2.0 * PI).sqrt())
    }

    /// `||f'||_1 = sqrt(2/pi) / s`.
    pub fn derivative_l1_norm(&self) -> f64 {
        (2.0 / PI).sqrt() / self.width
    }
}

/// Both sides of `Tr[f(H1) - f(H0)] = int f'(E) xi(E; H1, H0) dE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceFormulaCheck {
    pub trace_side: f64,
    pub ssf_side: f64,
    pub residual: f64,
}

/// `|sum f(mu_i) - sum f(lambda_i) - int f' xi|` with the integral evaluated exactly
/// on the step curve. `spec0` belongs to `H0`, `spec1` to `H1`.
pub fn trace_formula_residual(spec0: &Spectrum, spec1: &Spectrum, f: &TestFunction) -> Result<TraceFormulaCheck> {
    let curve = ssf_from_spectra(spec0, spec1)?;
    let trace_side: f64 = spec1.values().iter().map(|&x| f.value(x)).sum::<f64>()
        - spec0.values().iter().map(|&x| f.value(x)).sum::<f64>();
    let ssf_side = curve.integrate_derivative(|e| f.value(e));
    Ok(TraceFormulaCheck {
        trace_side,
        ssf_side,
        residual: (trace_side - ssf_side).abs(),
    })
}
