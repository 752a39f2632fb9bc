use serde::{Deserialize, Serialize};

use super::solver::symmetric_eigen;
use crate::error::{Error, Result};
use crate::operator::SymmetricOperator;

/// Half-open energy window `[a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyInterval {
    a: f64,
    b: f64,
}

impl EnergyInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(EnergyInterval { a, b })
    }

    /// `[center - half_width, center + half_width)`.
    pub fn around(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, e: f64) -> bool {
        self.a <= e && e < self.b
    }
}

/// Sorted eigenvalues of a symmetric operator, optionally with an orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    /// Row `i` is the eigenvector of `values[i]`.
    vectors: Option<Vec<f64>>,
    tag: String,
}

/// Full eigendecomposition of `op`.
pub fn eigen_decompose(op: &SymmetricOperator, need_vectors: bool) -> Result<Spectrum> {
    if !op.is_finite() {
        return Err(Error::param(
            "operator",
            format!("matrix `{}` has non-finite entries", op.tag()),
        ));
    }
    let n = op.dim();
    let mut work = op.to_dense(false);
    let (values, vectors) = symmetric_eigen(&mut work, n, need_vectors, op.tag())?;
    Ok(Spectrum {
        values,
        vectors,
        tag: op.tag().to_string(),
    })
}

impl Spectrum {
    /// Eigenvalue-only spectrum; the input is sorted.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum {
            values,
            vectors: None,
            tag: String::new(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        let n = self.values.len();
        self.vectors.as_deref().map(|v| &v[i * n..(i + 1) * n])
    }

    /// Drops the eigenvectors.
    pub fn into_eigenvalues(self) -> Spectrum {
        Spectrum { vectors: None, ..self }
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn diameter(&self) -> f64 {
        match (self.min(), self.max()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Tolerance under which two eigenvalues are reported as degenerate.
    pub fn degeneracy_tolerance(&self) -> f64 {
        1e-9 * self.diameter()
    }

    /// Largest cluster size under [`Spectrum::degeneracy_tolerance`].
    pub fn max_multiplicity(&self) -> usize {
        let tol = self.degeneracy_tolerance();
        let mut best = usize::from(!self.values.is_empty());
        let mut run = 1;
        for w in self.values.windows(2) {
            if w[1] - w[0] <= tol {
                run += 1;
                best = best.max(run);
            } else {
                run = 1;
            }
        }
        best
    }

    /// `N(E) = #{lambda_i <= E}`.
    pub fn counting(&self, e: f64) -> usize {
        self.values.partition_point(|&x| x <= e)
    }

    /// Eigenvalues in `[a, b)`.
    pub fn count_in(&self, window: &EnergyInterval) -> usize {
        let lo = self.values.partition_point(|&x| x < window.start());
        let hi = self.values.partition_point(|&x| x < window.end());
        hi - lo
    }

    /// Index range of eigenvalues in `[a, b)`.
    pub fn range_in(&self, window: &EnergyInterval) -> std::ops::Range<usize> {
        let lo = self.values.partition_point(|&x| x < window.start());
        let hi = self.values.partition_point(|&x| x < window.end());
        lo..hi
    }

    fn check_weight(&self, weight: &[f64]) -> Result<&[f64]> {
        let vecs = self.vectors.as_deref().ok_or(Error::MissingEigenvectors)?;
        if weight.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: weight.len(),
            });
        }
        if weight.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::param("weight", "must be nonnegative"));
        }
        Ok(vecs)
    }

    /// `<v_i, w v_i>` for eigenvector `i` and a diagonal weight `w`.
    fn weighted_norm(vecs: &[f64], n: usize, i: usize, weight: &[f64]) -> f64 {
        vecs[i * n..(i + 1) * n]
            .iter()
            .zip(weight)
            .map(|(x, w)| w * x * x)
            .sum()
    }

    /// `Tr w^{1/2} E(window) w^{1/2}` for a diagonal weight `w >= 0`.
    pub fn weighted_projector_trace(&self, weight: &[f64], window: &EnergyInterval) -> Result<f64> {
        let vecs = self.check_weight(weight)?;
        let n = self.values.len();
        Ok(self
            .range_in(window)
            .map(|i| Self::weighted_norm(vecs, n, i, weight))
            .sum())
    }

    /// `Tr w e^{-tH} = sum_i e^{-t lambda_i} <v_i, w v_i>`.
    pub fn weighted_heat_trace(&self, weight: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("t", format!("must be positive (got {t})")));
        }
        let vecs = self.check_weight(weight)?;
        let n = self.values.len();
        Ok((0..n)
            .map(|i| (-t * self.values[i]).exp() * Self::weighted_norm(vecs, n, i, weight))
            .sum())
    }

    /// `|<v_i, psi>|^2` summed over eigenvalues in `window`.
    pub fn spectral_measure(&self, psi: &[f64], window: &EnergyInterval) -> Result<f64> {
        let vecs = self.vectors.as_deref().ok_or(Error::MissingEigenvectors)?;
        let n = self.values.len();
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: psi.len(),
            });
        }
        Ok(self
            .range_in(window)
            .map(|i| {
                let dot: f64 = vecs[i * n..(i + 1) * n].iter().zip(psi).map(|(a, b)| a * b).sum();
                dot * dot
            })
            .sum())
    }

    /// Largest `||H v - lambda v||` over the stored pairs.
    pub fn max_residual(&self, op: &SymmetricOperator) -> Result<f64> {
        let vecs = self.vectors.as_deref().ok_or(Error::MissingEigenvectors)?;
        let n = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let v = &vecs[i * n..(i + 1) * n];
            let hv = op.mul_vec(v);
            let r: f64 = hv.iter().zip(v).map(|(h, x)| (h - self.values[i] * x).powi(2)).sum();
            worst = worst.max(r.sqrt());
        }
        Ok(worst)
    }

    /// Largest `|<v_i, v_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let vecs = self.vectors.as_deref().ok_or(Error::MissingEigenvectors)?;
        let n = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let dot: f64 = vecs[i * n..(i + 1) * n]
                    .iter()
                    .zip(&vecs[j * n..(j + 1) * n])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        Ok(worst)
    }
}
