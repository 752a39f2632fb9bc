use crate::error::{Error, Result};

/// Dense real symmetric matrix holding only its lower triangle.
///
/// Entry `(i, j)` with `i >= j` lives at `i * (i + 1) / 2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    n: usize,
    lower: Vec<f64>,
    tag: String,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricOperator {
    pub fn zeros(n: usize) -> Self {
        SymmetricOperator {
            n,
            lower: vec![0.0; n * (n + 1) / 2],
            tag: String::new(),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.set(i, i, d);
        }
        op
    }

    /// Builds from full rows; fails unless the input is exactly symmetric and finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut op = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for j in 0..=i {
                if row[j] != rows[j][i] {
                    return Err(Error::param("matrix", format!("not symmetric at ({i}, {j})")));
                }
                if !row[j].is_finite() {
                    return Err(Error::param("matrix", format!("non-finite entry at ({i}, {j})")));
                }
                op.set(i, j, row[j]);
            }
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.lower[packed(i, j)] = value;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        self.lower[packed(i, j)] += value;
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) -> Result<()> {
        if diag.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: diag.len(),
            });
        }
        for (i, &d) in diag.iter().enumerate() {
            self.add_to(i, i, d);
        }
        Ok(())
    }

    /// `self + other`; dimensions must agree.
    pub fn plus(&self, other: &SymmetricOperator) -> Result<SymmetricOperator> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let lower = self.lower.iter().zip(&other.lower).map(|(a, b)| a + b).collect();
        Ok(SymmetricOperator {
            n: self.n,
            lower,
            tag: self.tag.clone(),
        })
    }

    /// `self + s * other`.
    pub fn plus_scaled(&self, s: f64, other: &SymmetricOperator) -> Result<SymmetricOperator> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let lower = self.lower.iter().zip(&other.lower).map(|(a, b)| a + s * b).collect();
        Ok(SymmetricOperator {
            n: self.n,
            lower,
            tag: self.tag.clone(),
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.lower.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite())
    }

    /// Dense row-major copy; only the lower triangle is filled unless `full`.
    pub fn to_dense(&self, full: bool) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                out[i * n + j] = v;
                if full {
                    out[j * n + i] = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let mut acc = row[i] * x[i];
            for j in 0..i {
                acc += row[j] * x[j];
                y[j] += row[j] * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// `P^T A P` for the permutation sending site `i` to `perm[i]`:
    /// the result has `(perm[i], perm[j])` entry equal to `A[i][j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SymmetricOperator> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        let mut out = SymmetricOperator::zeros(self.n);
        for i in 0..self.n {
            for j in 0..=i {
                out.set(perm[i], perm[j], self.get(i, j));
            }
        }
        out.tag = self.tag.clone();
        Ok(out)
    }
}
