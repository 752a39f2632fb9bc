//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by implicit-shift QL iteration.
//!
//! Storage is row-major. During the reduction only the lower triangle of the
//! working matrix is read or written, which keeps every inner loop on
//! contiguous memory. Eigenvectors are kept as rows so that each Givens
//! rotation of the QL sweep touches two contiguous rows.

use crate::error::{Error, Result};

/// Sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_SWEEPS: usize = 60;

pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; `off[n - 1]` is zero.
    pub off: Vec<f64>,
    /// Householder vectors `v_k` (with implicit leading one at `k + 1`) and scalars `tau_k`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

/// Reduces the symmetric matrix whose lower triangle is in `a` (row-major, `n x n`).
/// `a` is used as scratch.
pub(crate) fn tridiagonalize(a: &mut [f64], n: usize, keep_reflectors: bool) -> Tridiagonal {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::new();
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let m0 = k + 1;
        let alpha = a[m0 * n + k];
        let mut xnorm_sq = 0.0;
        for i in (m0 + 1)..n {
            let x = a[i * n + k];
            xnorm_sq += x * x;
        }
        diag[k] = a[k * n + k];
        if xnorm_sq == 0.0 {
            off[k] = alpha;
            if keep_reflectors {
                reflectors.push((Vec::new(), 0.0));
            }
            continue;
        }
        let beta = -alpha.signum() * (alpha * alpha + xnorm_sq).sqrt();
        let beta = if alpha == 0.0 { -(xnorm_sq.sqrt()) } else { beta };
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        v[m0] = 1.0;
        for i in (m0 + 1)..n {
            v[i] = a[i * n + k] * scale;
        }
        off[k] = beta;

        // p = tau * A22 v, using the lower triangle of A22 only.
        for x in p[m0..n].iter_mut() {
            *x = 0.0;
        }
        for i in m0..n {
            let row = &a[i * n + m0..i * n + i];
            let vi = v[i];
            let mut acc = 0.0;
            for (j, &aij) in row.iter().enumerate() {
                acc += aij * v[m0 + j];
                p[m0 + j] += aij * vi;
            }
            p[i] += acc + a[i * n + i] * vi;
        }
        let mut pv = 0.0;
        for i in m0..n {
            p[i] *= tau;
            pv += p[i] * v[i];
        }
        // w = p - (tau/2)(p.v) v, stored back into p.
        let half = 0.5 * tau * pv;
        for i in m0..n {
            p[i] -= half * v[i];
        }
        // A22 -= v w^T + w v^T (lower triangle).
        for i in m0..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[i * n + m0..i * n + i + 1];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij -= vi * p[m0 + j] + wi * v[m0 + j];
            }
        }
        if keep_reflectors {
            reflectors.push((v[m0..n].to_vec(), tau));
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        diag[n - 1] = a[(n - 1) * n + n - 1];
        off[n - 1] = 0.0;
    }
    Tridiagonal { diag, off, reflectors }
}

impl Tridiagonal {
    /// Rows of `Q^T`, where `A = Q T Q^T`.
    fn transformation_rows(&self, n: usize) -> Vec<f64> {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        // Q = H_0 H_1 ... ; build from the innermost factor outwards.
        let mut r = vec![0.0; n];
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let m0 = k + 1;
            // r = v^T Q[m0.., m0..]
            for x in r[m0..n].iter_mut() {
                *x = 0.0;
            }
            for (idx, &vi) in v.iter().enumerate() {
                let row = &q[(m0 + idx) * n + m0..(m0 + idx) * n + n];
                for (rj, &qij) in r[m0..n].iter_mut().zip(row) {
                    *rj += vi * qij;
                }
            }
            for (idx, &vi) in v.iter().enumerate() {
                let s = tau * vi;
                let row = &mut q[(m0 + idx) * n + m0..(m0 + idx) * n + n];
                for (qij, &rj) in row.iter_mut().zip(&r[m0..n]) {
                    *qij -= s * rj;
                }
            }
        }
        // transpose in place
        for i in 0..n {
            for j in (i + 1)..n {
                q.swap(i * n + j, j * n + i);
            }
        }
        q
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. If `rows` is given it
/// must hold `n` rows of length `n`; rotations are applied to it so that row `i`
/// ends up as the eigenvector of `diag[i]`. Output is unsorted.
pub(crate) fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], mut rows: Option<&mut [f64]>, tag: &str) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence {
                    tag: tag.to_string(),
                    index: l,
                    iterations: sweeps - 1,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    let (head, tail) = z.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..(i + 1) * n];
                    let zi1 = &mut tail[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues ascending and, if requested, eigenvectors as rows (row `i` pairs with value `i`).
pub(crate) fn symmetric_eigen(
    lower_dense: &mut [f64],
    n: usize,
    vectors: bool,
    tag: &str,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut t = tridiagonalize(lower_dense, n, vectors);
    let mut z = if vectors { Some(t.transformation_rows(n)) } else { None };
    let (mut d, mut e) = (std::mem::take(&mut t.diag), std::mem::take(&mut t.off));
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut(), tag)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vecs = z.map(|z| {
        let mut out = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            out[dst * n..(dst + 1) * n].copy_from_slice(&z[src * n..(src + 1) * n]);
        }
        out
    });
    Ok((values, vecs))
}
