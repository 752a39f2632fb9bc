//! Coupling-constant averages of spectral projectors and finite-rank perturbations.

use rand::Rng;

use super::curve::ssf_from_spectra;
use crate::eig::{eigen_decompose, EnergyInterval};
use crate::error::{Error, Result};
use crate::operator::SymmetricOperator;

/// Integration over `[0, 1]` of an integrand that is smooth except where a
/// discrete `state` changes.
///
/// Jumps are located by bisecting on `state` down to `breakpoint_tol`; each
/// smooth piece is integrated by composite 5-point Gauss-Legendre with the
/// panel count doubled until the estimate moves by at most `tol` times the piece
/// length, so the pieces together aim at `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub breakpoint_tol: f64,
    /// Budget on integrand evaluations.
    pub max_evaluations: usize,
}

impl QuadratureOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureOptions { tol, ..Self::default() }
    }
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: 1e-4,
            breakpoint_tol: 1e-13,
            max_evaluations: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Integrand evaluations.
    pub nodes: usize,
    /// Located jumps of the state.
    pub breakpoints: usize,
    /// Largest final refinement change over the pieces.
    pub last_change: f64,
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `state` must change monotonically (never return to an earlier value), so
/// equal states at both ends of an interval mean no jump inside it. This holds
/// for eigenvalue counts of `H0 + s B` with `B >= 0`.
pub fn piecewise_quadrature<S, F, G>(
    mut state: F,
    mut integrand: G,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult>
where
    S: PartialEq + Clone,
    F: FnMut(f64) -> Result<S>,
    G: FnMut(f64) -> Result<f64>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let mut points = vec![0.0];
    let s0 = state(0.0)?;
    let s1 = state(1.0)?;
    // Depth-first bisection keeps the breakpoints in increasing order.
    let mut stack = vec![(0.0, 1.0, s0, s1)];
    while let Some((l, r, sl, sr)) = stack.pop() {
        if sl == sr {
            continue;
        }
        if r - l <= opts.breakpoint_tol {
            points.push(0.5 * (l + r));
            continue;
        }
        let m = 0.5 * (l + r);
        let sm = state(m)?;
        stack.push((m, r, sm.clone(), sr));
        stack.push((l, m, sl, sm));
    }
    points.push(1.0);
    let breakpoints = points.len() - 2;

    let mut value = 0.0;
    let mut evaluations = 0;
    let mut worst_change: f64 = 0.0;
    for piece in points.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        if b <= a {
            continue;
        }
        let mut rule = |panels: usize| -> Result<f64> {
            let h = (b - a) / panels as f64;
            let mut acc = 0.0;
            for k in 0..panels {
                let c = a + (k as f64 + 0.5) * h;
                for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                    acc += w * integrand(c + 0.5 * h * x)?;
                }
            }
            Ok(0.5 * h * acc)
        };
        let mut panels = 1;
        let mut prev = rule(panels)?;
        evaluations += 5;
        loop {
            panels *= 2;
            evaluations += 5 * panels;
            if evaluations > opts.max_evaluations {
                return Err(Error::QuadratureBudget {
                    tol: opts.tol,
                    nodes: evaluations,
                    last_change: worst_change,
                });
            }
            let next = rule(panels)?;
            let change = (next - prev).abs();
            prev = next;
            if change <= opts.tol * (b - a) {
                worst_change = worst_change.max(change);
                break;
            }
        }
        value += prev;
    }
    Ok(QuadratureResult {
        value,
        nodes: evaluations,
        breakpoints,
        last_change: worst_change,
    })
}

/// Both sides of `int_0^1 Tr V^{1/2} E_lambda(window) V^{1/2} d lambda = int_window xi(E; H0 + V, H0) dE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirmanSolomyakCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub nodes: usize,
}

pub fn birman_solomyak_residual(
    h0: &SymmetricOperator,
    v: &[f64],
    window: &EnergyInterval,
    tol: f64,
) -> Result<BirmanSolomyakCheck> {
    birman_solomyak_residual_with(h0, v, window, &QuadratureOptions::with_tol(tol))
}

pub fn birman_solomyak_residual_with(
    h0: &SymmetricOperator,
    v: &[f64],
    window: &EnergyInterval,
    opts: &QuadratureOptions,
) -> Result<BirmanSolomyakCheck> {
    if v.len() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            actual: v.len(),
        });
    }
    if v.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::param("V", "must be nonnegative"));
    }
    let vop = SymmetricOperator::from_diagonal(v);
    let h1 = h0.plus(&vop)?;
    let rhs = ssf_from_spectra(&eigen_decompose(h0, false)?, &eigen_decompose(&h1, false)?)?.integrate(window);

    let quad = if v.iter().all(|&x| x == 0.0) {
        QuadratureResult {
            value: 0.0,
            nodes: 0,
            breakpoints: 0,
            last_change: 0.0,
        }
    } else {
        piecewise_quadrature(
            |lambda| Ok(eigen_decompose(&h0.plus_scaled(lambda, &vop)?, false)?.range_in(window)),
            |lambda| {
                let spec = eigen_decompose(&h0.plus_scaled(lambda, &vop)?, true)?;
                spec.weighted_projector_trace(v, window)
            },
            opts,
        )?
    };
    Ok(BirmanSolomyakCheck {
        lhs: quad.value,
        rhs,
        residual: (quad.value - rhs).abs(),
        nodes: quad.nodes,
    })
}

/// `B = sum_j b_j phi_j phi_j^T` with orthonormal `phi_j` and `b_j >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankNPerturbation {
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl RankNPerturbation {
    pub fn new(directions: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if directions.len() != weights.len() {
            return Err(Error::param("B", "one weight per direction"));
        }
        if let Some(first) = directions.first() {
            let n = first.len();
            for (i, d) in directions.iter().enumerate() {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: d.len(),
                    });
                }
                for (j, e) in directions[..=i].iter().enumerate() {
                    let dot: f64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (dot - want).abs() > 1e-10 {
                        return Err(Error::param("B", "directions must be orthonormal"));
                    }
                }
            }
        }
        if weights.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::param("B", "weights must be finite and nonnegative"));
        }
        Ok(RankNPerturbation { directions, weights })
    }

    /// Random orthonormal directions (Gram-Schmidt on uniform vectors) with
    /// weights uniform in `(0, max_weight]`.
    pub fn random<R: Rng + ?Sized>(n: usize, rank: usize, max_weight: f64, rng: &mut R) -> Result<Self> {
        if rank > n {
            return Err(Error::param("rank", format!("{rank} exceeds dimension {n}")));
        }
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(rank);
        while directions.len() < rank {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for d in &directions {
                    let dot: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(d) {
                        *x -= dot * y;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|x| *x /= norm);
                directions.push(v);
            }
        }
        let weights = (0..rank).map(|_| max_weight * (1.0 - rng.random::<f64>())).collect();
        Self::new(directions, weights)
    }

    pub fn zero() -> Self {
        RankNPerturbation {
            directions: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of strictly positive weights.
    pub fn rank(&self) -> usize {
        self.weights.iter().filter(|&&b| b > 0.0).count()
    }

    /// Operator norm `max_j b_j`.
    pub fn norm(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, &b| m.max(b))
    }

    pub fn matrix(&self, n: usize) -> Result<SymmetricOperator> {
        let mut out = SymmetricOperator::zeros(n);
        for (d, &b) in self.directions.iter().zip(&self.weights) {
            if d.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: d.len(),
                });
            }
            for i in 0..n {
                for j in 0..=i {
                    out.add_to(i, j, b * d[i] * d[j]);
                }
            }
        }
        Ok(out)
    }

    /// `B^{1/2} phi`.
    pub fn sqrt_apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; phi.len()];
        for (d, &b) in self.directions.iter().zip(&self.weights) {
            let c = b.sqrt() * d.iter().zip(phi).map(|(a, x)| a * x).sum::<f64>();
            for (o, x) in out.iter_mut().zip(d) {
                *o += c * x;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAveraging {
    /// `int_0^1 <psi, E_{H0 + sB}(window) psi> ds` with `psi = B^{1/2} phi`.
    pub value: f64,
    pub psi_norm_sq: f64,
    /// `min(||psi||^2, |window|)`.
    pub bound: f64,
    pub nodes: usize,
}

/// Requires `||B|| <= 1` and a unit vector `phi`.
pub fn spectral_averaging_value(
    h0: &SymmetricOperator,
    b: &RankNPerturbation,
    phi: &[f64],
    window: &EnergyInterval,
    tol: f64,
) -> Result<SpectralAveraging> {
    spectral_averaging_value_with(h0, b, phi, window, &QuadratureOptions::with_tol(tol))
}

pub fn spectral_averaging_value_with(
    h0: &SymmetricOperator,
    b: &RankNPerturbation,
    phi: &[f64],
    window: &EnergyInterval,
    opts: &QuadratureOptions,
) -> Result<SpectralAveraging> {
    if b.norm() > 1.0 {
        return Err(Error::param("B", format!("operator norm {} exceeds 1", b.norm())));
    }
    if phi.len() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            actual: phi.len(),
        });
    }
    let phi_norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (phi_norm - 1.0).abs() > 1e-10 {
        return Err(Error::param("phi", format!("must be a unit vector (norm {phi_norm})")));
    }
    let psi = b.sqrt_apply(phi);
    let psi_norm_sq: f64 = psi.iter().map(|x| x * x).sum();
    let bound = psi_norm_sq.min(window.width());
    if b.rank() == 0 || psi_norm_sq == 0.0 {
        return Ok(SpectralAveraging {
            value: 0.0,
            psi_norm_sq,
            bound,
            nodes: 0,
        });
    }
    let bop = b.matrix(h0.dim())?;
    let quad = piecewise_quadrature(
        |s| Ok(eigen_decompose(&h0.plus_scaled(s, &bop)?, false)?.range_in(window)),
        |s| {
            let spec = eigen_decompose(&h0.plus_scaled(s, &bop)?, true)?;
            spec.spectral_measure(&psi, window)
        },
        opts,
    )?;
    Ok(SpectralAveraging {
        value: quad.value,
        psi_norm_sq,
        bound,
        nodes: quad.nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankBoundReport {
    pub sup: i64,
    pub min: i64,
    pub rank: usize,
    pub pass: bool,
}

/// Checks `0 <= xi(E; H0 + B, H0) <= rank(B)` on the exact curve.
pub fn rank_bound_report(h0: &SymmetricOperator, b: &RankNPerturbation) -> Result<RankBoundReport> {
    let h1 = h0.plus(&b.matrix(h0.dim())?)?;
    let curve = ssf_from_spectra(&eigen_decompose(h0, false)?, &eigen_decompose(&h1, false)?)?;
    let (sup, min, rank) = (curve.max_value(), curve.min_value(), b.rank());
    Ok(RankBoundReport {
        sup,
        min,
        rank,
        pass: min >= 0 && sup <= rank as i64,
    })
}
