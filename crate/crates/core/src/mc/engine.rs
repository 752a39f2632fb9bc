use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{CacheKey, SpectrumStore};
use crate::disorder::{realization_seed, sample_disorder, DisorderSample};
use crate::eig::{eigen_decompose, EnergyInterval, Spectrum};
use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, ModelSpec};

/// Shift applied to every bin edge so that edges avoid the rational points
/// where free-operator eigenvalues tend to sit.
pub const EDGE_OFFSET: f64 = 1e-4 * SQRT_2;

/// `bins` uniform half-open bins over `[e_min, e_max)`, every edge shifted by
/// [`EDGE_OFFSET`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    e_min: f64,
    e_max: f64,
    bins: usize,
}

impl BinGrid {
    pub fn new(e_min: f64, e_max: f64, bins: usize) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
            return Err(Error::param(
                "e_min/e_max",
                format!("need finite e_min < e_max (got {e_min}, {e_max})"),
            ));
        }
        if bins == 0 {
            return Err(Error::param("bins", "must be at least 1"));
        }
        Ok(BinGrid { e_min, e_max, bins })
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn len(&self) -> usize {
        self.bins
    }

    pub fn is_empty(&self) -> bool {
        self.bins == 0
    }

    /// Bin width `h`.
    pub fn width(&self) -> f64 {
        (self.e_max - self.e_min) / self.bins as f64
    }

    pub fn edge(&self, k: usize) -> f64 {
        if k == self.bins {
            self.e_max + EDGE_OFFSET
        } else {
            self.e_min + EDGE_OFFSET + k as f64 * self.width()
        }
    }

    pub fn bin(&self, k: usize) -> EnergyInterval {
        EnergyInterval::new(self.edge(k), self.edge(k + 1)).expect("bin edges are increasing")
    }

    pub fn bins(&self) -> impl Iterator<Item = EnergyInterval> + '_ {
        (0..self.bins).map(|k| self.bin(k))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|k| 0.5 * (self.edge(k) + self.edge(k + 1)))
            .collect()
    }
}

/// Interval certain to contain the spectrum of every realization of `model`.
pub fn spectral_bounds(model: &ModelSpec) -> (f64, f64) {
    let g = model.geometry();
    let bg: Vec<f64> = (0..g.site_count()).map(|s| model.background().value_at(g, s)).collect();
    let bg_lo = bg.iter().copied().fold(f64::INFINITY, f64::min);
    let bg_hi = bg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = model.disorder().support();
    let c = model.coupling() * model.profile().total();
    let ends = [0.0, c * lo, c * hi];
    let v_lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
    let v_hi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (bg_lo + v_lo, bg_hi + 4.0 * g.dim() as f64 + v_hi)
}

/// Realization count, seeding, parallelism and the energy grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPlan {
    samples: u64,
    master_seed: u64,
    /// Worker threads; 0 uses every available core.
    workers: usize,
    grid: BinGrid,
}

impl McPlan {
    pub fn new(samples: u64, master_seed: u64, workers: usize, grid: BinGrid) -> Result<Self> {
        if samples == 0 {
            return Err(Error::param("M", "at least one realization is required"));
        }
        Ok(McPlan {
            samples,
            master_seed,
            workers,
            grid,
        })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_grid(mut self, grid: BinGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_master_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_samples(self, samples: u64) -> Result<Self> {
        Self::new(samples, self.master_seed, self.workers, self.grid)
    }
}

/// Per-coordinate sample statistics of a vector-valued kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub samples: u64,
    pub mean: Vec<f64>,
    /// `sample std / sqrt(M)`; zero for `M = 1`.
    pub stderr: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Aggregate {
    fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let mut agg = Aggregate {
            samples: m as u64,
            mean: vec![0.0; width],
            stderr: vec![0.0; width],
            min: vec![0.0; width],
            max: vec![0.0; width],
        };
        let mut column = vec![0.0; m];
        for k in 0..width {
            for (c, row) in column.iter_mut().zip(rows) {
                *c = row[k];
            }
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            agg.min[k] = lo;
            agg.max[k] = hi;
            if lo == hi {
                // Constant column: report it exactly rather than through a rounded sum.
                agg.mean[k] = lo;
                continue;
            }
            let mean = pairwise_sum(&column) / m as f64;
            agg.mean[k] = mean;
            if m > 1 {
                for c in column.iter_mut() {
                    *c = (*c - mean) * (*c - mean);
                }
                let var = pairwise_sum(&column) / (m - 1) as f64;
                agg.stderr[k] = (var / m as f64).sqrt();
            }
        }
        agg
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }
}

fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Evaluates `f(i)` for every realization index on the plan's workers and
/// returns the results in index order. A failing realization aborts with its
/// index and seed.
pub fn map_indexed<T, F>(plan: &McPlan, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let eval = || -> Vec<Result<T>> { (0..plan.samples).into_par_iter().map(&f).collect() };
    let results = if plan.workers == 0 {
        eval()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?
            .install(eval)
    };
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| realization_error(plan, index as u64, e)))
        .collect()
}

fn realization_error(plan: &McPlan, index: u64, source: Error) -> Error {
    Error::Realization {
        index,
        seed: realization_seed(plan.master_seed, index),
        source: Box::new(source),
    }
}

/// Evaluates `kernel(i)` for every realization index and aggregates the results
/// in index order.
pub fn run_indexed<F>(plan: &McPlan, kernel: F) -> Result<Aggregate>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let rows = map_indexed(plan, kernel)?;
    let width = rows.first().map_or(0, Vec::len);
    if let Some(index) = rows.iter().position(|r| r.len() != width) {
        let actual = rows[index].len();
        return Err(realization_error(
            plan,
            index as u64,
            Error::DimensionMismatch {
                expected: width,
                actual,
            },
        ));
    }
    Ok(Aggregate::from_rows(&rows))
}

/// [`run_indexed`] with the iid sample of each realization drawn from `model`.
pub fn run_realizations<F>(model: &ModelSpec, plan: &McPlan, kernel: F) -> Result<Aggregate>
where
    F: Fn(&DisorderSample) -> Result<Vec<f64>> + Sync,
{
    run_indexed(plan, |i| {
        kernel(&sample_disorder(
            model.disorder(),
            model.geometry(),
            plan.master_seed,
            i,
        ))
    })
}

/// Eigenvalues of `H_omega` for `sample`, through `store`.
pub(crate) fn cached_spectrum(
    model: &ModelSpec,
    sample: &DisorderSample,
    store: &dyn SpectrumStore,
) -> Result<Spectrum> {
    store.get_or_compute(CacheKey::new(model, sample, "H"), &|| {
        eigen_decompose(&assemble_hamiltonian(model, sample)?, false)
    })
}
