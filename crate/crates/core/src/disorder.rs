//! Single-site coupling distributions, reproducible seeding, and disorder samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the SplitMix64 generator applied to `x` as its state.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed of realization `index` under `master_seed`.
///
/// Depends only on the pair, so the order in which realizations run is irrelevant.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ index.wrapping_mul(GOLDEN_GAMMA).rotate_left(17))
}

/// Generator used for every disorder stream.
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Law of a single coupling constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisorderDistribution {
    /// Uniform on `[0, 1]`.
    Uniform01,
    /// Density constant on each of `masses.len()` equal bins of `[lo, hi]`;
    /// `masses[k]` is the probability of bin `k`.
    PiecewiseConstant { lo: f64, hi: f64, masses: Vec<f64> },
}

impl DisorderDistribution {
    pub fn piecewise_constant(lo: f64, hi: f64, masses: Vec<f64>) -> Result<Self> {
        let dist = DisorderDistribution::PiecewiseConstant { lo, hi, masses };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DisorderDistribution::Uniform01 => Ok(()),
            DisorderDistribution::PiecewiseConstant { lo, hi, masses } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::param(
                        "disorder",
                        "support [lo, hi] must be bounded with lo < hi",
                    ));
                }
                if masses.is_empty() || masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
                    return Err(Error::param("disorder", "bin masses must be finite and nonnegative"));
                }
                let total: f64 = masses.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::param(
                        "disorder",
                        format!("bin masses must sum to 1 (got {total})"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            DisorderDistribution::Uniform01 => (0.0, 1.0),
            DisorderDistribution::PiecewiseConstant { lo, hi, .. } => (*lo, *hi),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DisorderDistribution::Uniform01 => 0.5,
            DisorderDistribution::PiecewiseConstant { lo, hi, masses } => {
                let w = (hi - lo) / masses.len() as f64;
                masses
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m * (lo + (k as f64 + 0.5) * w))
                    .sum()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DisorderDistribution::Uniform01 => rng.random::<f64>(),
            DisorderDistribution::PiecewiseConstant { lo, hi, masses } => {
                let w = (hi - lo) / masses.len() as f64;
                let target = rng.random::<f64>();
                let mut acc = 0.0;
                let last = masses.iter().rposition(|&m| m > 0.0).unwrap_or(0);
                for (k, &m) in masses.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    if target < acc + m || k == last {
                        let frac = ((target - acc) / m).clamp(0.0, 1.0);
                        return (lo + (k as f64 + frac) * w).min(*hi);
                    }
                    acc += m;
                }
                unreachable!("validated distribution has positive mass")
            }
        }
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub index: u64,
}

/// One disorder realization: a coupling per site of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    geometry: BoxGeometry,
    couplings: Vec<f64>,
    provenance: Option<Provenance>,
}

impl DisorderSample {
    /// Sample with explicitly chosen couplings and no seed provenance.
    pub fn from_couplings(geometry: BoxGeometry, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != geometry.site_count() {
            return Err(Error::DimensionMismatch {
                expected: geometry.site_count(),
                actual: couplings.len(),
            });
        }
        if couplings.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("couplings", "must be finite"));
        }
        Ok(DisorderSample {
            geometry,
            couplings,
            provenance: None,
        })
    }

    pub fn zeros(geometry: BoxGeometry) -> Self {
        DisorderSample {
            geometry,
            couplings: vec![0.0; geometry.site_count()],
            provenance: None,
        }
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub(crate) fn with_parts(geometry: BoxGeometry, couplings: Vec<f64>, provenance: Option<Provenance>) -> Self {
        debug_assert_eq!(couplings.len(), geometry.site_count());
        DisorderSample {
            geometry,
            couplings,
            provenance,
        }
    }
}

/// Draws iid couplings for every site of `geometry` from the stream of
/// realization `index`.
pub fn sample_disorder(
    dist: &DisorderDistribution,
    geometry: &BoxGeometry,
    master_seed: u64,
    index: u64,
) -> DisorderSample {
    let mut rng = stream_rng(realization_seed(master_seed, index));
    let couplings = (0..geometry.site_count()).map(|_| dist.sample(&mut rng)).collect();
    DisorderSample {
        geometry: *geometry,
        couplings,
        provenance: Some(Provenance { master_seed, index }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: usize) -> BoxGeometry {
        BoxGeometry::new(1, l).unwrap()
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 stream seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN_GAMMA), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn uniform_samples_lie_in_unit_interval() {
        let s = sample_disorder(&DisorderDistribution::Uniform01, &line(1000), 7, 3);
        assert!(s.couplings().iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert_eq!(s.couplings().len(), 1000);
    }

    #[test]
    fn samples_are_deterministic_per_seed_and_index() {
        let d = DisorderDistribution::Uniform01;
        let a = sample_disorder(&d, &line(50), 11, 4);
        let b = sample_disorder(&d, &line(50), 11, 4);
        let c = sample_disorder(&d, &line(50), 11, 5);
        assert_eq!(a, b);
        assert_ne!(a.couplings(), c.couplings());
    }

    #[test]
    fn uniform_mean_within_three_stderr() {
        let s = sample_disorder(&DisorderDistribution::Uniform01, &line(100_000), 2024, 0);
        let n = s.couplings().len() as f64;
        let mean = s.couplings().iter().sum::<f64>() / n;
        let var = s.couplings().iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn piecewise_density_validation() {
        assert!(DisorderDistribution::piecewise_constant(0.0, 1.0, vec![0.5, 0.4]).is_err());
        assert!(DisorderDistribution::piecewise_constant(1.0, 1.0, vec![1.0]).is_err());
        assert!(DisorderDistribution::piecewise_constant(0.0, 2.0, vec![0.5, -0.5, 1.0]).is_err());
        assert!(DisorderDistribution::piecewise_constant(0.0, 2.0, vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn piecewise_samples_respect_support_and_mean() {
        let d = DisorderDistribution::piecewise_constant(-1.0, 3.0, vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let s = sample_disorder(&d, &line(50_000), 3, 1);
        // Mass only on [0,1) and [2,3].
        assert!(s
            .couplings()
            .iter()
            .all(|&w| (0.0..1.0).contains(&w) || (2.0..=3.0).contains(&w)));
        let n = s.couplings().len() as f64;
        let mean = s.couplings().iter().sum::<f64>() / n;
        assert!((mean - d.mean()).abs() < 0.05, "{mean} vs {}", d.mean());
        assert!((d.mean() - 1.5).abs() < 1e-15);
    }
}
