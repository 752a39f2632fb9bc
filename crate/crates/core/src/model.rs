//! Lattice Hamiltonians `H = H0 + lambda * sum_j omega_j u_j` on periodic boxes.
//!
//! `H0` is the lattice Laplacian (diagonal `2d`, hopping `-1` on nearest-neighbour
//! bonds) plus a periodic background potential. The random part is diagonal: each
//! site `j` carries a translate `u_j = u(. - j)` of one positive single-site profile,
//! weighted by its coupling `omega_j`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disorder::{realization_seed, splitmix64, stream_rng, DisorderDistribution, DisorderSample};
use crate::error::{Error, Result};
use crate::geometry::{BoxGeometry, Shift, MAX_DIM};
use crate::operator::SymmetricOperator;

/// Upper bound accepted for single-site profile values.
pub const PROFILE_MAX: f64 = 1.0e3;

/// Positive single-site potential given by its values on a finite set of offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteProfile {
    dim: usize,
    offsets: Vec<Shift>,
    values: Vec<f64>,
}

impl SiteProfile {
    pub fn new(dim: usize, offsets: Vec<Vec<i64>>, values: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() || offsets.len() != values.len() {
            return Err(Error::param(
                "profile",
                "needs a nonempty support with one value per offset",
            ));
        }
        let mut shifts = Vec::with_capacity(offsets.len());
        for off in &offsets {
            if off.len() != dim {
                return Err(Error::param(
                    "profile",
                    format!("offset {off:?} does not have {dim} components"),
                ));
            }
            let mut s = [0; MAX_DIM];
            s[..dim].copy_from_slice(off);
            if shifts.contains(&s) {
                return Err(Error::param("profile", format!("duplicate offset {off:?}")));
            }
            shifts.push(s);
        }
        if let Some(v) = values
            .iter()
            .find(|v| !v.is_finite() || **v <= 0.0 || **v > PROFILE_MAX)
        {
            return Err(Error::param(
                "profile",
                format!("values must lie in (0, {PROFILE_MAX}] (got {v})"),
            ));
        }
        Ok(SiteProfile {
            dim,
            offsets: shifts,
            values,
        })
    }

    /// `u = delta_0`.
    pub fn delta(dim: usize) -> Self {
        SiteProfile {
            dim,
            offsets: vec![[0; MAX_DIM]],
            values: vec![1.0],
        }
    }

    /// One-dimensional profile with `values[k]` at offset `+k`.
    pub fn plateau_1d(values: &[f64]) -> Result<Self> {
        let offsets = (0..values.len()).map(|k| vec![k as i64]).collect();
        Self::new(1, offsets, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of support sites; the rank of each `u_j`.
    pub fn rank(&self) -> usize {
        self.offsets.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Shift, f64)> {
        self.offsets.iter().zip(self.values.iter().copied())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest coordinate spread `max - min` over the axes.
    pub fn diameter(&self) -> usize {
        (0..self.dim)
            .map(|a| {
                let lo = self.offsets.iter().map(|o| o[a]).min().unwrap_or(0);
                let hi = self.offsets.iter().map(|o| o[a]).max().unwrap_or(0);
                (hi - lo) as usize
            })
            .max()
            .unwrap_or(0)
    }

    /// Distinct offsets land on distinct sites once the spread is below `L`.
    pub fn check_fits(&self, geometry: &BoxGeometry) -> Result<()> {
        if self.dim != geometry.dim() {
            return Err(Error::Config(format!(
                "profile dimension {} does not match box dimension {}",
                self.dim,
                geometry.dim()
            )));
        }
        if self.diameter() >= geometry.side() {
            return Err(Error::Config(format!(
                "profile diameter {} must be smaller than the side length {}",
                self.diameter(),
                geometry.side()
            )));
        }
        Ok(())
    }

    /// `(site, u_j(site))` pairs of the translate anchored at `anchor`.
    pub fn placed_at<'a>(
        &'a self,
        geometry: &'a BoxGeometry,
        anchor: usize,
    ) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.entries().map(move |(off, v)| (geometry.shifted(anchor, off), v))
    }
}

/// Background potential with period `period` along every axis.
///
/// `values` covers the unit cell `{0..p-1}^d` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundPotential {
    period: usize,
    values: Vec<f64>,
}

impl BackgroundPotential {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        BackgroundPotential {
            period: 1,
            values: vec![c],
        }
    }

    pub fn periodic(dim: usize, period: usize, values: Vec<f64>) -> Result<Self> {
        if period == 0 || values.len() != period.pow(dim as u32) {
            return Err(Error::param(
                "background",
                format!(
                    "need period^d = {} values, got {}",
                    period.pow(dim as u32),
                    values.len()
                ),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("background", "values must be finite"));
        }
        Ok(BackgroundPotential { period, values })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn check_fits(&self, geometry: &BoxGeometry) -> Result<()> {
        if !geometry.side().is_multiple_of(self.period) {
            return Err(Error::Config(format!(
                "background period {} does not divide the side length {}",
                self.period,
                geometry.side()
            )));
        }
        if self.values.len() != self.period.pow(geometry.dim() as u32) {
            return Err(Error::Config(format!(
                "background has {} values, expected {} for d = {}",
                self.values.len(),
                self.period.pow(geometry.dim() as u32),
                geometry.dim()
            )));
        }
        Ok(())
    }

    pub fn value_at(&self, geometry: &BoxGeometry, site: usize) -> f64 {
        let c = geometry.coords(site);
        let idx = c[..geometry.dim()]
            .iter()
            .fold(0, |acc, &x| acc * self.period + x % self.period);
        self.values[idx]
    }
}

/// Everything needed to turn a disorder sample into a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    geometry: BoxGeometry,
    background: BackgroundPotential,
    profile: SiteProfile,
    coupling: f64,
    disorder: DisorderDistribution,
}

impl ModelSpec {
    pub fn new(
        geometry: BoxGeometry,
        background: BackgroundPotential,
        profile: SiteProfile,
        coupling: f64,
        disorder: DisorderDistribution,
    ) -> Result<Self> {
        background.check_fits(&geometry)?;
        profile.check_fits(&geometry)?;
        disorder.validate()?;
        if !coupling.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        Ok(ModelSpec {
            geometry,
            background,
            profile,
            coupling,
            disorder,
        })
    }

    /// Zero background, unit coupling, uniform `[0, 1]` couplings.
    pub fn anderson(geometry: BoxGeometry, profile: SiteProfile) -> Result<Self> {
        Self::new(
            geometry,
            BackgroundPotential::zero(),
            profile,
            1.0,
            DisorderDistribution::Uniform01,
        )
    }

    /// Same model on another box.
    pub fn with_geometry(&self, geometry: BoxGeometry) -> Result<Self> {
        Self::new(
            geometry,
            self.background.clone(),
            self.profile.clone(),
            self.coupling,
            self.disorder.clone(),
        )
    }

    pub fn with_disorder(&self, disorder: DisorderDistribution) -> Result<Self> {
        Self::new(
            self.geometry,
            self.background.clone(),
            self.profile.clone(),
            self.coupling,
            disorder,
        )
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn background(&self) -> &BackgroundPotential {
        &self.background
    }

    pub fn profile(&self) -> &SiteProfile {
        &self.profile
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn disorder(&self) -> &DisorderDistribution {
        &self.disorder
    }

    /// Sorted-key JSON with shortest round-trip floats.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("model spec serializes");
        serde_json::to_string(&value).expect("json value serializes")
    }

    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Diagonal weight `lambda * u_j` of site `j`, as `(site, weight)` pairs.
    pub fn site_weight(&self, j: usize) -> Vec<(usize, f64)> {
        self.profile
            .placed_at(&self.geometry, j)
            .map(|(s, v)| (s, self.coupling * v))
            .collect()
    }
}

/// Lattice Laplacian with periodic wrap plus the background potential.
pub fn build_free_hamiltonian(geometry: &BoxGeometry, background: &BackgroundPotential) -> Result<SymmetricOperator> {
    background.check_fits(geometry)?;
    let n = geometry.site_count();
    let mut h = SymmetricOperator::zeros(n);
    let diag = 2.0 * geometry.dim() as f64;
    for site in 0..n {
        h.set(site, site, diag + background.value_at(geometry, site));
        for nb in geometry.neighbors(site) {
            h.set(site, nb, -1.0);
        }
    }
    Ok(h)
}

/// `sum_j lambda * u_j` over every anchor of the box.
pub fn sum_profile_potential(geometry: &BoxGeometry, profile: &SiteProfile, coupling: f64) -> Result<Vec<f64>> {
    profile.check_fits(geometry)?;
    let mut w = vec![0.0; geometry.site_count()];
    for j in 0..geometry.site_count() {
        for (s, v) in profile.placed_at(geometry, j) {
            w[s] += coupling * v;
        }
    }
    Ok(w)
}

/// Diagonal of `lambda * sum_j omega_j u_j`.
pub fn random_potential(model: &ModelSpec, sample: &DisorderSample) -> Result<Vec<f64>> {
    if sample.geometry() != model.geometry() {
        return Err(Error::Config(format!(
            "sample box {:?} does not match model box {:?}",
            sample.geometry(),
            model.geometry()
        )));
    }
    let g = model.geometry();
    let mut v = vec![0.0; g.site_count()];
    for (j, &omega) in sample.couplings().iter().enumerate() {
        if omega == 0.0 {
            continue;
        }
        for (s, u) in model.profile.placed_at(g, j) {
            v[s] += model.coupling * omega * u;
        }
    }
    Ok(v)
}

pub fn assemble_hamiltonian(model: &ModelSpec, sample: &DisorderSample) -> Result<SymmetricOperator> {
    let mut h = build_free_hamiltonian(model.geometry(), model.background())?;
    h.add_diagonal(&random_potential(model, sample)?)?;
    Ok(h.with_tag(format!("model:{:016x}", model.hash())))
}

/// Copy of `sample` with the coupling at `site` replaced by `value`.
pub fn with_site_coupling(sample: &DisorderSample, site: usize, value: f64) -> DisorderSample {
    let mut couplings = sample.couplings().to_vec();
    couplings[site] = value;
    DisorderSample::with_parts(*sample.geometry(), couplings, sample.provenance())
}

/// `omega'_x = omega_{x - shift}` with periodic wrap.
pub fn translate_sample(sample: &DisorderSample, shift: &Shift) -> DisorderSample {
    let g = sample.geometry();
    let mut out = vec![0.0; g.site_count()];
    for (x, &w) in sample.couplings().iter().enumerate() {
        out[g.shifted(x, shift)] = w;
    }
    DisorderSample::with_parts(*g, out, sample.provenance())
}

/// Site permutation realizing a cyclic shift: `perm[x] = x + shift`.
pub fn shift_permutation(geometry: &BoxGeometry, shift: &Shift) -> Vec<usize> {
    (0..geometry.site_count()).map(|x| geometry.shifted(x, shift)).collect()
}

/// How couplings outside an embedded box are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum FillRule {
    /// Fresh iid draws from a stream derived from the inner sample's provenance.
    FreshIid(DisorderDistribution),
    Zeros,
}

const EMBED_STREAM_TAG: u64 = 0x656D_6265_645F_6F75;

/// Outer-box site holding inner site `inner_site` when the inner box is centred.
pub fn embedded_site(inner: &BoxGeometry, outer: &BoxGeometry, inner_site: usize) -> usize {
    let offset = outer.centered_offset(inner.side());
    let c = inner.coords(inner_site);
    let mut oc = [0; MAX_DIM];
    for a in 0..inner.dim() {
        oc[a] = c[a] + offset;
    }
    outer.index(&oc)
}

/// Places `inner` centred in `outer` and fills the remaining sites per `fill`.
pub fn embed_sample(inner: &DisorderSample, outer: &BoxGeometry, fill: &FillRule) -> Result<DisorderSample> {
    let ig = inner.geometry();
    if ig.dim() != outer.dim() {
        return Err(Error::Config(format!(
            "cannot embed a d = {} box into a d = {} box",
            ig.dim(),
            outer.dim()
        )));
    }
    if outer.side() < ig.side() {
        return Err(Error::Config(format!(
            "outer side {} is smaller than inner side {}",
            outer.side(),
            ig.side()
        )));
    }
    if outer == ig {
        return Ok(inner.clone());
    }
    let mut couplings = match fill {
        FillRule::Zeros => vec![0.0; outer.site_count()],
        FillRule::FreshIid(dist) => {
            let base = inner
                .provenance()
                .map(|p| realization_seed(p.master_seed, p.index))
                .unwrap_or(0);
            let seed = splitmix64(base ^ EMBED_STREAM_TAG ^ (outer.side() as u64).rotate_left(32));
            let mut rng = stream_rng(seed);
            (0..outer.site_count()).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    for (s, &w) in inner.couplings().iter().enumerate() {
        couplings[embedded_site(ig, outer, s)] = w;
    }
    Ok(DisorderSample::with_parts(*outer, couplings, inner.provenance()))
}
