//! Eigenvalue cache in the `SSFLAB01` binary format.
//!
//! Layout: the 8 magic bytes, a little-endian `u64` count, then that many
//! little-endian `f64` eigenvalues in ascending order. Eigenvectors are never
//! stored; kernels that need them bypass the store.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use crate::disorder::DisorderSample;
use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::report::write_atomic;

pub const MAGIC: &[u8; 8] = b"SSFLAB01";
pub const CACHE_DIR_ENV: &str = "SSF_LAB_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".ssf-lab-cache";
const EXTENSION: &str = "ssf";

/// 64-bit content hash identifying one cached spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey(u64);

impl CacheKey {
    /// Hash of the model's canonical JSON, the sample provenance, the exact
    /// coupling bits and a free-form `variant` naming the operator built from them
    /// (e.g. `"H"` or `"site:17=1"`).
    ///
    /// The coupling bits are included so that edited samples (which keep their
    /// provenance) never alias the original.
    pub fn new(model: &ModelSpec, sample: &DisorderSample, variant: &str) -> Self {
        let mut h = Sha256::new();
        h.update(model.canonical_json().as_bytes());
        h.update([0u8]);
        match sample.provenance() {
            Some(p) => {
                h.update([1u8]);
                h.update(p.master_seed.to_le_bytes());
                h.update(p.index.to_le_bytes());
            }
            None => h.update([0u8]),
        }
        let g = sample.geometry();
        h.update((g.dim() as u64).to_le_bytes());
        h.update((g.side() as u64).to_le_bytes());
        for c in sample.couplings() {
            h.update(c.to_bits().to_le_bytes());
        }
        h.update(variant.as_bytes());
        let digest = h.finalize();
        CacheKey(u64::from_le_bytes(digest[..8].try_into().unwrap()))
    }

    pub fn from_raw(raw: u64) -> Self {
        CacheKey(raw)
    }

    pub fn raw(&self) -> u64 {
        self.0
    }

    pub fn file_name(&self) -> String {
        format!("{:016x}.{EXTENSION}", self.0)
    }
}

pub fn encode(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode`]; the error string says what is wrong with the bytes.
pub fn decode(bytes: &[u8]) -> std::result::Result<Vec<f64>, String> {
    if bytes.len() < 16 {
        return Err(format!("{} bytes is shorter than the header", bytes.len()));
    }
    if &bytes[..8] != MAGIC {
        return Err("bad magic".into());
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = count.checked_mul(8).and_then(|b| b.checked_add(16));
    if expected != Some(bytes.len() as u64) {
        return Err(format!(
            "header announces {count} values but the file has {} bytes",
            bytes.len()
        ));
    }
    let values: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] > w[1]) {
        return Err("eigenvalues are not finite and ascending".into());
    }
    Ok(values)
}

/// Where eigenvalue-only spectra come from.
pub trait SpectrumStore: Sync {
    /// Returns the cached eigenvalues for `key`, or runs `producer` and stores its
    /// eigenvalues. The result never carries eigenvectors.
    fn get_or_compute(&self, key: CacheKey, producer: &dyn Fn() -> Result<Spectrum>) -> Result<Spectrum>;
}

/// Always calls the producer.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCache;

impl SpectrumStore for NoCache {
    fn get_or_compute(&self, _key: CacheKey, producer: &dyn Fn() -> Result<Spectrum>) -> Result<Spectrum> {
        Ok(producer()?.into_eigenvalues())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub files: u64,
    pub bytes: u64,
}

/// One file per key in a directory; safe for concurrent readers and writers
/// because files only ever appear through a rename.
#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(DiskCache {
            dir,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    /// `$SSF_LAB_CACHE_DIR`, falling back to `.ssf-lab-cache` in the working directory.
    pub fn default_dir() -> PathBuf {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn stats(&self) -> Result<CacheStats> {
        let mut stats = CacheStats::default();
        for path in self.entries()? {
            stats.files += 1;
            stats.bytes += std::fs::metadata(&path)?.len();
        }
        Ok(stats)
    }

    /// Removes every cache file; returns how many were deleted.
    pub fn clear(&self) -> Result<u64> {
        let mut removed = 0;
        for path in self.entries()? {
            match std::fs::remove_file(&path) {
                Ok(()) => removed += 1,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(removed)
    }

    fn entries(&self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        let listing = match std::fs::read_dir(&self.dir) {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for entry in listing {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == EXTENSION) {
                out.push(path);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Reads a cached spectrum. A corrupt file is reported as
    /// [`Error::CorruptCache`]; a missing one as `Ok(None)`.
    pub fn load(&self, key: CacheKey) -> Result<Option<Vec<f64>>> {
        let path = self.path_for(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        decode(&bytes)
            .map(Some)
            .map_err(|reason| Error::CorruptCache { path, reason })
    }

    pub fn store(&self, key: CacheKey, values: &[f64]) -> Result<()> {
        write_atomic(&self.path_for(key), &encode(values))
    }
}

impl SpectrumStore for DiskCache {
    fn get_or_compute(&self, key: CacheKey, producer: &dyn Fn() -> Result<Spectrum>) -> Result<Spectrum> {
        match self.load(key) {
            Ok(Some(values)) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(Spectrum::from_eigenvalues(values));
            }
            Ok(None) => {}
            Err(Error::CorruptCache { path, reason }) => {
                log::warn!("discarding corrupt cache file {}: {reason}", path.display());
                let _ = std::fs::remove_file(&path);
            }
            Err(e) => return Err(e),
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let spec = producer()?.into_eigenvalues();
        self.store(key, spec.values())?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;
    use crate::geometry::BoxGeometry;
    use crate::model::SiteProfile;
    use crate::sample_disorder;

    fn fixture() -> (ModelSpec, DisorderSample) {
        let g = BoxGeometry::new(1, 8).unwrap();
        let m = ModelSpec::anderson(g, SiteProfile::delta(1)).unwrap();
        let s = sample_disorder(m.disorder(), &g, 3, 1);
        (m, s)
    }

    #[test]
    fn encode_decode_roundtrip() {
        let v = vec![-1.5, 0.0, 0.1, 3.0];
        let bytes = encode(&v);
        assert_eq!(&bytes[..8], b"SSFLAB01");
        assert_eq!(bytes.len(), 16 + 32);
        assert_eq!(decode(&bytes).unwrap(), v);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
    }

    #[test]
    fn keys_separate_inputs() {
        let (m, s) = fixture();
        assert_eq!(CacheKey::new(&m, &s, "H"), CacheKey::new(&m, &s, "H"));
        assert_ne!(CacheKey::new(&m, &s, "H"), CacheKey::new(&m, &s, "H0"));
        let edited = crate::model::with_site_coupling(&s, 4, 0.0);
        assert_ne!(CacheKey::new(&m, &s, "H"), CacheKey::new(&m, &edited, "H"));
        let m2 = m.with_geometry(BoxGeometry::new(1, 9).unwrap()).unwrap();
        let s2 = sample_disorder(m2.disorder(), m2.geometry(), 3, 1);
        assert_ne!(CacheKey::new(&m, &s, "H"), CacheKey::new(&m2, &s2, "H"));
    }

    #[test]
    fn miss_then_hit_then_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let (m, s) = fixture();
        let key = CacheKey::new(&m, &s, "H");
        let calls = Cell::new(0);
        let h = crate::assemble_hamiltonian(&m, &s).unwrap();
        let producer = || {
            calls.set(calls.get() + 1);
            crate::eigen_decompose(&h, true)
        };
        let a = cache.get_or_compute(key, &producer).unwrap();
        let b = cache.get_or_compute(key, &producer).unwrap();
        assert_eq!(calls.get(), 1);
        assert!(!a.has_vectors());
        let bits = |s: &Spectrum| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!((cache.hits(), cache.misses()), (1, 1));

        let path = cache.path_for(key);
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..20]).unwrap();
        let c = cache.get_or_compute(key, &producer).unwrap();
        assert_eq!(calls.get(), 2);
        assert_eq!(bits(&a), bits(&c));
        assert_eq!(cache.stats().unwrap().files, 1);
        assert_eq!(cache.clear().unwrap(), 1);
        assert_eq!(cache.stats().unwrap(), CacheStats::default());
    }

    #[test]
    fn no_cache_always_produces() {
        let calls = AtomicU64::new(0);
        let producer = || {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(Spectrum::from_eigenvalues(vec![1.0]))
        };
        let key = CacheKey::from_raw(1);
        NoCache.get_or_compute(key, &producer).unwrap();
        NoCache.get_or_compute(key, &producer).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 2);
    }
}
