//! On-disk spectrum cache keyed by a content hash of the request.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::quantum::{GridPolicy, SectorQuery, Spectrum, SpectrumSource};

const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub format: u32,
    pub group: String,
    pub sector: i64,
    pub h: f64,
    pub potential: String,
    pub grid: GridPolicy,
    pub window: [f64; 2],
}

impl CacheKey {
    pub fn new(query: &SectorQuery, lo: f64, hi: f64, grid: &GridPolicy) -> Self {
        Self {
            format: FORMAT,
            group: query.group.to_string(),
            sector: query.sector,
            h: query.h,
            potential: query.potential.id(),
            grid: *grid,
            window: [lo, hi],
        }
    }

    pub fn id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("cache key serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// One eigenvalue with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub eigenvalue: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: CacheKey,
    pub degree: usize,
    pub levels: Vec<Level>,
}

impl CacheRecord {
    fn spectrum(&self) -> Spectrum {
        Spectrum {
            eigenvalues: self.levels.iter().map(|l| l.eigenvalue).collect(),
            errors: self.levels.iter().map(|l| l.error).collect(),
            degree: self.degree,
            window: (self.key.window[0], self.key.window[1]),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Ids of every record read or written, sorted.
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheInfo {
    pub dir: PathBuf,
    pub entries: usize,
    pub bytes: u64,
}

pub struct SpectrumCache {
    dir: PathBuf,
    grid: GridPolicy,
    write_lock: Mutex<()>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    ids: Mutex<BTreeSet<String>>,
}

impl SpectrumCache {
    pub fn open(dir: impl Into<PathBuf>, grid: GridPolicy) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            grid,
            write_lock: Mutex::new(()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            ids: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn load(&self, key: &CacheKey, id: &str) -> Option<CacheRecord> {
        let text = fs::read(self.path(id)).ok()?;
        let record: CacheRecord = serde_json::from_slice(&text).ok()?;
        (record.key == *key).then_some(record)
    }

    fn store(&self, id: &str, record: &CacheRecord) -> Result<()> {
        let bytes = serde_json::to_vec(record)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(id)).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            ids: self.ids.lock().unwrap_or_else(|p| p.into_inner()).iter().cloned().collect(),
        }
    }
}

impl SpectrumSource for SpectrumCache {
    fn spectrum(&self, query: &SectorQuery, lo: f64, hi: f64) -> Result<Spectrum> {
        let key = CacheKey::new(query, lo, hi, &self.grid);
        let id = key.id();
        self.ids.lock().unwrap_or_else(|p| p.into_inner()).insert(id.clone());
        if let Some(record) = self.load(&key, &id) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(record.spectrum());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let spectrum = query.spectrum(lo, hi, &self.grid)?;
        let record = CacheRecord {
            key,
            degree: spectrum.degree,
            levels: spectrum
                .eigenvalues
                .iter()
                .zip(&spectrum.errors)
                .map(|(&eigenvalue, &error)| Level { eigenvalue, error })
                .collect(),
        };
        self.store(&id, &record)?;
        Ok(spectrum)
    }
}

fn records(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_record = path.extension().is_some_and(|e| e == "json")
            && path
                .file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.len() == 64 && s.chars().all(|c| c.is_ascii_hexdigit()));
        if is_record {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn cache_info(dir: &Path) -> Result<CacheInfo> {
    let files = records(dir)?;
    let mut bytes = 0;
    for f in &files {
        bytes += fs::metadata(f)?.len();
    }
    Ok(CacheInfo {
        dir: dir.to_path_buf(),
        entries: files.len(),
        bytes,
    })
}

/// Removes cache records; other files in `dir` are left alone. Returns the
/// number removed.
pub fn clean(dir: &Path) -> Result<usize> {
    let files = records(dir)?;
    for f in &files {
        fs::remove_file(f)?;
    }
    Ok(files.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupKind;
    use crate::hamiltonian::Potential;

    #[test]
    fn warm_cache_returns_identical_spectra() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::open(dir.path(), GridPolicy::default()).unwrap();
        let q = SectorQuery::new(GroupKind::So2Planar, 1, 0.05, Potential::harmonic());
        let cold = cache.spectrum(&q, 0.5, 1.5).unwrap();
        let warm = cache.spectrum(&q, 0.5, 1.5).unwrap();
        assert_eq!(cold, warm);
        let s = cache.stats();
        assert_eq!((s.hits, s.misses, s.ids.len()), (1, 1, 1));
        assert_eq!(cache_info(dir.path()).unwrap().entries, 1);
        fs::write(dir.path().join("notes.txt"), "keep").unwrap();
        assert_eq!(clean(dir.path()).unwrap(), 1);
        assert!(dir.path().join("notes.txt").exists());
    }

    #[test]
    fn key_depends_on_every_field() {
        let q = SectorQuery::new(GroupKind::So2Planar, 0, 0.05, Potential::harmonic());
        let g = GridPolicy::default();
        let base = CacheKey::new(&q, 0.5, 1.5, &g).id();
        let mut q2 = q;
        q2.h = 0.04;
        assert_ne!(base, CacheKey::new(&q2, 0.5, 1.5, &g).id());
        assert_ne!(base, CacheKey::new(&q, 0.5, 1.6, &g).id());
        let g2 = GridPolicy { richardson: false, ..g };
        assert_ne!(base, CacheKey::new(&q, 0.5, 1.5, &g2).id());
    }
}
