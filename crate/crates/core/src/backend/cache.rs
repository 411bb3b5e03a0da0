//! Content-addressed translation cache.
//!
//! One JSON file per entry under `<dir>/<2 hex>/<64 hex>.json`; the key is
//! `sha256(backend_id \0 src \0 tgt \0 text)`. Writes go through a temporary
//! file and an atomic rename, so concurrent writers of the same key leave
//! one complete entry (last writer wins) and readers never see a partial
//! file.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, LangPair, TranslationBackend, TranslationRequest};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "CTXDEBIAS_CACHE_DIR";
const DEFAULT_DIR: &str = ".ctxdebias-cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CacheStats {
    pub entries: u64,
    pub bytes: u64,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    backend: String,
    src: String,
    tgt: String,
    text: String,
    translation: String,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$CTXDEBIAS_CACHE_DIR` when set and non-empty, else `fallback`, else
    /// `.ctxdebias-cache` in the working directory.
    pub fn from_env(fallback: Option<&Path>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(v) if !v.is_empty() => Self::new(v),
            _ => Self::new(fallback.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(backend_id: &str, pair: &LangPair, text: &str) -> String {
        let mut h = Sha256::new();
        for part in [backend_id, &pair.src, &pair.tgt, text] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, backend_id: &str, pair: &LangPair, text: &str) -> Option<String> {
        let path = self.path_for(&Self::key(backend_id, pair, text));
        let bytes = fs::read(&path).ok()?;
        let entry: Entry = match serde_json::from_slice(&bytes) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", path.display());
                return None;
            }
        };
        (entry.backend == backend_id && entry.src == pair.src && entry.tgt == pair.tgt && entry.text == text)
            .then_some(entry.translation)
    }

    pub fn put(&self, backend_id: &str, pair: &LangPair, text: &str, translation: &str) -> io::Result<()> {
        let path = self.path_for(&Self::key(backend_id, pair, text));
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent)?;
        let entry = Entry {
            backend: backend_id.to_string(),
            src: pair.src.clone(),
            tgt: pair.tgt.clone(),
            text: text.to_string(),
            translation: translation.to_string(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(&serde_json::to_vec(&entry).map_err(io::Error::other)?)?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Entry count and total size. A missing directory is an empty cache.
    pub fn stats(&self) -> io::Result<CacheStats> {
        let mut stats = CacheStats::default();
        let shards = match fs::read_dir(&self.dir) {
            Ok(rd) => rd,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(stats),
            Err(e) => return Err(e),
        };
        for shard in shards {
            let shard = shard?;
            if !shard.file_type()?.is_dir() {
                continue;
            }
            for file in fs::read_dir(shard.path())? {
                let file = file?;
                let name = file.file_name();
                if name.to_string_lossy().ends_with(".json") {
                    stats.entries += 1;
                    stats.bytes += file.metadata()?.len();
                }
            }
        }
        Ok(stats)
    }

    /// Removes every entry. The directory is first renamed away so
    /// concurrent readers see either the old cache or an empty one.
    pub fn clear(&self) -> io::Result<()> {
        if !self.dir.exists() {
            return Ok(());
        }
        let parent = self.dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let graveyard = tempfile::Builder::new().prefix(".ctxdebias-trash").tempdir_in(parent)?;
        let target = graveyard.path().join("old");
        fs::rename(&self.dir, &target)?;
        graveyard.close()
    }
}

/// Wraps a backend with a [`DiskCache`]. Misses of one request are sent to
/// the inner backend as a single batch, in input order.
pub struct CachedBackend<B> {
    inner: B,
    cache: DiskCache,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<B: TranslationBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: DiskCache) -> Self {
        Self {
            inner,
            cache,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn cache(&self) -> &DiskCache {
        &self.cache
    }

    /// (hits, misses) since construction.
    pub fn counters(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}

impl<B: TranslationBackend> TranslationBackend for CachedBackend<B> {
    fn cache_id(&self) -> String {
        self.inner.cache_id()
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        let id = self.inner.cache_id();
        let mut out: Vec<Option<String>> = req.texts.iter().map(|t| self.cache.get(&id, &req.pair, t)).collect();
        let missing: Vec<usize> = (0..out.len()).filter(|&i| out[i].is_none()).collect();
        self.hits.fetch_add((out.len() - missing.len()) as u64, Ordering::Relaxed);
        self.misses.fetch_add(missing.len() as u64, Ordering::Relaxed);
        if !missing.is_empty() {
            let sub = TranslationRequest::new(missing.iter().map(|&i| req.texts[i].clone()).collect(), req.pair.clone());
            let translated = super::translate_batch(&self.inner, &sub)?;
            for (&i, t) in missing.iter().zip(translated) {
                self.cache
                    .put(&id, &req.pair, &req.texts[i], &t)
                    .map_err(|e| BackendError::Cache(e.to_string()))?;
                out[i] = Some(t);
            }
        }
        Ok(out.into_iter().map(|t| t.expect("filled")).collect())
    }

    fn supports_concurrency(&self) -> bool {
        self.inner.supports_concurrency()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockConfig, MockTranslator};

    fn pair() -> LangPair {
        LangPair::new("en", "de")
    }

    #[test]
    fn put_get_stats_clear() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::new(dir.path().join("c"));
        assert_eq!(cache.stats().unwrap(), CacheStats::default());
        assert_eq!(cache.get("b", &pair(), "x"), None);
        cache.put("b", &pair(), "x", "y").unwrap();
        cache.put("b", &pair(), "x", "z").unwrap();
        assert_eq!(cache.get("b", &pair(), "x").as_deref(), Some("z"));
        assert_eq!(cache.get("other", &pair(), "x"), None);
        assert_eq!(cache.get("b", &LangPair::new("en", "fr"), "x"), None);
        assert_eq!(cache.stats().unwrap().entries, 1);
        cache.clear().unwrap();
        assert_eq!(cache.stats().unwrap().entries, 0);
        assert!(dir.path().read_dir().unwrap().next().is_none());
    }

    #[test]
    fn key_separates_fields() {
        let a = DiskCache::key("b", &LangPair::new("en", "de"), "x");
        let b = DiskCache::key("b", &LangPair::new("e", "nde"), "x");
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn cached_backend_is_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let texts: Vec<String> = vec!["a".into(), "b".into(), "a".into()];
        let req = TranslationRequest::new(texts.clone(), pair());
        let cached = CachedBackend::new(MockTranslator::new(MockConfig::identity()), DiskCache::new(dir.path()));
        assert_eq!(cached.translate_batch(&req).unwrap(), texts);
        assert_eq!(cached.counters(), (0, 3));
        assert_eq!(cached.translate_batch(&req).unwrap(), texts);
        assert_eq!(cached.counters(), (3, 3));
        assert_eq!(cached.cache().stats().unwrap().entries, 2);
    }
}
