//! Translation backends behind one batch interface.
//!
//! * [`MockTranslator`]: deterministic rule-based stand-in for an NMT model.
//! * [`HttpTranslator`]: `POST /translate` JSON client.
//! * [`SubprocessTranslator`]: one-line-per-request child process.
//! * [`CachedBackend`]: content-addressed on-disk cache around any of them.

mod cache;
mod http;
mod mock;
mod subprocess;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cache::{CacheStats, CachedBackend, DiskCache, CACHE_DIR_ENV};
pub use http::{HttpTranslator, WireRequest, WireResponse};
pub use mock::{mock_translate, MockConfig, MockMode, MockTranslator, Threshold};
pub use subprocess::SubprocessTranslator;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LangPair {
    pub src: String,
    pub tgt: String,
}

impl LangPair {
    pub fn new(src: impl Into<String>, tgt: impl Into<String>) -> Self {
        Self {
            src: src.into(),
            tgt: tgt.into(),
        }
    }
}

impl fmt::Display for LangPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRequest {
    pub texts: Vec<String>,
    pub pair: LangPair,
}

impl TranslationRequest {
    pub fn new(texts: Vec<String>, pair: LangPair) -> Self {
        Self { texts, pair }
    }

    pub fn single(text: impl Into<String>, pair: LangPair) -> Self {
        Self::new(vec![text.into()], pair)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("network error: {0}")]
    Network(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("translation timed out")]
    Timeout,
    #[error("unsupported language pair {0}")]
    UnsupportedPair(LangPair),
    #[error("no lexicon or bias entry for occupation `{0}`")]
    UnknownOccupation(String),
    #[error("cache error: {0}")]
    Cache(String),
}

/// A translation model.
pub trait TranslationBackend: Send + Sync {
    /// Identifier of the backend and its configuration; part of every cache
    /// key, so two configurations that can translate differently must not
    /// share it.
    fn cache_id(&self) -> String;

    /// Translates every text of the request. The output has the same length
    /// and order as `req.texts`.
    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError>;

    /// `false` when callers must not issue overlapping requests.
    fn supports_concurrency(&self) -> bool {
        true
    }
}

impl<T: TranslationBackend + ?Sized> TranslationBackend for std::sync::Arc<T> {
    fn cache_id(&self) -> String {
        (**self).cache_id()
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        (**self).translate_batch(req)
    }

    fn supports_concurrency(&self) -> bool {
        (**self).supports_concurrency()
    }
}

impl<T: TranslationBackend + ?Sized> TranslationBackend for Box<T> {
    fn cache_id(&self) -> String {
        (**self).cache_id()
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        (**self).translate_batch(req)
    }

    fn supports_concurrency(&self) -> bool {
        (**self).supports_concurrency()
    }
}

/// Calls the backend and checks the length contract.
pub fn translate_batch(
    backend: &dyn TranslationBackend,
    req: &TranslationRequest,
) -> Result<Vec<String>, BackendError> {
    if req.texts.is_empty() {
        return Ok(Vec::new());
    }
    let out = backend.translate_batch(req)?;
    if out.len() != req.texts.len() {
        return Err(BackendError::Protocol(format!(
            "expected {} translations, got {}",
            req.texts.len(),
            out.len()
        )));
    }
    Ok(out)
}
