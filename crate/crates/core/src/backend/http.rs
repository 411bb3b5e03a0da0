use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, LangPair, TranslationBackend, TranslationRequest};

/// Body of `POST /translate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRequest {
    pub src_lang: String,
    pub tgt_lang: String,
    pub texts: Vec<String>,
}

/// Successful response body of `POST /translate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireResponse {
    pub translations: Vec<String>,
}

impl WireRequest {
    pub fn from_request(req: &TranslationRequest) -> Self {
        Self {
            src_lang: req.pair.src.clone(),
            tgt_lang: req.pair.tgt.clone(),
            texts: req.texts.clone(),
        }
    }
}

/// Client for a translation service speaking the JSON wire protocol.
///
/// Status mapping: 200 → translations, 400 → `Protocol`, 422 →
/// `UnsupportedPair`, anything else → `Network`.
pub struct HttpTranslator {
    endpoint: String,
    agent: ureq::Agent,
    max_batch: usize,
}

impl HttpTranslator {
    /// `base_url` is the service root; requests go to `{base_url}/translate`.
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: format!("{}/translate", base_url.trim_end_matches('/')),
            agent,
            max_batch: 64,
        }
    }

    /// Splits larger requests into chunks of at most `n` texts.
    pub fn with_max_batch(mut self, n: usize) -> Self {
        self.max_batch = n.max(1);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post(&self, texts: &[String], pair: &LangPair) -> Result<Vec<String>, BackendError> {
        let body = WireRequest {
            src_lang: pair.src.clone(),
            tgt_lang: pair.tgt.clone(),
            texts: texts.to_vec(),
        };
        let mut resp = self.agent.post(&self.endpoint).send_json(&body).map_err(map_ureq)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_ureq)?;
        match status {
            200 => {
                let parsed: WireResponse = serde_json::from_str(&text)
                    .map_err(|e| BackendError::Protocol(format!("malformed response body: {e}")))?;
                if parsed.translations.len() != texts.len() {
                    return Err(BackendError::Protocol(format!(
                        "expected {} translations, got {}",
                        texts.len(),
                        parsed.translations.len()
                    )));
                }
                Ok(parsed.translations)
            }
            400 => Err(BackendError::Protocol(format!("server rejected request: {}", text.trim()))),
            422 => Err(BackendError::UnsupportedPair(pair.clone())),
            other => Err(BackendError::Network(format!("HTTP {other}: {}", text.trim()))),
        }
    }
}

fn map_ureq(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        other => BackendError::Network(other.to_string()),
    }
}

impl TranslationBackend for HttpTranslator {
    fn cache_id(&self) -> String {
        format!("http:{}", self.endpoint)
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        let mut out = Vec::with_capacity(req.texts.len());
        for chunk in req.texts.chunks(self.max_batch) {
            out.extend(self.post(chunk, &req.pair)?);
        }
        Ok(out)
    }
}
