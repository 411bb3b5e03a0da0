use std::time::Duration;

use super::{BackendError, TranslationBackend, TranslationRequest};
use crate::process::{escape, unescape, LineError, LineProcess};

/// Child process reading `src<TAB>tgt<TAB>text` lines and answering one
/// translated line per request, in order. Backslash escapes (`\n`, `\t`,
/// `\r`, `\\`) are applied in both directions.
pub struct SubprocessTranslator {
    process: LineProcess,
}

impl SubprocessTranslator {
    pub fn new(argv: Vec<String>, timeout: Duration) -> Result<Self, BackendError> {
        let process = LineProcess::new(argv, timeout).map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(Self { process })
    }
}

impl TranslationBackend for SubprocessTranslator {
    fn cache_id(&self) -> String {
        format!("subprocess:{}", self.process.argv().join(" "))
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        let lines: Vec<String> = req
            .texts
            .iter()
            .map(|t| format!("{}\t{}\t{}", escape(&req.pair.src), escape(&req.pair.tgt), escape(t)))
            .collect();
        match self.process.exchange(&lines) {
            Ok(out) => Ok(out.iter().map(|l| unescape(l)).collect()),
            Err(LineError::Timeout(_)) => Err(BackendError::Timeout),
            Err(e) => Err(BackendError::Network(e.to_string())),
        }
    }

    fn supports_concurrency(&self) -> bool {
        false
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::backend::LangPair;

    #[test]
    fn round_trips_escaped_text_through_shell_echo() {
        // echoes the third field back
        let t = SubprocessTranslator::new(
            vec![
                "sh".into(),
                "-c".into(),
                r#"while IFS= read -r l; do printf '%s\n' "${l#*	*	}"; done"#.into(),
            ],
            Duration::from_secs(5),
        )
        .unwrap();
        let texts: Vec<String> = vec!["one".into(), "two\nlines".into(), "tab\there".into()];
        let out = t
            .translate_batch(&TranslationRequest::new(texts.clone(), LangPair::new("en", "de")))
            .unwrap();
        assert_eq!(out, texts);
        assert!(!t.supports_concurrency());
    }

    #[test]
    fn silent_child_times_out() {
        let t = SubprocessTranslator::new(
            vec!["sh".into(), "-c".into(), "while read l; do :; done".into()],
            Duration::from_millis(100),
        )
        .unwrap();
        let err = t.translate_batch(&TranslationRequest::single("x", LangPair::new("en", "de")));
        assert_eq!(err, Err(BackendError::Timeout));
    }
}
