use std::time::Duration;

use super::{GenderTagger, TaggerError};
use crate::gender::Gender;
use crate::process::{escape, LineError, LineProcess};

/// Delegates tagging to a child process speaking
/// `TAG<TAB>lang<TAB>occupation<TAB>sentence` → `MALE|FEMALE|UNKNOWN`.
/// A timeout, a dead child or an unrecognized answer all yield `Unknown`.
pub struct ExternalTagger {
    process: LineProcess,
    source_lang: String,
}

impl ExternalTagger {
    pub fn new(argv: Vec<String>, source_lang: impl Into<String>, timeout: Duration) -> Result<Self, LineError> {
        Ok(Self {
            process: LineProcess::new(argv, timeout)?,
            source_lang: source_lang.into(),
        })
    }

    fn ask(&self, lang: &str, occupation: &str, sentence: &str) -> Gender {
        let request = format!("TAG\t{}\t{}\t{}", escape(lang), escape(occupation), escape(sentence));
        match self.process.exchange(&[request]) {
            Ok(lines) => match lines[0].trim() {
                "MALE" => Gender::Male,
                "FEMALE" => Gender::Female,
                "UNKNOWN" => Gender::Unknown,
                other => {
                    log::warn!("external tagger answered `{other}`");
                    Gender::Unknown
                }
            },
            Err(e) => {
                log::warn!("external tagger failed: {e}");
                Gender::Unknown
            }
        }
    }
}

impl GenderTagger for ExternalTagger {
    fn source_gender(&self, text: &str, occupation: &str) -> Result<Gender, TaggerError> {
        Ok(self.ask(&self.source_lang, occupation, text))
    }

    fn target_gender(&self, translation: &str, occupation: &str, lang: &str) -> Gender {
        self.ask(lang, occupation, translation)
    }
}
