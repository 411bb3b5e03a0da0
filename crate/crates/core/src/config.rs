//! Declarative run configuration (TOML).
//!
//! Relative paths are resolved against the directory of the config file.
//!
//! ```toml
//! tgt_lang = "de"
//! strategy = "greedy"
//! delimiter = "hash"
//! position = "prepend"
//! seed = 7
//! out_dir = "out"
//!
//! [backend]
//! kind = "mock"
//! signal_threshold = 1
//! [backend.bias]
//! nurse = "female"
//!
//! [dataset]
//! path = "winomt.tsv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backend::MockConfig;
use crate::context::{Delimiter, Position};
use crate::corpus::{ColumnMapping, LoadMode};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Greedy template search per sample.
    #[default]
    Greedy,
    /// Every template on every sample with the detected gender.
    AllTemplates,
    /// Every template with both genders, for context sensitivity.
    Counterfactual,
    /// The irrelevant bank on every sample.
    IrrelevantControl,
    /// BLEU of context-stripped translations for each delimiter.
    BleuDelimiters,
    /// Greedy accuracy over random template subsets.
    Bootstrap,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::AllTemplates => "all_templates",
            Strategy::Counterfactual => "counterfactual",
            Strategy::IrrelevantControl => "irrelevant_control",
            Strategy::BleuDelimiters => "bleu_delimiters",
            Strategy::Bootstrap => "bootstrap",
        }
    }
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_batch() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendSpec {
    /// Missing bias entries are filled from the stereotype lexicon.
    Mock(MockConfig),
    Http {
        url: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default = "default_max_batch")]
        max_batch: usize,
    },
    Subprocess {
        argv: Vec<String>,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Mock(MockConfig::default())
    }
}

/// Which templates a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankSelection {
    #[default]
    Relevant,
    Irrelevant,
    /// Relevant templates followed by irrelevant ones.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankSpec {
    /// Defaults to the built-in relevant bank.
    pub relevant: Option<PathBuf>,
    /// Defaults to the built-in irrelevant bank.
    pub irrelevant: Option<PathBuf>,
    pub placeholders: Option<PathBuf>,
    #[serde(default)]
    pub select: BankSelection,
    /// Prune relevant templates against the backend before the run.
    #[serde(default)]
    pub prune: bool,
    /// Occupations used as pruning probes.
    #[serde(default = "default_probes")]
    pub probe_occupations: Vec<String>,
}

impl Default for BankSpec {
    fn default() -> Self {
        toml::from_str("").expect("empty bank section is valid")
    }
}

fn default_probes() -> Vec<String> {
    vec!["doctor".into(), "nurse".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSpec {
    pub gender_words: Option<PathBuf>,
    pub occupations: Option<PathBuf>,
    pub stereotypes: Option<PathBuf>,
    /// Command line of an external tagger; the lexicon tagger otherwise.
    pub external_tagger: Option<Vec<String>>,
    #[serde(default = "default_timeout_ms")]
    pub tagger_timeout_ms: u64,
}

impl Default for LexiconSpec {
    fn default() -> Self {
        toml::from_str("").expect("empty lexicon section is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormatName {
    #[default]
    Tsv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DatasetFormatName,
    #[serde(default)]
    pub columns: ColumnMapping,
    #[serde(default)]
    pub mode: LoadMode,
    #[serde(default = "default_tag")]
    pub tag: String,
}

fn default_tag() -> String {
    "dataset".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelSpec {
    pub path: PathBuf,
    /// Keep only pairs whose source mentions a lexicon occupation.
    #[serde(default = "yes")]
    pub filter_occupations: bool,
    #[serde(default = "all_delimiters")]
    pub delimiters: Vec<Delimiter>,
    /// Contexts applied per sentence (first templates of the bank).
    pub contexts_per_sentence: Option<usize>,
}

fn yes() -> bool {
    true
}

fn all_delimiters() -> Vec<Delimiter> {
    Delimiter::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSpec {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
}

fn default_sizes() -> Vec<usize> {
    (1..=10).map(|i| i * 5).collect()
}

fn default_n_boot() -> usize {
    100
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            n_boot: default_n_boot(),
        }
    }
}

fn default_src() -> String {
    "en".into()
}

fn default_tgt() -> String {
    "de".into()
}

fn default_workers() -> usize {
    1
}

fn default_batch() -> usize {
    32
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_error_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_src")]
    pub src_lang: String,
    #[serde(default = "default_tgt")]
    pub tgt_lang: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: Delimiter,
    #[serde(default = "default_position")]
    pub position: Position,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Use the on-disk translation cache.
    #[serde(default = "yes")]
    pub cache: bool,
    /// Overridden by `CTXDEBIAS_CACHE_DIR`.
    pub cache_dir: Option<PathBuf>,
    /// Highest tolerated share of failed translation units before the run
    /// exits with status 2.
    #[serde(default = "default_error_threshold")]
    pub error_threshold: f64,
    #[serde(default)]
    pub backend: BackendSpec,
    #[serde(default)]
    pub bank: BankSpec,
    #[serde(default)]
    pub lexicons: LexiconSpec,
    pub dataset: Option<DatasetSpec>,
    pub parallel: Option<ParallelSpec>,
    #[serde(default)]
    pub bootstrap: BootstrapSpec,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_delimiter() -> Delimiter {
    Delimiter::Hash
}

fn default_position() -> Position {
    Position::Prepend
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_toml(src: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(src)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&src, &base)
    }

    /// Structural checks that do not touch the file system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return bad(format!("error_threshold must be in [0, 1], got {}", self.error_threshold));
        }
        match &self.backend {
            BackendSpec::Subprocess { argv, .. } if argv.is_empty() => bad("subprocess backend needs argv".into()),
            BackendSpec::Http { url, .. } if url.trim().is_empty() => bad("http backend needs url".into()),
            _ => Ok(()),
        }
    }

    /// [`validate`](Self::validate) plus the inputs the configured
    /// strategy needs.
    pub fn validate_for_run(&self) -> Result<(), ConfigError> {
        self.validate()?;
        let bad = |m: String| Err(ConfigError::Invalid(m));
        match self.strategy {
            Strategy::BleuDelimiters => {
                let Some(p) = &self.parallel else {
                    return bad("strategy bleu_delimiters needs a [parallel] corpus".into());
                };
                if p.delimiters.is_empty() {
                    return bad("[parallel] delimiters is empty".into());
                }
            }
            _ if self.dataset.is_none() => {
                return bad(format!("strategy {} needs a [dataset]", self.strategy.name()));
            }
            _ => {}
        }
        if self.strategy == Strategy::Bootstrap {
            if self.bootstrap.sizes.is_empty() || self.bootstrap.sizes.contains(&0) {
                return bad("[bootstrap] sizes must be non-empty and positive".into());
            }
            if self.bootstrap.n_boot == 0 {
                return bad("[bootstrap] n_boot must be at least 1".into());
            }
        }
        Ok(())
    }

    /// Resolves a config-relative path.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_path(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn tagger_timeout(&self) -> Duration {
        Duration::from_millis(self.lexicons.tagger_timeout_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Threshold;
    use crate::gender::Gender;

    #[test]
    fn parses_full_example() {
        let src = r#"
            tgt_lang = "fr"
            strategy = "counterfactual"
            delimiter = "semicolon"
            position = "append"
            seed = 3
            workers = 4
            [backend]
            kind = "mock"
            signal_threshold = "inf"
            [backend.bias]
            nurse = "female"
            [backend.occupation_thresholds]
            nurse = 2
            [dataset]
            path = "data/w.tsv"
            [dataset.columns]
            gender = 0
            sentence = 1
            occupation = 2
        "#;
        let cfg = RunConfig::from_toml(src, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.delimiter, Delimiter::Semicolon);
        assert_eq!(cfg.position, Position::Append);
        let BackendSpec::Mock(m) = &cfg.backend else { panic!() };
        assert_eq!(m.signal_threshold, Threshold::Never);
        assert_eq!(m.bias["nurse"], Gender::Female);
        assert_eq!(m.occupation_thresholds["nurse"], Threshold::At(2));
        let ds = cfg.dataset.as_ref().unwrap();
        assert_eq!(ds.columns.index, None);
        assert_eq!(cfg.resolve(&ds.path), PathBuf::from("/cfg/data/w.tsv"));
    }

    #[test]
    fn strategy_requirements_are_checked() {
        let parse = |s: &str| RunConfig::from_toml(s, Path::new(".")).unwrap();
        assert!(parse("strategy = \"bleu_delimiters\"").validate_for_run().is_err());
        assert!(parse("strategy = \"greedy\"").validate_for_run().is_err());
        let cfg = parse("strategy = \"bleu_delimiters\"\n[parallel]\npath = \"p.tsv\"\n");
        cfg.validate_for_run().unwrap();
        assert_eq!(cfg.bank, BankSpec::default());
        assert_eq!(BankSpec::default().probe_occupations, ["doctor", "nurse"]);
        assert_eq!(cfg.lexicons.tagger_timeout_ms, LexiconSpec::default().tagger_timeout_ms);
        assert_eq!(cfg.parallel.unwrap().delimiters.len(), 4);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_backends() {
        assert!(RunConfig::from_toml("colour = 1\n[dataset]\npath='x'", Path::new(".")).is_err());
        let http = "[backend]\nkind = \"http\"\nurl = \"http://localhost:8080\"\n[dataset]\npath='x'";
        let cfg = RunConfig::from_toml(http, Path::new(".")).unwrap();
        assert!(matches!(cfg.backend, BackendSpec::Http { timeout_ms: 30_000, .. }));
        let sub = "[backend]\nkind = \"subprocess\"\nargv = []\n[dataset]\npath='x'";
        assert!(RunConfig::from_toml(sub, Path::new(".")).is_err());
        let typo = "[backend]\nkind = \"mock\"\nsignal_treshold = 1\n[dataset]\npath='x'";
        assert!(RunConfig::from_toml(typo, Path::new(".")).is_err());
    }
}
