//! End-to-end orchestration behind the command-line tool.
//!
//! A run writes these files into the output directory:
//!
//! * `report.json`: the full [`MetricsReport`],
//! * `report.csv`: one header row and one value row,
//! * `report.txt`: a human-readable table,
//! * `outcomes.jsonl`: one [`DebiasOutcome`] per sample (greedy),
//! * `matrix.jsonl`: baseline and cell records (sweep strategies).
//!
//! Nothing in the output depends on wall-clock time or thread timing, so
//! reruns with the same config, seed and backend produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::backend::{
    CachedBackend, DiskCache, HttpTranslator, MockTranslator, SubprocessTranslator, TranslationBackend,
};
use crate::backend::{BackendError, LangPair, TranslationRequest};
use crate::config::{BackendSpec, BankSelection, ConfigError, DatasetFormatName, RunConfig, Strategy};
use crate::context::{compose, strip};
use crate::corpus::{self, CorpusError, DatasetFormat, LoadReport, Sample, StereotypeClass, StereotypeLexicon};
use crate::engine::{self, apply_all, debias_greedy, ApplicationMatrix, DebiasOutcome, EngineConfig, EngineSettings, SignalMode};
use crate::gender::Gender;
use crate::metrics::{self, MetricsError, MetricsReport, Stat};
use crate::tagger::{ExternalTagger, GenderLexicons, GenderTagger, LexiconTagger, OccupationLexicon, TaggerError};
use crate::template::{self, BankError, PlaceholderTable, PruneError, TemplateBank};
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Prune(#[from] PruneError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("{0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Lexicons, banks, tagger and backend of a configuration.
pub struct Resources {
    pub occupations: OccupationLexicon,
    pub stereotypes: StereotypeLexicon,
    pub relevant: TemplateBank,
    pub irrelevant: TemplateBank,
    pub tagger: Box<dyn GenderTagger>,
    pub backend: Box<dyn TranslationBackend>,
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self, RunError> {
        let lex = &cfg.lexicons;
        let occupations = match &lex.occupations {
            Some(p) => OccupationLexicon::load(&cfg.resolve(p))?,
            None => OccupationLexicon::builtin(),
        };
        let stereotypes = match &lex.stereotypes {
            Some(p) => StereotypeLexicon::load(&cfg.resolve(p))?,
            None => StereotypeLexicon::builtin(),
        };
        let tagger: Box<dyn GenderTagger> = match &lex.external_tagger {
            Some(argv) => Box::new(
                ExternalTagger::new(argv.clone(), cfg.src_lang.clone(), cfg.tagger_timeout())
                    .map_err(|e| RunError::Input(format!("external tagger: {e}")))?,
            ),
            None => {
                let words = match &lex.gender_words {
                    Some(p) => GenderLexicons::load(&cfg.resolve(p))?,
                    None => GenderLexicons::builtin(),
                };
                Box::new(LexiconTagger::new(cfg.src_lang.clone(), words, occupations.clone())?)
            }
        };
        let table = match &cfg.bank.placeholders {
            Some(p) => PlaceholderTable::load(&cfg.resolve(p))?,
            None => PlaceholderTable::builtin(),
        };
        let load_bank = |path: &Option<PathBuf>, builtin: fn() -> TemplateBank| -> Result<TemplateBank, RunError> {
            match path {
                Some(p) => {
                    let resolved = cfg.resolve(p);
                    let src = fs::read_to_string(&resolved).map_err(io_err(&resolved))?;
                    Ok(TemplateBank::parse(&src, table.clone())?)
                }
                None if cfg.bank.placeholders.is_some() => {
                    let b = builtin();
                    Ok(TemplateBank::parse(&b.to_tsv(), table.clone())?)
                }
                None => Ok(builtin()),
            }
        };
        let relevant = load_bank(&cfg.bank.relevant, TemplateBank::builtin_relevant)?;
        let irrelevant = load_bank(&cfg.bank.irrelevant, TemplateBank::builtin_irrelevant)?;
        let backend = build_backend(cfg, &occupations, &stereotypes)?;
        Ok(Self {
            occupations,
            stereotypes,
            relevant,
            irrelevant,
            tagger,
            backend,
        })
    }

    /// The bank selected by the configuration, pruned first when asked.
    pub fn bank(&self, cfg: &RunConfig) -> Result<TemplateBank, RunError> {
        let relevant = if cfg.bank.prune {
            prune(cfg, self)?
        } else {
            self.relevant.clone()
        };
        Ok(match cfg.bank.select {
            BankSelection::Relevant => relevant,
            BankSelection::Irrelevant => self.irrelevant.clone(),
            BankSelection::Mixed => relevant.concat(&self.irrelevant)?,
        })
    }
}

/// Builds the configured backend, wrapped in the disk cache when enabled.
/// A mock without a bias entry for an occupation takes the gender of the
/// occupation's stereotype class.
pub fn build_backend(
    cfg: &RunConfig,
    occupations: &OccupationLexicon,
    stereotypes: &StereotypeLexicon,
) -> Result<Box<dyn TranslationBackend>, RunError> {
    let inner: Box<dyn TranslationBackend> = match &cfg.backend {
        BackendSpec::Mock(m) => {
            let mut m = m.clone();
            m.occupations = occupations.clone();
            for occ in occupations.occupations() {
                let g = match stereotypes.classify(occ) {
                    StereotypeClass::StrongMale | StereotypeClass::WeakMale => Gender::Male,
                    StereotypeClass::StrongFemale | StereotypeClass::WeakFemale => Gender::Female,
                    StereotypeClass::Unclassified => continue,
                };
                m.bias.entry(occ.to_string()).or_insert(g);
            }
            Box::new(MockTranslator::new(m))
        }
        BackendSpec::Http { url, timeout_ms, max_batch } => {
            Box::new(HttpTranslator::new(url, Duration::from_millis(*timeout_ms)).with_max_batch(*max_batch))
        }
        BackendSpec::Subprocess { argv, timeout_ms } => {
            Box::new(SubprocessTranslator::new(argv.clone(), Duration::from_millis(*timeout_ms))?)
        }
    };
    if !cfg.cache {
        return Ok(inner);
    }
    Ok(Box::new(CachedBackend::new(inner, cache_for(cfg))))
}

/// The cache directory: `CTXDEBIAS_CACHE_DIR`, else `cache_dir` from the
/// config, else `.ctxdebias-cache` next to the config.
pub fn cache_for(cfg: &RunConfig) -> DiskCache {
    let fallback = cfg
        .cache_dir
        .as_ref()
        .map(|p| cfg.resolve(p))
        .unwrap_or_else(|| cfg.resolve(Path::new(".ctxdebias-cache")));
    DiskCache::from_env(Some(&fallback))
}

fn prune(cfg: &RunConfig, res: &Resources) -> Result<TemplateBank, RunError> {
    let pair = LangPair::new(&cfg.src_lang, &cfg.tgt_lang);
    Ok(template::prune_bank(
        &res.relevant,
        res.backend.as_ref(),
        &pair,
        res.tagger.as_ref(),
        &cfg.bank.probe_occupations,
    )?)
}

fn engine_config(cfg: &RunConfig) -> EngineConfig {
    let mut e = EngineConfig::new(EngineSettings::new(
        LangPair::new(&cfg.src_lang, &cfg.tgt_lang),
        cfg.delimiter,
        cfg.position,
    ))
    .with_workers(cfg.workers);
    e.batch_size = cfg.batch_size;
    e
}

pub fn load_samples(cfg: &RunConfig, stereotypes: &StereotypeLexicon) -> Result<LoadReport, RunError> {
    let spec = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("no [dataset] configured".into()))?;
    let format = match spec.format {
        DatasetFormatName::Tsv => DatasetFormat::Tsv { columns: spec.columns },
        DatasetFormatName::Jsonl => DatasetFormat::Jsonl,
    };
    let mut report = corpus::load_dataset(&cfg.resolve(&spec.path), &format, spec.mode, &spec.tag, stereotypes)?;
    if spec.format == DatasetFormatName::Jsonl {
        for s in &mut report.samples {
            if s.stereotype_class == StereotypeClass::Unclassified {
                s.stereotype_class = stereotypes.classify(&s.occupation);
            }
        }
    }
    Ok(report)
}

/// Result of [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: MetricsReport,
    pub files: Vec<PathBuf>,
    /// 0, or 2 when the error rate exceeded the threshold.
    pub exit_code: i32,
}

fn base_report(cfg: &RunConfig, samples: usize, templates: usize) -> MetricsReport {
    MetricsReport {
        strategy: cfg.strategy.name().into(),
        lang_pair: format!("{}-{}", cfg.src_lang, cfg.tgt_lang),
        delimiter: cfg.delimiter.name().into(),
        position: cfg.position.name().into(),
        seed: cfg.seed,
        samples,
        templates,
        ..Default::default()
    }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum MatrixRecord<'a> {
    Baseline {
        #[serde(flatten)]
        row: &'a engine::BaselineRow,
    },
    Cell {
        sample_id: &'a str,
        template_id: &'a str,
        #[serde(flatten)]
        cell: &'a engine::Cell,
    },
}

fn matrix_jsonl(m: &ApplicationMatrix) -> String {
    let baselines = m.baselines.iter().map(|row| MatrixRecord::Baseline { row });
    let cells = m.cells.iter().map(|cell| MatrixRecord::Cell {
        sample_id: &m.baselines[cell.sample].sample_id,
        template_id: &m.template_ids[cell.template],
        cell,
    });
    jsonl(baselines.chain(cells))
}

fn gold(samples: &[Sample]) -> Vec<Gender> {
    samples.iter().map(|s| s.gold_gender).collect()
}

fn occupation_keys(samples: &[Sample]) -> Vec<String> {
    samples.iter().map(|s| s.occupation.clone()).collect()
}

fn baseline_accuracy(m: &ApplicationMatrix, samples: &[Sample]) -> Result<Stat, MetricsError> {
    let pred: Vec<Gender> = m.baselines.iter().map(|b| b.gender).collect();
    let keys = occupation_keys(samples);
    metrics::accuracy(&pred, &gold(samples), Some(&keys[..]))
}

fn f1_percent(pred: &[Gender], gold: &[Gender]) -> Result<(f64, f64), MetricsError> {
    let (m, f) = metrics::f1_by_gender(pred, gold)?;
    Ok((100.0 * m, 100.0 * f))
}

const UNKNOWN_NOTE: &str = "unknown predictions, split failures and failed cells count as incorrect";

/// Executes the configured strategy and writes the report files.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    cfg.validate_for_run()?;
    let res = Resources::load(cfg)?;
    let (report, artifacts) = match cfg.strategy {
        Strategy::BleuDelimiters => run_bleu(cfg, &res)?,
        strategy => {
            let loaded = load_samples(cfg, &res.stereotypes)?;
            if loaded.samples.is_empty() {
                return Err(ConfigError::Invalid("dataset has no usable samples".into()).into());
            }
            let (mut report, artifacts) = match strategy {
                Strategy::Greedy => run_greedy_strategy(cfg, &res, &loaded.samples)?,
                Strategy::AllTemplates | Strategy::Bootstrap => run_sweep(cfg, &res, &loaded.samples)?,
                Strategy::Counterfactual => run_counterfactual(cfg, &res, &loaded.samples)?,
                Strategy::IrrelevantControl => run_irrelevant(cfg, &res, &loaded.samples)?,
                Strategy::BleuDelimiters => unreachable!(),
            };
            if loaded.dropped_neutral > 0 || !loaded.errors.is_empty() {
                report.notes.push(format!(
                    "dataset rows: {} loaded, {} neutral dropped, {} malformed skipped",
                    loaded.samples.len(),
                    loaded.dropped_neutral,
                    loaded.errors.len()
                ));
            }
            (report, artifacts)
        }
    };

    let out = cfg.out_path();
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let mut files = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<(), RunError> {
        let path = out.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        files.push(path);
        Ok(())
    };
    write("report.json", &report.to_json())?;
    write("report.csv", &report.to_csv())?;
    write("report.txt", &report.to_text())?;
    for (name, body) in &artifacts {
        write(name, body)?;
    }
    let exit_code = if report.error_rate > cfg.error_threshold { 2 } else { 0 };
    Ok(RunSummary {
        report,
        files,
        exit_code,
    })
}

type Artifacts = Vec<(String, String)>;

fn run_greedy_strategy(cfg: &RunConfig, res: &Resources, samples: &[Sample]) -> Result<(MetricsReport, Artifacts), RunError> {
    let bank = res.bank(cfg)?;
    let outcomes = engine::run_greedy(samples, &bank, res.backend.as_ref(), &engine_config(cfg), res.tagger.as_ref());
    let gold = gold(samples);
    let keys = occupation_keys(samples);
    let baseline: Vec<Gender> = outcomes.iter().map(|o| o.baseline_gender).collect();
    let finals: Vec<Gender> = outcomes.iter().map(DebiasOutcome::scored_gender).collect();

    let mut r = base_report(cfg, samples.len(), bank.len());
    r.a = Some(metrics::accuracy(&baseline, &gold, Some(&keys[..]))?);
    r.a_c = Some(metrics::accuracy::<u8>(&finals, &gold, None)?.mean);
    let (m, f) = f1_percent(&finals, &gold)?;
    r.f1_male = Some(m);
    r.f1_female = Some(f);
    let statuses = metrics::count_by(outcomes.iter().map(status_name));
    r.status_counts = statuses;
    r.errors = outcomes.iter().filter(|o| o.error.is_some()).count();
    r.error_rate = r.errors as f64 / outcomes.len() as f64;
    r.notes.push(UNKNOWN_NOTE.into());
    r.notes.push("f1 is computed on the de-biased outputs".into());
    Ok((r, vec![("outcomes.jsonl".into(), jsonl(&outcomes))]))
}

fn status_name(o: &DebiasOutcome) -> String {
    serde_json::to_value(o.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn matrix_error_rate(m: &ApplicationMatrix) -> (usize, f64) {
    let errors = m.error_count();
    let units = m.cells.len() + m.baselines.len();
    (errors, errors as f64 / units.max(1) as f64)
}

fn run_sweep(cfg: &RunConfig, res: &Resources, samples: &[Sample]) -> Result<(MetricsReport, Artifacts), RunError> {
    let bank = res.bank(cfg)?;
    let m = apply_all(samples, &bank, res.backend.as_ref(), &engine_config(cfg), res.tagger.as_ref(), SignalMode::CorrectGender);
    let gold = gold(samples);
    let mut r = base_report(cfg, samples.len(), bank.len());
    r.a = Some(baseline_accuracy(&m, samples)?);
    let all: Vec<usize> = (0..bank.len()).collect();
    r.a_c = Some(metrics::accuracy::<u8>(&m.greedy_replay(&all), &gold, None)?.mean);
    r.a_all = Some(metrics::average_accuracy(&m)?);
    if let Some(c) = metrics::coverage(&m)? {
        r.c_u = Some(c.upper);
        r.c_l = Some(c.lower);
        r.biased = Some(c.biased);
    } else {
        r.notes.push("no biased samples: C_U and C_L undefined".into());
    }
    let baseline: Vec<Gender> = m.baselines.iter().map(|b| b.gender).collect();
    let (fm, ff) = f1_percent(&baseline, &gold)?;
    r.f1_male = Some(fm);
    r.f1_female = Some(ff);

    let per_template = metrics::per_template_accuracy(&m)?;
    let feature = |f: fn(&template::TemplateFeatures) -> Option<f64>| -> Result<Option<f64>, MetricsError> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = bank
            .iter()
            .zip(&per_template)
            .filter_map(|(t, acc)| f(&t.features).map(|x| (x, *acc)))
            .unzip();
        if xs.len() < 2 {
            return Ok(None);
        }
        metrics::pearson(&xs, &ys)
    };
    r.correlations.insert("l".into(), feature(|f| Some(f.length as f64))?);
    r.correlations.insert("s".into(), feature(|f| Some(f.signals as f64))?);
    r.correlations.insert("d".into(), feature(|f| f.distance.map(|d| d as f64))?);

    let classified: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].stereotype_class != StereotypeClass::Unclassified)
        .collect();
    if !classified.is_empty() {
        let classes: Vec<StereotypeClass> = classified.iter().map(|&i| samples[i].stereotype_class).collect();
        let g: Vec<Gender> = classified.iter().map(|&i| gold[i]).collect();
        let without: Vec<Gender> = classified.iter().map(|&i| baseline[i]).collect();
        let with: Vec<Vec<Gender>> = classified
            .iter()
            .map(|&i| m.row(i).iter().map(|c| c.gender).collect())
            .collect();
        r.deltas = metrics::stereotype_delta(&classes, &g, &without, &with)?
            .into_iter()
            .map(|(k, v)| (k.as_str().to_string(), v))
            .collect();
    }

    if cfg.strategy == Strategy::Bootstrap {
        r.bootstrap = metrics::bootstrap_subsets(&m, &cfg.bootstrap.sizes, cfg.bootstrap.n_boot, cfg.seed)
            .map_err(|e| match e {
                MetricsError::BankTooSmall { .. } => RunError::Config(ConfigError::Invalid(e.to_string())),
                other => other.into(),
            })?;
    }
    (r.errors, r.error_rate) = matrix_error_rate(&m);
    r.notes.push(UNKNOWN_NOTE.into());
    r.notes.push("C_U and C_L count a cell as correct when it matches the detected source gender".into());
    r.notes.push("f1 is computed on the context-free translations".into());
    Ok((r, vec![("matrix.jsonl".into(), matrix_jsonl(&m))]))
}

fn run_counterfactual(cfg: &RunConfig, res: &Resources, samples: &[Sample]) -> Result<(MetricsReport, Artifacts), RunError> {
    let bank = res.bank(cfg)?;
    let m = apply_all(samples, &bank, res.backend.as_ref(), &engine_config(cfg), res.tagger.as_ref(), SignalMode::Counterfactual);
    let mut r = base_report(cfg, samples.len(), bank.len());
    r.a = Some(baseline_accuracy(&m, samples)?);
    match metrics::css(&m) {
        Ok(c) => {
            r.bins = Some(metrics::sensitivity_bins(&c.per_sample));
            r.css = Some(Stat {
                mean: c.mean,
                std: Some(c.std),
            });
        }
        Err(MetricsError::MissingBaseline(id)) => r.notes.push(format!("CSS undefined: baseline missing for {id}")),
        Err(e) => return Err(e.into()),
    }
    (r.errors, r.error_rate) = matrix_error_rate(&m);
    r.notes.push("CSS compares every cell with the context-free target gender".into());
    Ok((r, vec![("matrix.jsonl".into(), matrix_jsonl(&m))]))
}

fn run_irrelevant(cfg: &RunConfig, res: &Resources, samples: &[Sample]) -> Result<(MetricsReport, Artifacts), RunError> {
    let bank = &res.irrelevant;
    let m = apply_all(samples, bank, res.backend.as_ref(), &engine_config(cfg), res.tagger.as_ref(), SignalMode::IrrelevantControl);
    let mut r = base_report(cfg, samples.len(), bank.len());
    r.a = Some(baseline_accuracy(&m, samples)?);
    r.a_all = Some(metrics::average_accuracy(&m)?);
    (r.errors, r.error_rate) = matrix_error_rate(&m);
    r.notes.push("a_all is measured with gender-irrelevant contexts".into());
    r.notes.push(UNKNOWN_NOTE.into());
    Ok((r, vec![("matrix.jsonl".into(), matrix_jsonl(&m))]))
}

/// First occupation of the lexicon mentioned in `text`, preferring longer
/// phrases at the same position.
pub fn find_occupation(text: &str, occupations: &OccupationLexicon) -> Option<String> {
    let words = text::words(text);
    let mut phrases: Vec<(&str, Vec<String>)> = occupations.occupations().map(|o| (o, text::phrase_words(o))).collect();
    phrases.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));
    (0..words.len()).find_map(|i| {
        phrases.iter().find_map(|(occ, p)| {
            (i + p.len() <= words.len() && p.iter().zip(&words[i..]).all(|(a, w)| *a == w.lower)).then(|| occ.to_string())
        })
    })
}

#[derive(Serialize)]
struct BleuRecord<'a> {
    delimiter: &'a str,
    source: &'a str,
    template_id: Option<&'a str>,
    hypothesis: &'a str,
    split_failed: bool,
}

fn run_bleu(cfg: &RunConfig, res: &Resources) -> Result<(MetricsReport, Artifacts), RunError> {
    let spec = cfg.parallel.as_ref().expect("validated");
    let filter: Option<Vec<String>> = spec
        .filter_occupations
        .then(|| res.occupations.occupations().map(str::to_string).collect());
    let pairs = corpus::load_parallel(&cfg.resolve(&spec.path), filter.as_deref())?;
    if pairs.is_empty() {
        return Err(ConfigError::Invalid("parallel corpus has no usable pairs".into()).into());
    }
    let bank = res.bank(cfg)?;
    let limit = spec.contexts_per_sentence.unwrap_or(bank.len()).min(bank.len());
    let lang = LangPair::new(&cfg.src_lang, &cfg.tgt_lang);
    let references: Vec<String> = pairs.iter().map(|p| p.reference.clone()).collect();
    let backend = res.backend.as_ref();
    let batch = |texts: Vec<String>| backend::translate_chunked(backend, texts, &lang, cfg.batch_size);

    let mut r = base_report(cfg, pairs.len(), limit);
    r.delimiter = spec.delimiters.iter().map(|d| d.name()).collect::<Vec<_>>().join("|");
    let mut records = String::new();
    let mut failures = 0usize;
    let mut units = pairs.len();

    let original = batch(pairs.iter().map(|p| p.source.clone()).collect());
    let original: Vec<String> = original?;
    r.bleu.insert("original".into(), metrics::corpus_bleu(&original, &references)?);

    // contexts per pair: (template id, rendered context); empty when the
    // sentence has no detectable occupation or gender
    let contexts: Vec<Vec<(String, String)>> = pairs
        .iter()
        .map(|p| {
            let Some(occ) = find_occupation(&p.source, &res.occupations) else {
                return Ok(Vec::new());
            };
            let g = res.tagger.source_gender(&p.source, &occ).unwrap_or(Gender::Unknown);
            bank.iter()
                .take(limit)
                .filter(|t| g.is_known() || t.kind == template::TemplateKind::Irrelevant)
                .map(|t| Ok((t.id.clone(), t.render(&occ, g, bank.placeholders())?)))
                .collect::<Result<Vec<_>, BankError>>()
        })
        .collect::<Result<_, _>>()?;

    for &delim in &spec.delimiters {
        let mut hyps = Vec::new();
        let mut refs = Vec::new();
        let mut composed = Vec::new();
        let mut slots = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            if contexts[i].is_empty() {
                hyps.push(Some(original[i].clone()));
                refs.push(references[i].clone());
                slots.push((i, None));
                continue;
            }
            for (tid, ctx) in &contexts[i] {
                match compose(&p.source, ctx, delim, cfg.position) {
                    Ok(c) => {
                        composed.push((hyps.len(), c.text));
                        hyps.push(None);
                    }
                    Err(_) => hyps.push(Some(String::new())),
                }
                refs.push(references[i].clone());
                slots.push((i, Some(tid.as_str())));
            }
        }
        units += hyps.len();
        let outputs = batch(composed.iter().map(|(_, t)| t.clone()).collect())?;
        let mut failed = vec![false; hyps.len()];
        for ((slot, _), raw) in composed.iter().zip(outputs) {
            hyps[*slot] = Some(match strip(&raw, delim, cfg.position) {
                Ok(s) => s,
                Err(_) => {
                    failed[*slot] = true;
                    String::new()
                }
            });
        }
        let hyps: Vec<String> = hyps.into_iter().map(|h| h.unwrap_or_default()).collect();
        let n_failed = failed.iter().filter(|f| **f).count();
        failures += n_failed;
        r.bleu.insert(delim.name().into(), metrics::corpus_bleu(&hyps, &refs)?);
        r.split_failure_rate.insert(delim.name().into(), n_failed as f64 / hyps.len() as f64);
        for (k, (i, tid)) in slots.iter().enumerate() {
            records.push_str(
                &serde_json::to_string(&BleuRecord {
                    delimiter: delim.name(),
                    source: &pairs[*i].source,
                    template_id: *tid,
                    hypothesis: &hyps[k],
                    split_failed: failed[k],
                })
                .expect("record serializes"),
            );
            records.push('\n');
        }
    }
    r.errors = 0;
    r.error_rate = 0.0;
    r.notes.push(format!(
        "split failures score as empty hypotheses ({failures} of {} context applications)",
        units - pairs.len()
    ));
    Ok((r, vec![("bleu.jsonl".into(), records)]))
}

mod backend {
    use super::*;

    /// Translates in chunks of `batch` texts through the length-checked
    /// entry point.
    pub fn translate_chunked(
        backend: &dyn TranslationBackend,
        texts: Vec<String>,
        pair: &LangPair,
        batch: usize,
    ) -> Result<Vec<String>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(batch.max(1)) {
            out.extend(crate::backend::translate_batch(
                backend,
                &TranslationRequest::new(chunk.to_vec(), pair.clone()),
            )?);
        }
        Ok(out)
    }
}

/// Greedy search on one ad-hoc sentence. The occupation is detected from
/// the lexicon when not given.
pub fn cmd_translate(cfg: &RunConfig, sentence: &str, occupation: Option<&str>) -> Result<DebiasOutcome, RunError> {
    let res = Resources::load(cfg)?;
    let occupation = match occupation {
        Some(o) => {
            let o = o.trim().to_lowercase();
            if !res.occupations.contains(&o) {
                return Err(RunError::Input(format!("occupation `{o}` is not in the occupation lexicon")));
            }
            o
        }
        None => find_occupation(sentence, &res.occupations)
            .ok_or_else(|| RunError::Input("no known occupation found in the sentence".into()))?,
    };
    let mut sample = Sample::new("adhoc", sentence.trim(), &occupation, Gender::Male, "adhoc")?;
    sample.gold_gender = Gender::Unknown;
    let bank = res.bank(cfg)?;
    let settings = engine_config(cfg).settings;
    Ok(debias_greedy(&sample, &bank, res.backend.as_ref(), &settings, res.tagger.as_ref()))
}

/// Renders an outcome for the terminal.
pub fn describe_outcome(o: &DebiasOutcome) -> String {
    let mut lines = vec![
        format!("status: {}", status_name(o)),
        format!("occupation: {}", o.occupation),
        format!("source gender: {}", o.source_gender),
        format!(
            "baseline: {} [{}]",
            o.baseline_translation.as_deref().unwrap_or("-"),
            o.baseline_gender
        ),
    ];
    if let Some(t) = &o.chosen_template {
        lines.push(format!("template: {t}"));
    }
    lines.push(format!(
        "final: {} [{}]",
        o.final_translation.as_deref().unwrap_or("-"),
        o.final_gender
    ));
    lines.push(format!("translation calls: {}", o.translation_calls));
    if let Some(e) = &o.error {
        lines.push(format!("error: {e}"));
    }
    lines.join("\n")
}

/// Prunes the relevant bank and returns it.
pub fn cmd_bank_prune(cfg: &RunConfig) -> Result<TemplateBank, RunError> {
    let res = Resources::load(cfg)?;
    prune(cfg, &res)
}

/// Loads and validates a bank file; returns per-template summary lines.
pub fn cmd_bank_validate(path: &Path, placeholders: Option<&Path>) -> Result<Vec<String>, RunError> {
    let table = match placeholders {
        Some(p) => PlaceholderTable::load(p)?,
        None => PlaceholderTable::builtin(),
    };
    let src = fs::read_to_string(path).map_err(io_err(path))?;
    let bank = TemplateBank::parse(&src, table)?;
    let mut out: Vec<String> = bank
        .iter()
        .map(|t| {
            let d = t.features.distance.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
            format!("{}\t{}\tl={} s={} d={}", t.id, t.kind, t.features.length, t.features.signals, d)
        })
        .collect();
    let kinds = metrics::count_by(bank.iter().map(|t| t.kind.to_string()));
    let kinds: BTreeMap<_, _> = kinds.into_iter().collect();
    out.push(format!(
        "{} templates ({}), sha256 {}",
        bank.len(),
        kinds.iter().map(|(k, v)| format!("{v} {k}")).collect::<Vec<_>>().join(", "),
        bank.provenance().sha256
    ));
    Ok(out)
}

pub fn cmd_cache_stats(cache: &DiskCache) -> Result<String, RunError> {
    let s = cache.stats().map_err(io_err(cache.dir()))?;
    Ok(format!("{} entries, {} bytes in {}", s.entries, s.bytes, cache.dir().display()))
}

pub fn cmd_cache_clear(cache: &DiskCache) -> Result<String, RunError> {
    cache.clear().map_err(io_err(cache.dir()))?;
    Ok(format!("cleared {}", cache.dir().display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_longest_occupation_first() {
        let occ = OccupationLexicon::builtin();
        assert_eq!(find_occupation("The construction worker ate.", &occ).as_deref(), Some("construction worker"));
        assert_eq!(find_occupation("The Nurse ate.", &occ).as_deref(), Some("nurse"));
        assert_eq!(find_occupation("Dogs bark.", &occ), None);
    }

    fn write_fixture(dir: &Path, strategy: &str) -> RunConfig {
        fs::write(
            dir.join("d.tsv"),
            "male\t1\tThe nurse said he was tired.\tnurse\nfemale\t1\tThe nurse said she was tired.\tnurse\n",
        )
        .unwrap();
        let toml = format!(
            "strategy = \"{strategy}\"\ncache = false\n[backend]\nkind = \"mock\"\n[dataset]\npath = \"d.tsv\"\n"
        );
        RunConfig::from_toml(&toml, dir).unwrap()
    }

    #[test]
    fn greedy_run_writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_fixture(dir.path(), "greedy");
        let s = cmd_run(&cfg).unwrap();
        assert_eq!(s.exit_code, 0);
        assert_eq!(s.report.a.unwrap().mean, 50.0);
        assert_eq!(s.report.a_c, Some(100.0));
        for f in ["report.json", "report.csv", "report.txt", "outcomes.jsonl"] {
            assert!(dir.path().join("out").join(f).exists(), "{f}");
        }
    }

    #[test]
    fn translate_rejects_unknown_occupation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_fixture(dir.path(), "greedy");
        assert!(matches!(cmd_translate(&cfg, "The wizard slept.", Some("wizard")), Err(RunError::Input(_))));
        let o = cmd_translate(&cfg, "The nurse said he was tired.", None).unwrap();
        assert_eq!(o.status, engine::OutcomeStatus::Corrected);
        assert!(describe_outcome(&o).contains("template: rel-01"));
    }
}
