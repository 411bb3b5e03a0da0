//! Greedy template search and full template sweeps.
//!
//! [`debias_greedy`] translates a sample, and when the detected target
//! gender disagrees with the detected source gender it tries templates in
//! bank order until one fixes the payload translation. [`apply_all`] runs
//! every template on every sample and records the grid in an
//! [`ApplicationMatrix`]; all corpus metrics are computed from it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{self, BackendError, LangPair, TranslationBackend, TranslationRequest};
use crate::context::{compose, strip, Delimiter, Position, SplitFailure};
use crate::corpus::Sample;
use crate::gender::Gender;
use crate::tagger::GenderTagger;
use crate::template::TemplateBank;

/// How a context is attached to a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSettings {
    pub pair: LangPair,
    pub delimiter: Delimiter,
    pub position: Position,
}

impl EngineSettings {
    pub fn new(pair: LangPair, delimiter: Delimiter, position: Position) -> Self {
        Self {
            pair,
            delimiter,
            position,
        }
    }
}

/// Settings plus dispatch parameters for corpus-level runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub settings: EngineSettings,
    /// Worker threads; 1 runs everything on the calling thread.
    pub workers: usize,
    /// Texts per backend request.
    pub batch_size: usize,
}

impl EngineConfig {
    pub fn new(settings: EngineSettings) -> Self {
        Self {
            settings,
            workers: 1,
            batch_size: 32,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    AlreadyCorrect,
    Corrected,
    Uncorrected,
    Untaggable,
    /// A backend or rendering error aborted the sample.
    Error,
}

/// One template tried by the greedy search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub template_id: String,
    pub composed: Option<String>,
    pub raw_output: Option<String>,
    pub stripped: Option<String>,
    pub split_failure: Option<SplitFailure>,
    pub gender: Gender,
    /// Set when the context could not be composed with the sentence.
    pub compose_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebiasOutcome {
    pub sample_id: String,
    pub occupation: String,
    pub gold_gender: Gender,
    pub source_gender: Gender,
    pub baseline_translation: Option<String>,
    pub baseline_gender: Gender,
    pub status: OutcomeStatus,
    pub chosen_template: Option<String>,
    /// The corrected payload translation, or the baseline otherwise.
    pub final_translation: Option<String>,
    pub final_gender: Gender,
    pub attempts: Vec<Attempt>,
    pub translation_calls: usize,
    pub error: Option<String>,
}

impl DebiasOutcome {
    /// Gender used to score the de-biased output. Untaggable and failed
    /// samples score as `Unknown`.
    pub fn scored_gender(&self) -> Gender {
        match self.status {
            OutcomeStatus::Untaggable | OutcomeStatus::Error => Gender::Unknown,
            _ => self.final_gender,
        }
    }

    /// `g_X` known and different from the baseline target gender.
    pub fn is_biased(&self) -> bool {
        self.source_gender.is_known() && self.source_gender != self.baseline_gender
    }
}

fn translate_one(backend: &dyn TranslationBackend, text: &str, pair: &LangPair) -> Result<String, BackendError> {
    let mut out = backend::translate_batch(backend, &TranslationRequest::single(text, pair.clone()))?;
    Ok(out.remove(0))
}

/// Runs the greedy search on one sample. Backend errors are recorded in the
/// outcome with status `Error`, never returned.
pub fn debias_greedy(
    sample: &Sample,
    bank: &TemplateBank,
    backend: &dyn TranslationBackend,
    settings: &EngineSettings,
    tagger: &dyn GenderTagger,
) -> DebiasOutcome {
    let mut outcome = DebiasOutcome {
        sample_id: sample.id.clone(),
        occupation: sample.occupation.clone(),
        gold_gender: sample.gold_gender,
        source_gender: Gender::Unknown,
        baseline_translation: None,
        baseline_gender: Gender::Unknown,
        status: OutcomeStatus::Error,
        chosen_template: None,
        final_translation: None,
        final_gender: Gender::Unknown,
        attempts: Vec::new(),
        translation_calls: 0,
        error: None,
    };
    let tgt = settings.pair.tgt.as_str();

    outcome.translation_calls += 1;
    let baseline = match translate_one(backend, &sample.text, &settings.pair) {
        Ok(t) => t,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    outcome.baseline_gender = tagger.target_gender(&baseline, &sample.occupation, tgt);
    outcome.baseline_translation = Some(baseline.clone());
    outcome.final_translation = Some(baseline);
    outcome.final_gender = outcome.baseline_gender;

    outcome.source_gender = match tagger.source_gender(&sample.text, &sample.occupation) {
        Ok(g) => g,
        Err(e) => {
            log::debug!("source tagging failed for {}: {e}", sample.id);
            Gender::Unknown
        }
    };
    let g_x = outcome.source_gender;
    if !g_x.is_known() {
        outcome.status = OutcomeStatus::Untaggable;
        return outcome;
    }
    if g_x == outcome.baseline_gender {
        outcome.status = OutcomeStatus::AlreadyCorrect;
        return outcome;
    }

    for template in bank.iter() {
        let context = match template.render(&sample.occupation, g_x, bank.placeholders()) {
            Ok(c) => c,
            Err(e) => {
                outcome.status = OutcomeStatus::Error;
                outcome.error = Some(e.to_string());
                return outcome;
            }
        };
        let mut attempt = Attempt {
            template_id: template.id.clone(),
            composed: None,
            raw_output: None,
            stripped: None,
            split_failure: None,
            gender: Gender::Unknown,
            compose_error: None,
        };
        let composed = match compose(&sample.text, &context, settings.delimiter, settings.position) {
            Ok(c) => c,
            Err(e) => {
                attempt.compose_error = Some(e.to_string());
                outcome.attempts.push(attempt);
                continue;
            }
        };
        outcome.translation_calls += 1;
        let raw = match translate_one(backend, &composed.text, &settings.pair) {
            Ok(t) => t,
            Err(e) => {
                attempt.composed = Some(composed.text);
                outcome.attempts.push(attempt);
                outcome.status = OutcomeStatus::Error;
                outcome.error = Some(e.to_string());
                return outcome;
            }
        };
        attempt.composed = Some(composed.text);
        match strip(&raw, settings.delimiter, settings.position) {
            Ok(payload) => {
                attempt.gender = tagger.target_gender(&payload, &sample.occupation, tgt);
                attempt.stripped = Some(payload);
            }
            Err(f) => attempt.split_failure = Some(f),
        }
        attempt.raw_output = Some(raw);
        let success = attempt.gender == g_x;
        let stripped = attempt.stripped.clone();
        outcome.attempts.push(attempt);
        if success {
            outcome.status = OutcomeStatus::Corrected;
            outcome.chosen_template = Some(template.id.clone());
            outcome.final_translation = stripped;
            outcome.final_gender = g_x;
            return outcome;
        }
    }
    outcome.status = OutcomeStatus::Uncorrected;
    outcome
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Greedy search over a corpus. Output order follows `samples`.
pub fn run_greedy(
    samples: &[Sample],
    bank: &TemplateBank,
    backend: &dyn TranslationBackend,
    cfg: &EngineConfig,
    tagger: &dyn GenderTagger,
) -> Vec<DebiasOutcome> {
    let workers = if backend.supports_concurrency() { cfg.workers } else { 1 };
    if workers <= 1 {
        return samples
            .iter()
            .map(|s| debias_greedy(s, bank, backend, &cfg.settings, tagger))
            .collect();
    }
    pool(workers).install(|| {
        samples
            .par_iter()
            .map(|s| debias_greedy(s, bank, backend, &cfg.settings, tagger))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Each template rendered with the detected source gender.
    CorrectGender,
    /// Each template rendered once with each binary gender.
    Counterfactual,
    /// Templates from an irrelevant bank, no gender argument.
    IrrelevantControl,
}

impl SignalMode {
    pub fn columns(self) -> usize {
        match self {
            SignalMode::Counterfactual => 2,
            _ => 1,
        }
    }
}

/// Plain translation of a sample with its detected genders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub sample_id: String,
    pub translation: Option<String>,
    pub gender: Gender,
    pub source_gender: Gender,
    pub gold_gender: Gender,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub sample: usize,
    pub template: usize,
    /// Gender the context was rendered with; `Unknown` for irrelevant
    /// contexts and for untaggable samples.
    pub signal: Gender,
    pub stripped: Option<String>,
    pub gender: Gender,
    pub split_failed: bool,
    pub error: Option<String>,
}

impl Cell {
    fn empty(sample: usize, template: usize, signal: Gender) -> Self {
        Self {
            sample,
            template,
            signal,
            stripped: None,
            gender: Gender::Unknown,
            split_failed: false,
            error: None,
        }
    }
}

/// Dense `samples × templates × columns` grid plus one baseline per sample.
/// Cells are stored sample-major, then template, then column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicationMatrix {
    pub mode: SignalMode,
    pub template_ids: Vec<String>,
    pub baselines: Vec<BaselineRow>,
    pub cells: Vec<Cell>,
}

impl ApplicationMatrix {
    pub fn n_samples(&self) -> usize {
        self.baselines.len()
    }

    pub fn n_templates(&self) -> usize {
        self.template_ids.len()
    }

    pub fn columns(&self) -> usize {
        self.mode.columns()
    }

    pub fn cell(&self, sample: usize, template: usize, column: usize) -> &Cell {
        let c = self.columns();
        &self.cells[(sample * self.n_templates() + template) * c + column]
    }

    /// All cells of one sample, template-major.
    pub fn row(&self, sample: usize) -> &[Cell] {
        let width = self.n_templates() * self.columns();
        &self.cells[sample * width..(sample + 1) * width]
    }

    pub fn error_count(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
            + self.baselines.iter().filter(|b| b.error.is_some()).count()
    }

    pub fn split_failures(&self) -> usize {
        self.cells.iter().filter(|c| c.split_failed).count()
    }

    /// Gender cells for a template subset in `subset` order, used to replay
    /// the greedy search without new translations.
    pub fn greedy_replay(&self, subset: &[usize]) -> Vec<Gender> {
        assert_eq!(self.mode, SignalMode::CorrectGender, "replay needs a correct-gender matrix");
        (0..self.n_samples())
            .map(|s| {
                let b = &self.baselines[s];
                let g_x = b.source_gender;
                if b.error.is_some() || !g_x.is_known() {
                    return Gender::Unknown;
                }
                if b.gender == g_x {
                    return b.gender;
                }
                if subset.iter().any(|&t| self.cell(s, t, 0).gender == g_x) {
                    g_x
                } else {
                    b.gender
                }
            })
            .collect()
    }
}

struct Job {
    cell: usize,
    text: String,
}

/// Translates `texts` in batches over the worker pool. A failed batch is
/// retried one text at a time so an error only marks the offending texts.
fn dispatch(
    texts: &[String],
    backend: &dyn TranslationBackend,
    cfg: &EngineConfig,
) -> Vec<Result<String, BackendError>> {
    let pair = &cfg.settings.pair;
    let run_chunk = |chunk: &[String]| -> Vec<Result<String, BackendError>> {
        let req = TranslationRequest::new(chunk.to_vec(), pair.clone());
        match backend::translate_batch(backend, &req) {
            Ok(out) => out.into_iter().map(Ok).collect(),
            Err(_) if chunk.len() > 1 => chunk.iter().map(|t| translate_one(backend, t, pair)).collect(),
            Err(e) => vec![Err(e)],
        }
    };
    let batch = cfg.batch_size.max(1);
    let workers = if backend.supports_concurrency() { cfg.workers } else { 1 };
    let chunks: Vec<Vec<Result<String, BackendError>>> = if workers <= 1 {
        texts.chunks(batch).map(run_chunk).collect()
    } else {
        pool(workers).install(|| texts.par_chunks(batch).map(run_chunk).collect())
    };
    chunks.into_iter().flatten().collect()
}

/// Sweeps every template of `bank` over every sample.
///
/// In `CorrectGender` mode an untaggable sample gets a row of `Unknown`
/// cells without translation calls.
pub fn apply_all(
    samples: &[Sample],
    bank: &TemplateBank,
    backend: &dyn TranslationBackend,
    cfg: &EngineConfig,
    tagger: &dyn GenderTagger,
    mode: SignalMode,
) -> ApplicationMatrix {
    let settings = &cfg.settings;
    let tgt = settings.pair.tgt.as_str();

    let sources: Vec<String> = samples.iter().map(|s| s.text.clone()).collect();
    let baseline_out = dispatch(&sources, backend, cfg);
    let baselines: Vec<BaselineRow> = samples
        .iter()
        .zip(baseline_out)
        .map(|(s, out)| {
            let source_gender = tagger.source_gender(&s.text, &s.occupation).unwrap_or(Gender::Unknown);
            let (translation, gender, error) = match out {
                Ok(t) => {
                    let g = tagger.target_gender(&t, &s.occupation, tgt);
                    (Some(t), g, None)
                }
                Err(e) => (None, Gender::Unknown, Some(e.to_string())),
            };
            BaselineRow {
                sample_id: s.id.clone(),
                translation,
                gender,
                source_gender,
                gold_gender: s.gold_gender,
                error,
            }
        })
        .collect();

    let columns = mode.columns();
    let mut cells = Vec::with_capacity(samples.len() * bank.len() * columns);
    let mut jobs = Vec::new();
    for (si, sample) in samples.iter().enumerate() {
        for (ti, template) in bank.iter().enumerate() {
            for col in 0..columns {
                let signal = match mode {
                    SignalMode::CorrectGender => baselines[si].source_gender,
                    SignalMode::Counterfactual => Gender::BINARY[col],
                    SignalMode::IrrelevantControl => Gender::Unknown,
                };
                let mut cell = Cell::empty(si, ti, signal);
                if mode == SignalMode::CorrectGender && !signal.is_known() {
                    cells.push(cell);
                    continue;
                }
                let composed = template
                    .render(&sample.occupation, signal, bank.placeholders())
                    .map_err(|e| e.to_string())
                    .and_then(|ctx| {
                        compose(&sample.text, &ctx, settings.delimiter, settings.position).map_err(|e| e.to_string())
                    });
                match composed {
                    Ok(c) => jobs.push(Job {
                        cell: cells.len(),
                        text: c.text,
                    }),
                    Err(e) => cell.error = Some(e),
                }
                cells.push(cell);
            }
        }
    }

    let texts: Vec<String> = jobs.iter().map(|j| j.text.clone()).collect();
    let results = dispatch(&texts, backend, cfg);
    for (job, result) in jobs.iter().zip(results) {
        let cell = &mut cells[job.cell];
        match result {
            Ok(raw) => match strip(&raw, settings.delimiter, settings.position) {
                Ok(payload) => {
                    cell.gender = tagger.target_gender(&payload, &samples[cell.sample].occupation, tgt);
                    cell.stripped = Some(payload);
                }
                Err(_) => cell.split_failed = true,
            },
            Err(e) => cell.error = Some(e.to_string()),
        }
    }

    ApplicationMatrix {
        mode,
        template_ids: bank.iter().map(|t| t.id.clone()).collect(),
        baselines,
        cells,
    }
}
