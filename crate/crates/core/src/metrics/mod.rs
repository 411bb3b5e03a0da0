//! Corpus metrics over engine outputs.
//!
//! Accuracies are percentages in `[0, 100]`; CSS scores and F1 values are
//! fractions in `[0, 1]`. Every standard deviation is a population
//! standard deviation. An `Unknown` prediction never matches gold.

mod bleu;
mod bootstrap;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::StereotypeClass;
use crate::engine::{ApplicationMatrix, SignalMode};
use crate::gender::Gender;

pub use bleu::{corpus_bleu, tokenize, BleuStats};
pub use bootstrap::{bootstrap_subsets, draw_subsets, BootstrapPoint};
pub use report::{MetricsReport, CSV_COLUMNS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("gold labels must be male or female")]
    UnknownGold,
    #[error("matrix has no samples or no templates")]
    EmptyMatrix,
    #[error("expected a {expected:?} matrix, got {got:?}")]
    WrongMode { expected: SignalMode, got: SignalMode },
    #[error("baseline translation missing for sample {0}")]
    MissingBaseline(String),
    #[error("sample {0} has no stereotype class")]
    UnknownStereotypeClass(usize),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("bank has {have} templates, subsets of {need} requested")]
    BankTooSmall { need: usize, have: usize },
}

/// A mean with an optional spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: Option<f64>,
}

/// Population mean and standard deviation. `None` for an empty slice.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn check_lengths(a: usize, b: usize) -> Result<(), MetricsError> {
    if a != b {
        return Err(MetricsError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

fn percent_correct(pred: &[Gender], gold: &[Gender]) -> f64 {
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    100.0 * hits as f64 / pred.len() as f64
}

/// Percent of predictions equal to gold. With `groups`, `std` is the spread
/// of the per-group accuracies.
pub fn accuracy<K: Ord + Clone>(
    predictions: &[Gender],
    gold: &[Gender],
    groups: Option<&[K]>,
) -> Result<Stat, MetricsError> {
    check_lengths(predictions.len(), gold.len())?;
    if gold.iter().any(|g| !g.is_known()) {
        return Err(MetricsError::UnknownGold);
    }
    let mean = percent_correct(predictions, gold);
    let std = match groups {
        None => None,
        Some(keys) => {
            check_lengths(keys.len(), gold.len())?;
            let mut by_group: BTreeMap<K, (usize, usize)> = BTreeMap::new();
            for ((p, g), k) in predictions.iter().zip(gold).zip(keys) {
                let e = by_group.entry(k.clone()).or_default();
                e.0 += usize::from(p == g);
                e.1 += 1;
            }
            let accs: Vec<f64> = by_group.values().map(|&(h, n)| 100.0 * h as f64 / n as f64).collect();
            mean_std(&accs).map(|(_, s)| s)
        }
    };
    Ok(Stat { mean, std })
}

/// Accuracy of each template column over all samples (`A_all` inputs).
pub fn per_template_accuracy(matrix: &ApplicationMatrix) -> Result<Vec<f64>, MetricsError> {
    if matrix.mode == SignalMode::Counterfactual {
        return Err(MetricsError::WrongMode {
            expected: SignalMode::CorrectGender,
            got: matrix.mode,
        });
    }
    if matrix.n_samples() == 0 || matrix.n_templates() == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let gold: Vec<Gender> = matrix.baselines.iter().map(|b| b.gold_gender).collect();
    if gold.iter().any(|g| !g.is_known()) {
        return Err(MetricsError::UnknownGold);
    }
    Ok((0..matrix.n_templates())
        .map(|t| {
            let pred: Vec<Gender> = (0..matrix.n_samples()).map(|s| matrix.cell(s, t, 0).gender).collect();
            percent_correct(&pred, &gold)
        })
        .collect())
}

/// `A_all`: mean and spread of per-template accuracies.
pub fn average_accuracy(matrix: &ApplicationMatrix) -> Result<Stat, MetricsError> {
    let accs = per_template_accuracy(matrix)?;
    let (mean, std) = mean_std(&accs).expect("non-empty");
    Ok(Stat { mean, std: Some(std) })
}

/// Per-sample context sensitivity: the share of cells whose gender differs
/// from the baseline gender. `rows[i]` holds all cells of sample `i`.
pub fn css_scores(baselines: &[Gender], rows: &[Vec<Gender>]) -> Result<Vec<f64>, MetricsError> {
    check_lengths(baselines.len(), rows.len())?;
    rows.iter()
        .zip(baselines)
        .map(|(row, b)| {
            if row.is_empty() {
                return Err(MetricsError::EmptyMatrix);
            }
            Ok(row.iter().filter(|g| *g != b).count() as f64 / row.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CssResult {
    pub per_sample: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// CSS over a counterfactual matrix (`2|T|` cells per sample).
pub fn css(matrix: &ApplicationMatrix) -> Result<CssResult, MetricsError> {
    if matrix.mode != SignalMode::Counterfactual {
        return Err(MetricsError::WrongMode {
            expected: SignalMode::Counterfactual,
            got: matrix.mode,
        });
    }
    if matrix.n_samples() == 0 || matrix.n_templates() == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    if let Some(b) = matrix.baselines.iter().find(|b| b.translation.is_none()) {
        return Err(MetricsError::MissingBaseline(b.sample_id.clone()));
    }
    let baselines: Vec<Gender> = matrix.baselines.iter().map(|b| b.gender).collect();
    let rows: Vec<Vec<Gender>> = (0..matrix.n_samples())
        .map(|s| matrix.row(s).iter().map(|c| c.gender).collect())
        .collect();
    let per_sample = css_scores(&baselines, &rows)?;
    let (mean, std) = mean_std(&per_sample).expect("non-empty");
    Ok(CssResult { per_sample, mean, std })
}

/// Share of biased samples fixed by at least one / by every template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub upper: f64,
    pub lower: f64,
    pub biased: usize,
}

/// `C_U` and `C_L` over a correct-gender matrix. A sample is biased when
/// its source gender is known and differs from the baseline gender; a cell
/// is correct when it matches the source gender, the criterion the greedy
/// search uses. `None` when no sample is biased.
pub fn coverage(matrix: &ApplicationMatrix) -> Result<Option<Coverage>, MetricsError> {
    if matrix.mode != SignalMode::CorrectGender {
        return Err(MetricsError::WrongMode {
            expected: SignalMode::CorrectGender,
            got: matrix.mode,
        });
    }
    if matrix.n_templates() == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let mut biased = 0;
    let mut any = 0;
    let mut all = 0;
    for (s, b) in matrix.baselines.iter().enumerate() {
        if b.error.is_some() || !b.source_gender.is_known() || b.source_gender == b.gender {
            continue;
        }
        biased += 1;
        let row = matrix.row(s);
        any += usize::from(row.iter().any(|c| c.gender == b.source_gender));
        all += usize::from(row.iter().all(|c| c.gender == b.source_gender));
    }
    if biased == 0 {
        return Ok(None);
    }
    Ok(Some(Coverage {
        upper: 100.0 * any as f64 / biased as f64,
        lower: 100.0 * all as f64 / biased as f64,
        biased,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SensitivityBins {
    pub no_change: usize,
    pub less_sensitive: usize,
    pub more_sensitive: usize,
}

/// `0` → no change, `(0, 0.5]` → less sensitive, above → more sensitive.
pub fn sensitivity_bins(scores: &[f64]) -> SensitivityBins {
    let mut bins = SensitivityBins::default();
    for &s in scores {
        debug_assert!((0.0..=1.0).contains(&s), "CSS score {s} out of range");
        if s == 0.0 {
            bins.no_change += 1;
        } else if s <= 0.5 {
            bins.less_sensitive += 1;
        } else {
            bins.more_sensitive += 1;
        }
    }
    bins
}

/// One-vs-rest F1 for the male and female labels. A zero denominator gives
/// an F1 of 0.
pub fn f1_by_gender(predictions: &[Gender], gold: &[Gender]) -> Result<(f64, f64), MetricsError> {
    check_lengths(predictions.len(), gold.len())?;
    if gold.iter().any(|g| !g.is_known()) {
        return Err(MetricsError::UnknownGold);
    }
    let f1 = |label: Gender| {
        let tp = predictions.iter().zip(gold).filter(|(p, g)| **p == label && **g == label).count() as f64;
        let predicted = predictions.iter().filter(|p| **p == label).count() as f64;
        let actual = gold.iter().filter(|g| **g == label).count() as f64;
        if predicted == 0.0 || actual == 0.0 || tp == 0.0 {
            return 0.0;
        }
        let precision = tp / predicted;
        let recall = tp / actual;
        2.0 * precision * recall / (precision + recall)
    };
    Ok((f1(Gender::Male), f1(Gender::Female)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub samples: usize,
    pub a: f64,
    pub a_all: f64,
    pub delta: f64,
}

/// Accuracy without and with context per stereotype class, and
/// `δ = A_all − A`. `with_context[i]` holds every with-context prediction
/// for sample `i` (one per template, or a single greedy output).
pub fn stereotype_delta(
    classes: &[StereotypeClass],
    gold: &[Gender],
    without_context: &[Gender],
    with_context: &[Vec<Gender>],
) -> Result<BTreeMap<StereotypeClass, DeltaRow>, MetricsError> {
    check_lengths(classes.len(), gold.len())?;
    check_lengths(without_context.len(), gold.len())?;
    check_lengths(with_context.len(), gold.len())?;
    if let Some(i) = classes.iter().position(|c| *c == StereotypeClass::Unclassified) {
        return Err(MetricsError::UnknownStereotypeClass(i));
    }
    let mut acc: BTreeMap<StereotypeClass, (usize, usize, usize, usize)> = BTreeMap::new();
    for i in 0..gold.len() {
        let e = acc.entry(classes[i]).or_default();
        e.0 += 1;
        e.1 += usize::from(without_context[i] == gold[i]);
        e.2 += with_context[i].iter().filter(|g| **g == gold[i]).count();
        e.3 += with_context[i].len();
    }
    Ok(acc
        .into_iter()
        .map(|(class, (n, hits, hits_ctx, n_ctx))| {
            let a = 100.0 * hits as f64 / n as f64;
            let a_all = if n_ctx == 0 { a } else { 100.0 * hits_ctx as f64 / n_ctx as f64 };
            (
                class,
                DeltaRow {
                    samples: n,
                    a,
                    a_all,
                    delta: a_all - a,
                },
            )
        })
        .collect())
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Option<f64>, MetricsError> {
    check_lengths(xs.len(), ys.len())?;
    if xs.len() < 2 {
        return Err(MetricsError::EmptyInput);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Average ranks (ties share the mean rank), 1-based.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Option<f64>, MetricsError> {
    check_lengths(xs.len(), ys.len())?;
    pearson(&ranks(xs), &ranks(ys))
}

/// Counts per key, in key order.
pub fn count_by<K: Ord>(keys: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut out = BTreeMap::new();
    for k in keys {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}
