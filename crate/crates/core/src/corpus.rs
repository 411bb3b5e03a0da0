//! Dataset loading into the normalized sample schema.
//!
//! Raw datasets are tab-separated with a configurable [`ColumnMapping`];
//! the internal currency is JSON lines:
//!
//! ```text
//! {"id":"…","text":"…","occupation":"…","occupation_span":[s,e],
//!  "gold_gender":"male","stereotype_class":"strong_female","dataset_tag":"…"}
//! ```
//!
//! Spans are character offsets (Unicode scalar values), end exclusive.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gender::Gender;

const BUILTIN_STEREOTYPES: &str = include_str!("../data/stereotypes.tsv");

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: occupation `{occupation}` not found in sentence")]
    SpanResolution { line: usize, occupation: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StereotypeClass {
    StrongMale,
    StrongFemale,
    WeakMale,
    WeakFemale,
    #[default]
    Unclassified,
}

impl StereotypeClass {
    pub const ALL: [StereotypeClass; 5] = [
        StereotypeClass::StrongMale,
        StereotypeClass::StrongFemale,
        StereotypeClass::WeakMale,
        StereotypeClass::WeakFemale,
        StereotypeClass::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StereotypeClass::StrongMale => "strong_male",
            StereotypeClass::StrongFemale => "strong_female",
            StereotypeClass::WeakMale => "weak_male",
            StereotypeClass::WeakFemale => "weak_female",
            StereotypeClass::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for StereotypeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StereotypeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| format!("unknown stereotype class `{s}`"))
    }
}

/// Occupation → stereotype class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StereotypeLexicon {
    classes: BTreeMap<String, StereotypeClass>,
}

impl StereotypeLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_STEREOTYPES).expect("builtin stereotype table is valid")
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::parse(&read(path)?)
    }

    pub fn parse(src: &str) -> Result<Self, CorpusError> {
        let mut classes = BTreeMap::new();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| CorpusError::Parse { line: i + 1, message };
            let (occ, class) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `occupation<TAB>class`".into()))?;
            let class: StereotypeClass = class.parse().map_err(parse_err)?;
            if classes.insert(occ.trim().to_lowercase(), class).is_some() {
                return Err(parse_err(format!("duplicate occupation `{occ}`")));
            }
        }
        Ok(Self { classes })
    }

    pub fn classify(&self, occupation: &str) -> StereotypeClass {
        self.classes
            .get(&occupation.trim().to_lowercase())
            .copied()
            .unwrap_or(StereotypeClass::Unclassified)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// One evaluation sentence with a single target occupation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub occupation: String,
    pub occupation_span: (usize, usize),
    pub gold_gender: Gender,
    pub stereotype_class: StereotypeClass,
    pub dataset_tag: String,
}

impl Sample {
    /// Builds a sample, resolving the span to the first case-insensitive
    /// occurrence of `occupation`. Fails on an unknown gold gender or a
    /// missing occupation.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        occupation: impl Into<String>,
        gold_gender: Gender,
        dataset_tag: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let text = text.into();
        let occupation = occupation.into();
        if !gold_gender.is_known() {
            return Err(CorpusError::Parse {
                line: 0,
                message: "gold gender must be male or female".into(),
            });
        }
        let occupation_span = find_span(&text, &occupation, None).ok_or_else(|| CorpusError::SpanResolution {
            line: 0,
            occupation: occupation.clone(),
        })?;
        Ok(Self {
            id: id.into(),
            text,
            occupation,
            occupation_span,
            gold_gender,
            stereotype_class: StereotypeClass::Unclassified,
            dataset_tag: dataset_tag.into(),
        })
    }

    pub fn with_stereotype(mut self, class: StereotypeClass) -> Self {
        self.stereotype_class = class;
        self
    }

    /// The text covered by `occupation_span`.
    pub fn span_text(&self) -> String {
        let (s, e) = self.occupation_span;
        self.text.chars().skip(s).take(e.saturating_sub(s)).collect()
    }

    fn validate(&self) -> Result<(), String> {
        if !self.gold_gender.is_known() {
            return Err("gold_gender must be male or female".into());
        }
        let (s, e) = self.occupation_span;
        if s >= e || e > self.text.chars().count() {
            return Err(format!("span [{s},{e}] out of range"));
        }
        if self.span_text().to_lowercase() != self.occupation.to_lowercase() {
            return Err(format!("span [{s},{e}] does not cover `{}`", self.occupation));
        }
        Ok(())
    }
}

/// Character span of a case-insensitive occurrence of `needle`. With a
/// word index hint, the occurrence starting nearest to that whitespace
/// token wins; otherwise the first.
fn find_span(text: &str, needle: &str, word_hint: Option<usize>) -> Option<(usize, usize)> {
    let hay: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let pat: Vec<char> = needle.trim().chars().flat_map(char::to_lowercase).collect();
    // to_lowercase can change lengths for a few scripts; offsets then refer
    // to the lowered text, which only matters outside Latin/Greek/Cyrillic
    if pat.is_empty() || pat.len() > hay.len() {
        return None;
    }
    let is_word = |c: Option<&char>| c.is_none_or(|c| !c.is_alphanumeric());
    let starts: Vec<usize> = (0..=hay.len() - pat.len())
        .filter(|&i| hay[i..i + pat.len()] == pat[..])
        .filter(|&i| is_word(i.checked_sub(1).and_then(|p| hay.get(p))) && is_word(hay.get(i + pat.len())))
        .collect();
    let target = word_hint.and_then(|w| {
        let mut in_word = false;
        let mut count = 0;
        for (i, c) in hay.iter().enumerate() {
            if !c.is_whitespace() && !in_word {
                if count == w {
                    return Some(i);
                }
                count += 1;
            }
            in_word = !c.is_whitespace();
        }
        None
    });
    let start = match target {
        Some(t) => *starts.iter().min_by_key(|&&s| (s.abs_diff(t), s))?,
        None => *starts.first()?,
    };
    Some((start, start + pat.len()))
}

/// Zero-based column positions of a tab-separated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub gender: usize,
    pub sentence: usize,
    pub occupation: usize,
    /// Whitespace-token index of the occupation, used to pick among repeated
    /// occurrences.
    #[serde(default)]
    pub index: Option<usize>,
}

impl ColumnMapping {
    /// `gender<TAB>index<TAB>sentence<TAB>occupation`, the WinoMT layout.
    pub const WINOMT: ColumnMapping = ColumnMapping {
        gender: 0,
        index: Some(1),
        sentence: 2,
        occupation: 3,
    };
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self::WINOMT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadMode {
    /// Skip and count malformed rows.
    #[default]
    Lenient,
    /// Fail on the first malformed row.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetFormat {
    Tsv {
        #[serde(default)]
        columns: ColumnMapping,
    },
    Jsonl,
}

impl Default for DatasetFormat {
    fn default() -> Self {
        DatasetFormat::Tsv {
            columns: ColumnMapping::WINOMT,
        }
    }
}

/// Loaded samples plus the bookkeeping of what was left out:
/// `rows = samples.len() + dropped_neutral + errors.len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub samples: Vec<Sample>,
    pub rows: usize,
    pub dropped_neutral: usize,
    pub errors: Vec<String>,
}

/// Reads a dataset file. Relative ids are `{tag}-{line}`.
pub fn load_dataset(
    path: &Path,
    format: &DatasetFormat,
    mode: LoadMode,
    tag: &str,
    stereotypes: &StereotypeLexicon,
) -> Result<LoadReport, CorpusError> {
    let src = read(path)?;
    match format {
        DatasetFormat::Tsv { columns } => parse_tsv(&src, columns, mode, tag, stereotypes),
        DatasetFormat::Jsonl => parse_jsonl(&src, mode),
    }
}

pub fn parse_tsv(
    src: &str,
    columns: &ColumnMapping,
    mode: LoadMode,
    tag: &str,
    stereotypes: &StereotypeLexicon,
) -> Result<LoadReport, CorpusError> {
    let mut report = LoadReport::default();
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        report.rows += 1;
        match parse_row(line, line_no, columns, tag, stereotypes) {
            Ok(Some(sample)) => report.samples.push(sample),
            Ok(None) => report.dropped_neutral += 1,
            Err(e) if mode == LoadMode::Lenient => report.errors.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    if report.dropped_neutral > 0 {
        log::warn!("dropped {} rows with neutral or unknown gender", report.dropped_neutral);
    }
    if !report.errors.is_empty() {
        log::warn!("skipped {} malformed rows", report.errors.len());
    }
    Ok(report)
}

fn parse_row(
    line: &str,
    line_no: usize,
    columns: &ColumnMapping,
    tag: &str,
    stereotypes: &StereotypeLexicon,
) -> Result<Option<Sample>, CorpusError> {
    let fields: Vec<&str> = line.split('\t').collect();
    let field = |idx: usize, name: &str| {
        fields
            .get(idx)
            .map(|f| f.trim())
            .filter(|f| !f.is_empty())
            .ok_or_else(|| CorpusError::Parse {
                line: line_no,
                message: format!("missing {name} column {idx}"),
            })
    };
    let gender_raw = field(columns.gender, "gender")?.to_lowercase();
    let gold = match gender_raw.as_str() {
        "neutral" | "n" | "none" => return Ok(None),
        other => other.parse::<Gender>().map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?,
    };
    if !gold.is_known() {
        return Ok(None);
    }
    let text = field(columns.sentence, "sentence")?;
    let occupation = field(columns.occupation, "occupation")?;
    let hint = match columns.index {
        Some(col) => Some(field(col, "index")?.parse::<usize>().map_err(|e| CorpusError::Parse {
            line: line_no,
            message: format!("bad index: {e}"),
        })?),
        None => None,
    };
    let span = find_span(text, occupation, hint).ok_or_else(|| CorpusError::SpanResolution {
        line: line_no,
        occupation: occupation.to_string(),
    })?;
    Ok(Some(Sample {
        id: format!("{tag}-{line_no}"),
        text: text.to_string(),
        occupation: occupation.to_lowercase(),
        occupation_span: span,
        gold_gender: gold,
        stereotype_class: stereotypes.classify(occupation),
        dataset_tag: tag.to_string(),
    }))
}

pub fn parse_jsonl(src: &str, mode: LoadMode) -> Result<LoadReport, CorpusError> {
    let mut report = LoadReport::default();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        report.rows += 1;
        let parsed = serde_json::from_str::<Sample>(line)
            .map_err(|e| e.to_string())
            .and_then(|s| s.validate().map(|_| s));
        match parsed {
            Ok(s) => report.samples.push(s),
            Err(message) => {
                let e = CorpusError::Parse { line: i + 1, message };
                if mode == LoadMode::Strict {
                    return Err(e);
                }
                report.errors.push(e.to_string());
            }
        }
    }
    Ok(report)
}

/// Serializes samples to JSON lines, one per line with a trailing newline.
pub fn to_jsonl(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    out
}

/// A source sentence and its reference translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub source: String,
    pub reference: String,
}

/// Reads a two-column tab-separated parallel corpus.
pub fn load_parallel(path: &Path, occupation_filter: Option<&[String]>) -> Result<Vec<ParallelPair>, CorpusError> {
    parse_parallel(&read(path)?, occupation_filter)
}

/// With a filter, keeps only pairs whose source contains one of the listed
/// occupations (case-insensitive substring).
pub fn parse_parallel(src: &str, occupation_filter: Option<&[String]>) -> Result<Vec<ParallelPair>, CorpusError> {
    let filter: Option<Vec<String>> = occupation_filter.map(|f| f.iter().map(|o| o.to_lowercase()).collect());
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let (source, reference) = match parts.as_slice() {
            [s, r] if !s.trim().is_empty() && !r.trim().is_empty() => (s.trim(), r.trim()),
            _ => {
                return Err(CorpusError::Parse {
                    line: i + 1,
                    message: format!("expected 2 non-empty tab-separated columns, got {}", parts.len()),
                })
            }
        };
        if let Some(f) = &filter {
            let lower = source.to_lowercase();
            if !f.iter().any(|o| lower.contains(o.as_str())) {
                continue;
            }
        }
        out.push(ParallelPair {
            source: source.to_string(),
            reference: reference.to_string(),
        });
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn winomt(src: &str, mode: LoadMode) -> Result<LoadReport, CorpusError> {
        parse_tsv(src, &ColumnMapping::WINOMT, mode, "wino", &StereotypeLexicon::builtin())
    }

    #[test]
    fn winomt_row() {
        let r = winomt("male\t1\tThe developer argued with the designer.\tdeveloper\n", LoadMode::Strict).unwrap();
        let s = &r.samples[0];
        assert_eq!(s.gold_gender, Gender::Male);
        assert_eq!(s.occupation, "developer");
        assert_eq!(s.occupation_span, (4, 13));
        assert_eq!(s.span_text(), "developer");
        assert_eq!(s.id, "wino-1");
    }

    #[test]
    fn empty_and_neutral() {
        assert_eq!(winomt("", LoadMode::Strict).unwrap().samples.len(), 0);
        let r = winomt("neutral\t1\tThe nurse ran.\tnurse\nfemale\t1\tThe nurse ran.\tnurse\n", LoadMode::Strict).unwrap();
        assert_eq!((r.samples.len(), r.dropped_neutral, r.rows), (1, 1, 2));
    }

    #[test]
    fn lenient_counts_bad_rows_strict_fails() {
        let src = "female\t1\tThe nurse ran.\tnurse\nmale\t1\tThe dog ran.\tnurse\nmale\n";
        let r = winomt(src, LoadMode::Lenient).unwrap();
        assert_eq!(r.samples.len() + r.dropped_neutral + r.errors.len(), r.rows);
        assert_eq!(r.errors.len(), 2);
        assert!(matches!(winomt(src, LoadMode::Strict), Err(CorpusError::SpanResolution { line: 2, .. })));
    }

    #[test]
    fn index_hint_picks_occurrence() {
        let text = "The nurse told the other nurse a story.";
        assert_eq!(find_span(text, "nurse", None), Some((4, 9)));
        assert_eq!(find_span(text, "nurse", Some(4)), Some((25, 30)));
        assert_eq!(find_span("The nurses ran.", "nurse", None), None);
        assert_eq!(find_span("A Construction Worker.", "construction worker", None), Some((2, 21)));
    }

    #[test]
    fn jsonl_round_trip_and_validation() {
        let s = Sample::new("x", "Él dijo que the nurse ran.", "nurse", Gender::Female, "t")
            .unwrap()
            .with_stereotype(StereotypeClass::StrongFemale);
        let text = to_jsonl(std::slice::from_ref(&s));
        assert!(text.contains(r#""occupation_span":[16,21]"#), "{text}");
        assert!(text.contains(r#""stereotype_class":"strong_female""#));
        let back = parse_jsonl(&text, LoadMode::Strict).unwrap();
        assert_eq!(back.samples, vec![s]);
        let bad = text.replace("[16,21]", "[0,5]");
        assert!(parse_jsonl(&bad, LoadMode::Strict).is_err());
    }

    #[test]
    fn parallel() {
        let src = "The nurse ran.\tDie Krankenschwester lief.\nDogs bark.\tHunde bellen.\n";
        assert_eq!(parse_parallel(src, None).unwrap().len(), 2);
        let filt = ["nurse".to_string()];
        assert_eq!(parse_parallel(src, Some(&filt)).unwrap().len(), 1);
        assert!(matches!(
            parse_parallel("ok\tok\nonly one column\n", None),
            Err(CorpusError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn stereotypes() {
        let lex = StereotypeLexicon::builtin();
        assert_eq!(lex.classify("Nurse"), StereotypeClass::StrongFemale);
        assert_eq!(lex.classify("carpenter"), StereotypeClass::StrongMale);
        assert_eq!(lex.classify("astronaut"), StereotypeClass::Unclassified);
    }
}
