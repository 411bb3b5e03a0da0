//! Context template bank.
//!
//! A bank file holds one template per line as `id<TAB>kind<TAB>pattern`.
//! Patterns use `{occupation}` for the entity slot and gender-neutral keys
//! such as `{sbj-prn}` for gendered slots; the renderer picks the `m-` or
//! `f-` entry of the placeholder table according to the requested gender.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::{BackendError, LangPair, TranslationBackend, TranslationRequest};
use crate::gender::Gender;
use crate::tagger::GenderTagger;
use crate::text;

pub const OCCUPATION_KEY: &str = "occupation";

const BUILTIN_RELEVANT: &str = include_str!("../data/relevant_templates.tsv");
const BUILTIN_IRRELEVANT: &str = include_str!("../data/irrelevant_templates.tsv");
const BUILTIN_PLACEHOLDERS: &str = include_str!("../data/placeholders.tsv");

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown placeholder `{{{key}}}`")]
    UnknownPlaceholder { key: String },
    #[error("duplicate template id `{id}` on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("template `{id}`: {message}")]
    InvariantViolation { id: String, message: String },
    #[error("template `{id}` is relevant and needs a male or female signal")]
    GenderRequired { id: String },
    #[error("occupation must not be empty")]
    EmptyOccupation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Relevant,
    Irrelevant,
}

impl TemplateKind {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevant" => Some(TemplateKind::Relevant),
            "irrelevant" => Some(TemplateKind::Irrelevant),
            _ => None,
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateKind::Relevant => "relevant",
            TemplateKind::Irrelevant => "irrelevant",
        })
    }
}

/// Key/value table for gendered placeholders. Keys are stored in their
/// gendered form (`m-sbj-prn`, `f-sbj-prn`); values keep source order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaceholderTable {
    entries: BTreeMap<String, Vec<String>>,
}

impl PlaceholderTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_PLACEHOLDERS).expect("builtin placeholder table is valid")
    }

    pub fn load(path: &Path) -> Result<Self, BankError> {
        Self::parse(&read(path)?)
    }

    /// Parses `key<TAB>comma-separated values` lines.
    pub fn parse(src: &str) -> Result<Self, BankError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let (key, values) = raw.split_once('\t').ok_or_else(|| BankError::Parse {
                line,
                message: "expected `key<TAB>values`".into(),
            })?;
            let key = key.trim();
            if !(key.starts_with("m-") || key.starts_with("f-")) || key.len() < 3 {
                return Err(BankError::Parse {
                    line,
                    message: format!("key `{key}` must start with `m-` or `f-`"),
                });
            }
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(BankError::Parse {
                    line,
                    message: format!("key `{key}` has no value"),
                });
            }
            if entries.insert(key.to_string(), values).is_some() {
                return Err(BankError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        for key in entries.keys() {
            let twin = match key.strip_prefix("m-") {
                Some(rest) => format!("f-{rest}"),
                None => format!("m-{}", &key[2..]),
            };
            if !entries.contains_key(&twin) {
                return Err(BankError::Parse {
                    line: 0,
                    message: format!("key `{key}` has no `{twin}` counterpart"),
                });
            }
        }
        Ok(Self { entries })
    }

    fn gendered_key(key: &str, gender: Gender) -> Option<String> {
        match gender {
            Gender::Male => Some(format!("m-{key}")),
            Gender::Female => Some(format!("f-{key}")),
            Gender::Unknown => None,
        }
    }

    /// Whether a gender-neutral key (e.g. `sbj-prn`) is defined.
    pub fn has_key(&self, key: &str) -> bool {
        self.entries.contains_key(&format!("m-{key}"))
    }

    /// All values of a gender-neutral key for one gender.
    pub fn values(&self, key: &str, gender: Gender) -> Option<&[String]> {
        let k = Self::gendered_key(key, gender)?;
        self.entries.get(&k).map(Vec::as_slice)
    }

    /// Rendering value: the first listed value.
    pub fn value(&self, key: &str, gender: Gender) -> Option<&str> {
        self.values(key, gender).and_then(|v| v.first()).map(String::as_str)
    }

    /// Every value in the table, lowercased, with its gender. Multi-valued
    /// entries contribute all their values.
    pub fn lexicon(&self) -> Vec<(String, Gender)> {
        let mut out = Vec::new();
        for (key, values) in &self.entries {
            let g = if key.starts_with("m-") { Gender::Male } else { Gender::Female };
            for v in values {
                for w in text::words(v) {
                    out.push((w.lower, g));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Literal(String),
    Occupation,
    Gendered(String),
}

fn parse_pattern(pattern: &str) -> Result<Vec<Piece>, String> {
    let mut pieces = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Literal(rest[..open].to_string()));
        }
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or("unclosed `{`")?;
        let key = after[..close].trim();
        if key.is_empty() || key.contains('{') {
            return Err("malformed placeholder".into());
        }
        pieces.push(if key == OCCUPATION_KEY {
            Piece::Occupation
        } else {
            Piece::Gendered(key.to_string())
        });
        rest = &after[close + 1..];
    }
    if rest.contains('}') {
        return Err("stray `}`".into());
    }
    if !rest.is_empty() {
        pieces.push(Piece::Literal(rest.to_string()));
    }
    Ok(pieces)
}

/// Token-level features of a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateFeatures {
    /// Token count.
    pub length: usize,
    /// Tokens carrying at least one gender signal.
    pub signals: usize,
    /// Minimum token distance between the occupation slot and a signal.
    pub distance: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub pattern: String,
    pub kind: TemplateKind,
    pub features: TemplateFeatures,
    pieces: Vec<Piece>,
}

impl Template {
    /// Parses and validates one template against `table`.
    pub fn new(
        id: impl Into<String>,
        kind: TemplateKind,
        pattern: impl Into<String>,
        table: &PlaceholderTable,
    ) -> Result<Self, BankError> {
        let id = id.into();
        let pattern = pattern.into();
        let pieces = parse_pattern(&pattern).map_err(|message| BankError::InvariantViolation {
            id: id.clone(),
            message,
        })?;
        for p in &pieces {
            if let Piece::Gendered(key) = p {
                if !table.has_key(key) {
                    return Err(BankError::UnknownPlaceholder { key: key.clone() });
                }
            }
        }
        let occurrences = pieces.iter().filter(|p| **p == Piece::Occupation).count();
        if occurrences != 1 {
            return Err(BankError::InvariantViolation {
                id,
                message: format!("`{{occupation}}` must occur exactly once, found {occurrences}"),
            });
        }
        let gendered = pieces.iter().any(|p| matches!(p, Piece::Gendered(_)));
        let features = features_of(&pattern, &table.lexicon());
        match kind {
            TemplateKind::Relevant if !gendered => {
                return Err(BankError::InvariantViolation {
                    id,
                    message: "relevant template has no gendered placeholder".into(),
                });
            }
            TemplateKind::Irrelevant if gendered || features.signals > 0 => {
                return Err(BankError::InvariantViolation {
                    id,
                    message: "irrelevant template carries a gender signal".into(),
                });
            }
            _ => {}
        }
        Ok(Self {
            id,
            pattern,
            kind,
            features,
            pieces,
        })
    }

    /// Renders the context sentence for `occupation` with `gender` signals.
    /// Irrelevant templates ignore `gender`.
    pub fn render(
        &self,
        occupation: &str,
        gender: Gender,
        table: &PlaceholderTable,
    ) -> Result<String, BankError> {
        if occupation.trim().is_empty() {
            return Err(BankError::EmptyOccupation);
        }
        if self.kind == TemplateKind::Relevant && !gender.is_known() {
            return Err(BankError::GenderRequired { id: self.id.clone() });
        }
        let mut out = String::with_capacity(self.pattern.len() + occupation.len());
        for p in &self.pieces {
            match p {
                Piece::Literal(s) => out.push_str(s),
                Piece::Occupation => out.push_str(occupation),
                Piece::Gendered(key) => {
                    let v = table
                        .value(key, gender)
                        .ok_or_else(|| BankError::UnknownPlaceholder { key: key.clone() })?;
                    out.push_str(v);
                }
            }
        }
        if matches!(self.pieces.first(), Some(Piece::Gendered(_))) {
            out = text::capitalize(&out);
        }
        Ok(out)
    }
}

/// Free-function form of [`Template::render`].
pub fn render(
    template: &Template,
    occupation: &str,
    gender: Gender,
    table: &PlaceholderTable,
) -> Result<String, BankError> {
    template.render(occupation, gender, table)
}

/// Recomputes the features of a template against a placeholder table.
pub fn compute_features(template: &Template, table: &PlaceholderTable) -> TemplateFeatures {
    features_of(&template.pattern, &table.lexicon())
}

fn features_of(pattern: &str, lexicon: &[(String, Gender)]) -> TemplateFeatures {
    let mut tokens: Vec<&str> = pattern.split_whitespace().collect();
    if let Some(last) = tokens.last_mut() {
        *last = last.trim_end_matches(['.', '!', '?']);
        if last.is_empty() {
            tokens.pop();
        }
    }
    let lexicon: HashSet<&str> = lexicon.iter().map(|(w, _)| w.as_str()).collect();
    let occupation_slot = format!("{{{OCCUPATION_KEY}}}");
    let mut occupation_at = None;
    let mut signal_at = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.contains(&occupation_slot) {
            occupation_at = Some(i);
        }
        let has_placeholder = parse_pattern(tok)
            .map(|ps| ps.iter().any(|p| matches!(p, Piece::Gendered(_))))
            .unwrap_or(false);
        let literal: String = match parse_pattern(tok) {
            Ok(ps) => ps
                .iter()
                .filter_map(|p| match p {
                    Piece::Literal(s) => Some(format!("{s} ")),
                    _ => None,
                })
                .collect(),
            Err(_) => tok.to_string(),
        };
        let has_word = text::words(&literal)
            .iter()
            .any(|w| lexicon.contains(w.lower.as_str()));
        if has_placeholder || has_word {
            signal_at.push(i);
        }
    }
    let distance = occupation_at.and_then(|o| signal_at.iter().map(|&s| s.abs_diff(o)).min());
    TemplateFeatures {
        length: tokens.len(),
        signals: signal_at.len(),
        distance,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    /// SHA-256 of the bank source text, hex encoded.
    pub sha256: String,
}

/// Ordered, immutable template collection. Iteration order is file order.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    templates: Vec<Template>,
    placeholders: PlaceholderTable,
    provenance: Provenance,
}

impl TemplateBank {
    pub fn parse(src: &str, placeholders: PlaceholderTable) -> Result<Self, BankError> {
        let mut templates = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut cols = raw.splitn(3, '\t');
            let (Some(id), Some(kind), Some(pattern)) = (cols.next(), cols.next(), cols.next())
            else {
                return Err(BankError::Parse {
                    line,
                    message: "expected `id<TAB>kind<TAB>pattern`".into(),
                });
            };
            let id = id.trim();
            if id.is_empty() {
                return Err(BankError::Parse {
                    line,
                    message: "empty template id".into(),
                });
            }
            let kind = TemplateKind::parse(kind).ok_or_else(|| BankError::Parse {
                line,
                message: format!("unknown template kind `{}`", kind.trim()),
            })?;
            if !seen.insert(id.to_string()) {
                return Err(BankError::DuplicateId {
                    id: id.to_string(),
                    line,
                });
            }
            templates.push(Template::new(id, kind, pattern.trim(), &placeholders)?);
        }
        Ok(Self {
            templates,
            placeholders,
            provenance: Provenance {
                path: None,
                sha256: hex::encode(Sha256::digest(src.as_bytes())),
            },
        })
    }

    /// Relevant templates shipped with the crate.
    pub fn builtin_relevant() -> Self {
        Self::parse(BUILTIN_RELEVANT, PlaceholderTable::builtin()).expect("builtin bank is valid")
    }

    /// The gender-irrelevant control templates shipped with the crate.
    pub fn builtin_irrelevant() -> Self {
        Self::parse(BUILTIN_IRRELEVANT, PlaceholderTable::builtin()).expect("builtin bank is valid")
    }

    pub fn from_templates(templates: Vec<Template>, placeholders: PlaceholderTable) -> Self {
        let mut hasher = Sha256::new();
        for t in &templates {
            hasher.update(format!("{}\t{}\t{}\n", t.id, t.kind, t.pattern));
        }
        Self {
            templates,
            placeholders,
            provenance: Provenance {
                path: None,
                sha256: hex::encode(hasher.finalize()),
            },
        }
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Template> {
        self.templates.iter()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn placeholders(&self) -> &PlaceholderTable {
        &self.placeholders
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// A new bank with the templates at `indices`, kept in bank order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        Self::from_templates(
            idx.into_iter().map(|i| self.templates[i].clone()).collect(),
            self.placeholders.clone(),
        )
    }

    /// A new bank holding the templates of both banks, `self` first.
    pub fn concat(&self, other: &TemplateBank) -> Result<Self, BankError> {
        let mut seen: HashSet<&str> = self.templates.iter().map(|t| t.id.as_str()).collect();
        for t in &other.templates {
            if !seen.insert(&t.id) {
                return Err(BankError::DuplicateId {
                    id: t.id.clone(),
                    line: 0,
                });
            }
        }
        let mut templates = self.templates.clone();
        templates.extend(other.templates.iter().cloned());
        Ok(Self::from_templates(templates, self.placeholders.clone()))
    }

    /// Serializes back to the bank file format.
    pub fn to_tsv(&self) -> String {
        self.templates
            .iter()
            .map(|t| format!("{}\t{}\t{}\n", t.id, t.kind, t.pattern))
            .collect()
    }
}

fn read(path: &Path) -> Result<String, BankError> {
    fs::read_to_string(path).map_err(|source| BankError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates a bank file against a placeholder table file.
pub fn load_bank(path: &Path, table_path: &Path) -> Result<TemplateBank, BankError> {
    let table = PlaceholderTable::load(table_path)?;
    let src = read(path)?;
    let mut bank = TemplateBank::parse(&src, table)?;
    bank.provenance.path = Some(path.to_path_buf());
    Ok(bank)
}

#[derive(Debug, thiserror::Error)]
pub enum PruneError {
    #[error("pruning needs at least one probe occupation")]
    EmptyProbes,
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Drops relevant templates whose standalone translation does not carry the
/// intended gender for every probe occupation and both genders. Irrelevant
/// templates have no intended gender and pass through unchanged.
pub fn prune_bank(
    bank: &TemplateBank,
    backend: &dyn TranslationBackend,
    pair: &LangPair,
    tagger: &dyn GenderTagger,
    probe_occupations: &[String],
) -> Result<TemplateBank, PruneError> {
    if probe_occupations.is_empty() {
        return Err(PruneError::EmptyProbes);
    }
    let mut kept = Vec::new();
    for template in bank.iter() {
        if template.kind == TemplateKind::Irrelevant {
            kept.push(template.clone());
            continue;
        }
        let mut probes = Vec::new();
        let mut texts = Vec::new();
        for occupation in probe_occupations {
            for gender in Gender::BINARY {
                texts.push(template.render(occupation, gender, bank.placeholders())?);
                probes.push((occupation, gender));
            }
        }
        let out = backend.translate_batch(&TranslationRequest::new(texts, pair.clone()))?;
        let survives = probes
            .iter()
            .zip(&out)
            .all(|((occ, gender), translated)| tagger.target_gender(translated, occ, &pair.tgt) == *gender);
        if survives {
            kept.push(template.clone());
        } else {
            log::debug!("pruned template {}", template.id);
        }
    }
    Ok(TemplateBank::from_templates(kept, bank.placeholders.clone()))
}
