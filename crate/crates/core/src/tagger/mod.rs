//! Heuristic gender detection for the source entity and its translation.
//!
//! Source side: gendered pronouns and nouns are collected; a single gender
//! wins outright, mixed evidence goes to the word nearest the occupation and
//! an exact distance tie is `Unknown`.
//!
//! Target side, first rule that fires wins:
//! 1. a gender-specific form of the occupation from the occupation lexicon,
//! 2. the determiner right before any form of the occupation,
//! 3. the nearest gendered pronoun or noun, as on the source side.

mod external;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::Sample;
use crate::gender::Gender;
use crate::text::{self, Word};

pub use external::ExternalTagger;

const BUILTIN_GENDER_WORDS: &str = include_str!("../../data/gender_words.tsv");
const BUILTIN_OCCUPATIONS: &str = include_str!("../../data/occupations.tsv");

#[derive(Debug, thiserror::Error)]
pub enum TaggerError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("occupation `{occupation}` not found in `{text}`")]
    OccupationNotFound { occupation: String, text: String },
    #[error("no samples to evaluate")]
    EmptyDataset,
    #[error("no gender lexicon for language `{0}`")]
    UnsupportedLanguage(String),
}

fn read(path: &Path) -> Result<String, TaggerError> {
    fs::read_to_string(path).map_err(|source| TaggerError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn data_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|v| v.trim().to_lowercase())
        .filter(|v| !v.is_empty())
        .collect()
}

/// Gendered function words and nouns of one language.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenderLexicon {
    pub language: String,
    pub male_pronouns: HashSet<String>,
    pub female_pronouns: HashSet<String>,
    pub male_determiners: HashSet<String>,
    pub female_determiners: HashSet<String>,
    pub gendered_nouns: HashMap<String, Gender>,
}

impl GenderLexicon {
    /// Gender carried by a pronoun or gendered noun.
    pub fn evidence(&self, word: &str) -> Option<Gender> {
        if self.male_pronouns.contains(word) {
            Some(Gender::Male)
        } else if self.female_pronouns.contains(word) {
            Some(Gender::Female)
        } else {
            self.gendered_nouns.get(word).copied()
        }
    }

    pub fn determiner(&self, word: &str) -> Option<Gender> {
        if self.male_determiners.contains(word) {
            Some(Gender::Male)
        } else if self.female_determiners.contains(word) {
            Some(Gender::Female)
        } else {
            None
        }
    }
}

/// Gender lexicons keyed by language code, loaded from
/// `lang<TAB>category<TAB>gender<TAB>comma-separated words` where category
/// is `pronoun`, `determiner` or `noun`.
#[derive(Debug, Clone, Default)]
pub struct GenderLexicons {
    by_lang: BTreeMap<String, GenderLexicon>,
}

impl GenderLexicons {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_GENDER_WORDS).expect("builtin gender lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        Self::parse(&read(path)?)
    }

    pub fn parse(src: &str) -> Result<Self, TaggerError> {
        let mut by_lang: BTreeMap<String, GenderLexicon> = BTreeMap::new();
        for (line, raw) in data_lines(src) {
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 4 {
                return Err(TaggerError::Parse {
                    line,
                    message: "expected `lang<TAB>category<TAB>gender<TAB>words`".into(),
                });
            }
            let lang = cols[0].trim().to_lowercase();
            let gender: Gender = cols[2].parse().map_err(|e| TaggerError::Parse {
                line,
                message: format!("{e}"),
            })?;
            if !gender.is_known() {
                return Err(TaggerError::Parse {
                    line,
                    message: "lexicon entries must be male or female".into(),
                });
            }
            let lex = by_lang.entry(lang.clone()).or_insert_with(|| GenderLexicon {
                language: lang,
                ..Default::default()
            });
            let words = split_list(cols[3]);
            match (cols[1].trim(), gender) {
                ("pronoun", Gender::Male) => lex.male_pronouns.extend(words),
                ("pronoun", _) => lex.female_pronouns.extend(words),
                ("determiner", Gender::Male) => lex.male_determiners.extend(words),
                ("determiner", _) => lex.female_determiners.extend(words),
                ("noun", g) => {
                    for w in words {
                        if lex.gendered_nouns.insert(w.clone(), g).is_some_and(|old| old != g) {
                            return Err(TaggerError::Parse {
                                line,
                                message: format!("noun `{w}` listed with both genders"),
                            });
                        }
                    }
                }
                (other, _) => {
                    return Err(TaggerError::Parse {
                        line,
                        message: format!("unknown category `{other}`"),
                    })
                }
            }
        }
        for lex in by_lang.values() {
            let clash = lex
                .male_pronouns
                .intersection(&lex.female_pronouns)
                .chain(lex.male_determiners.intersection(&lex.female_determiners))
                .next();
            if let Some(w) = clash {
                return Err(TaggerError::Parse {
                    line: 0,
                    message: format!("`{w}` is listed as both male and female for `{}`", lex.language),
                });
            }
        }
        Ok(Self { by_lang })
    }

    pub fn get(&self, lang: &str) -> Option<&GenderLexicon> {
        self.by_lang.get(lang)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.by_lang.keys().map(String::as_str)
    }
}

/// Masculine and feminine surface forms of one occupation in one language,
/// in their original casing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccupationForms {
    pub masculine: Vec<String>,
    pub feminine: Vec<String>,
}

impl OccupationForms {
    pub fn form(&self, gender: Gender) -> Option<&str> {
        match gender {
            Gender::Male => self.masculine.first(),
            Gender::Female => self.feminine.first(),
            Gender::Unknown => None,
        }
        .map(String::as_str)
    }
}

/// English occupation → per-language gendered forms. Loaded from
/// `en<TAB>lang<TAB>masc_forms<TAB>fem_forms` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccupationLexicon {
    entries: BTreeMap<String, BTreeMap<String, OccupationForms>>,
}

impl OccupationLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_OCCUPATIONS).expect("builtin occupation lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        Self::parse(&read(path)?)
    }

    pub fn parse(src: &str) -> Result<Self, TaggerError> {
        let mut entries: BTreeMap<String, BTreeMap<String, OccupationForms>> = BTreeMap::new();
        for (line, raw) in data_lines(src) {
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 4 {
                return Err(TaggerError::Parse {
                    line,
                    message: "expected `en<TAB>lang<TAB>masc<TAB>fem`".into(),
                });
            }
            let en = cols[0].trim().to_lowercase();
            let lang = cols[1].trim().to_lowercase();
            let keep_case = |s: &str| -> Vec<String> {
                s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
            };
            let forms = OccupationForms {
                masculine: keep_case(cols[2]),
                feminine: keep_case(cols[3]),
            };
            if en.is_empty() || forms.masculine.is_empty() || forms.feminine.is_empty() {
                return Err(TaggerError::Parse {
                    line,
                    message: "occupation and both form lists must be non-empty".into(),
                });
            }
            if entries.entry(en.clone()).or_default().insert(lang.clone(), forms).is_some() {
                return Err(TaggerError::Parse {
                    line,
                    message: format!("duplicate entry for `{en}`/{lang}"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn forms(&self, occupation: &str, lang: &str) -> Option<&OccupationForms> {
        self.entries.get(&occupation.trim().to_lowercase())?.get(lang)
    }

    pub fn contains(&self, occupation: &str) -> bool {
        self.entries.contains_key(&occupation.trim().to_lowercase())
    }

    /// English occupation names, lowercased.
    pub fn occupations(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Resolves gendered evidence around an anchor word index.
fn nearest_evidence(words: &[Word], anchor: Option<usize>, lexicon: &GenderLexicon) -> Gender {
    let hits: Vec<(usize, Gender)> = words
        .iter()
        .enumerate()
        .filter_map(|(i, w)| lexicon.evidence(&w.lower).map(|g| (i, g)))
        .collect();
    let has = |g| hits.iter().any(|&(_, h)| h == g);
    match (has(Gender::Male), has(Gender::Female)) {
        (false, false) => Gender::Unknown,
        (true, false) => Gender::Male,
        (false, true) => Gender::Female,
        (true, true) => {
            let Some(anchor) = anchor else {
                return Gender::Unknown;
            };
            let nearest = |g| {
                hits.iter()
                    .filter(|&&(_, h)| h == g)
                    .map(|&(i, _)| i.abs_diff(anchor))
                    .min()
                    .expect("present")
            };
            let (m, f) = (nearest(Gender::Male), nearest(Gender::Female));
            match m.cmp(&f) {
                std::cmp::Ordering::Less => Gender::Male,
                std::cmp::Ordering::Greater => Gender::Female,
                std::cmp::Ordering::Equal => Gender::Unknown,
            }
        }
    }
}

pub fn detect_source_gender(
    text: &str,
    occupation: &str,
    lexicon: &GenderLexicon,
) -> Result<Gender, TaggerError> {
    let words = text::words(text);
    let anchor = text::find_phrase(&words, &text::phrase_words(occupation)).ok_or_else(|| {
        TaggerError::OccupationNotFound {
            occupation: occupation.to_string(),
            text: text.to_string(),
        }
    })?;
    Ok(nearest_evidence(&words, Some(anchor), lexicon))
}

pub fn detect_target_gender(
    translation: &str,
    occupation_en: &str,
    occupations: &OccupationLexicon,
    lexicon: &GenderLexicon,
) -> Gender {
    let words = text::words(translation);
    let forms = occupations.forms(occupation_en, &lexicon.language);

    // every (word index, form gender) where an occupation form occurs
    let mut located: Vec<(usize, Option<Gender>)> = Vec::new();
    if let Some(forms) = forms {
        let masc: HashSet<String> = forms.masculine.iter().map(|f| f.to_lowercase()).collect();
        let fem: HashSet<String> = forms.feminine.iter().map(|f| f.to_lowercase()).collect();
        for form in masc.union(&fem) {
            let gender = match (masc.contains(form), fem.contains(form)) {
                (true, false) => Some(Gender::Male),
                (false, true) => Some(Gender::Female),
                _ => None,
            };
            let phrase = text::phrase_words(form);
            let mut from = 0;
            while let Some(i) = text::find_phrase(&words[from..], &phrase) {
                located.push((from + i, gender));
                from += i + 1;
            }
        }
    } else {
        // no target forms (e.g. an English target): anchor on the source name
        if let Some(i) = text::find_phrase(&words, &text::phrase_words(occupation_en)) {
            located.push((i, None));
        }
    }
    located.sort_by_key(|&(i, _)| i);

    if let Some(&(_, Some(g))) = located.iter().find(|(_, g)| g.is_some()) {
        return g;
    }
    for &(i, _) in &located {
        if let Some(g) = i.checked_sub(1).and_then(|p| lexicon.determiner(&words[p].lower)) {
            return g;
        }
    }
    nearest_evidence(&words, located.first().map(|&(i, _)| i), lexicon)
}

/// Gender detection interface used by the engine and pruning.
pub trait GenderTagger: Send + Sync {
    /// Gender of `occupation` in a source sentence.
    fn source_gender(&self, text: &str, occupation: &str) -> Result<Gender, TaggerError>;

    /// Gender of the English `occupation` as rendered in a translation into
    /// `lang`. Never fails; `Unknown` is the sink.
    fn target_gender(&self, translation: &str, occupation: &str, lang: &str) -> Gender;
}

/// The lexicon cascade tagger.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    source_lang: String,
    lexicons: GenderLexicons,
    occupations: OccupationLexicon,
}

impl LexiconTagger {
    pub fn new(
        source_lang: impl Into<String>,
        lexicons: GenderLexicons,
        occupations: OccupationLexicon,
    ) -> Result<Self, TaggerError> {
        let source_lang = source_lang.into();
        if lexicons.get(&source_lang).is_none() {
            return Err(TaggerError::UnsupportedLanguage(source_lang));
        }
        Ok(Self {
            source_lang,
            lexicons,
            occupations,
        })
    }

    /// English source with the builtin lexicons.
    pub fn builtin() -> Self {
        Self::new("en", GenderLexicons::builtin(), OccupationLexicon::builtin())
            .expect("builtin lexicons cover English")
    }

    pub fn occupations(&self) -> &OccupationLexicon {
        &self.occupations
    }

    pub fn lexicons(&self) -> &GenderLexicons {
        &self.lexicons
    }
}

impl GenderTagger for LexiconTagger {
    fn source_gender(&self, text: &str, occupation: &str) -> Result<Gender, TaggerError> {
        let lex = self.lexicons.get(&self.source_lang).expect("checked in new");
        detect_source_gender(text, occupation, lex)
    }

    fn target_gender(&self, translation: &str, occupation: &str, lang: &str) -> Gender {
        match self.lexicons.get(lang) {
            Some(lex) => detect_target_gender(translation, occupation, &self.occupations, lex),
            None => Gender::Unknown,
        }
    }
}

/// Fraction of samples whose detected source gender equals the gold label.
/// `Unknown` and tagging errors count as wrong.
pub fn tagger_accuracy(samples: &[Sample], tagger: &dyn GenderTagger) -> Result<f64, TaggerError> {
    if samples.is_empty() {
        return Err(TaggerError::EmptyDataset);
    }
    let correct = samples
        .iter()
        .filter(|s| {
            tagger
                .source_gender(&s.text, &s.occupation)
                .is_ok_and(|g| g == s.gold_gender)
        })
        .count();
    Ok(correct as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> GenderLexicon {
        GenderLexicons::builtin().get("en").unwrap().clone()
    }

    fn target(text: &str, occ: &str, lang: &str) -> Gender {
        LexiconTagger::builtin().target_gender(text, occ, lang)
    }

    #[test]
    fn source_examples() {
        let lex = en();
        assert_eq!(detect_source_gender("The nurse said he was tired.", "nurse", &lex).unwrap(), Gender::Male);
        assert_eq!(detect_source_gender("The nurse met the farmer.", "nurse", &lex).unwrap(), Gender::Unknown);
        assert_eq!(
            detect_source_gender("The nurse told the developer that she was late.", "nurse", &lex).unwrap(),
            Gender::Female
        );
        assert!(matches!(
            detect_source_gender("The doctor slept.", "nurse", &lex),
            Err(TaggerError::OccupationNotFound { .. })
        ));
    }

    #[test]
    fn source_nearest_and_tie() {
        let lex = en();
        // he at distance 1, she at distance 4
        assert_eq!(detect_source_gender("She thinks the nurse he met left.", "nurse", &lex).unwrap(), Gender::Male);
        // he and she both at distance 1
        assert_eq!(detect_source_gender("she nurse he", "nurse", &lex).unwrap(), Gender::Unknown);
        // gendered noun counts as evidence
        assert_eq!(detect_source_gender("That nurse is a funny man.", "nurse", &lex).unwrap(), Gender::Male);
    }

    #[test]
    fn target_noun_form_rule() {
        assert_eq!(target("Die Krankenschwester schlief.", "nurse", "de"), Gender::Female);
        assert_eq!(target("L'infirmière est arrivée.", "nurse", "fr"), Gender::Female);
        assert_eq!(target("Le infirmier est arrivé.", "nurse", "fr"), Gender::Male);
        // noun rule fires before the pronoun rule
        assert_eq!(target("El médico dijo que ella llegó.", "doctor", "es"), Gender::Male);
    }

    #[test]
    fn target_determiner_and_pronoun_rules() {
        // comptable is the same form for both genders; the determiner decides
        assert_eq!(target("La comptable est partie.", "accountant", "fr"), Gender::Female);
        assert_eq!(target("Le comptable est parti.", "accountant", "fr"), Gender::Male);
        // elided article carries no gender; pronoun decides
        assert_eq!(target("L'analyste dit qu'elle part.", "analyst", "fr"), Gender::Female);
        assert_eq!(target("Nichts hier.", "nurse", "de"), Gender::Unknown);
        assert_eq!(target("Il dort.", "nurse", "ja"), Gender::Unknown);
    }

    #[test]
    fn english_target_uses_pronouns() {
        assert_eq!(target("The nurse said he was tired.", "nurse", "en"), Gender::Male);
    }

    #[test]
    fn lexicon_parsing_errors() {
        assert!(GenderLexicons::parse("en\tpronoun\tmale\the\nen\tpronoun\tfemale\the\n").is_err());
        assert!(GenderLexicons::parse("en\tpronoun\tunknown\tit\n").is_err());
        assert!(GenderLexicons::parse("en\tverb\tmale\trun\n").is_err());
        assert!(OccupationLexicon::parse("nurse\tde\tKrankenpfleger\n").is_err());
        assert!(OccupationLexicon::parse("nurse\tde\ta\tb\nnurse\tde\tc\td\n").is_err());
    }

    #[test]
    fn builtin_occupations_cover_three_targets() {
        let occ = OccupationLexicon::builtin();
        assert!(occ.len() >= 40);
        for o in occ.occupations() {
            for lang in ["de", "fr", "es"] {
                assert!(occ.forms(o, lang).is_some(), "{o}/{lang}");
            }
        }
        assert_eq!(occ.forms("Nurse", "de").unwrap().form(Gender::Female), Some("Krankenschwester"));
    }
}
