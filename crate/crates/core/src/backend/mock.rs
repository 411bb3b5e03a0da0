//! Rule-based mock of a gender-biased NMT model.
//!
//! The input is split into segments at standalone delimiter tokens (`#`,
//! `.`, `:`, `;` surrounded by whitespace). Every occupation in a segment is
//! rendered with one gender:
//!
//! 1. the gender signalled by the *other* segments, when that gender has at
//!    least `k` signal tokens and outnumbers the opposite gender (`k` is the
//!    per-occupation threshold or the global `signal_threshold`);
//! 2. else the segment's own signal, under the same rule with
//!    `self_threshold` (never, by default: in-sentence pronouns do not
//!    resolve the stereotype);
//! 3. else the stereotype from the bias table.
//!
//! A signal token is a whitespace token holding at least one English
//! gendered pronoun or noun. The remaining words go through a small fixed
//! dictionary; unknown words pass through unchanged.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::{BackendError, LangPair, TranslationBackend, TranslationRequest};
use crate::context::Delimiter;
use crate::gender::Gender;
use crate::tagger::{GenderLexicon, GenderLexicons, OccupationLexicon};
use crate::text::{self, Word};

/// A signal-count threshold: an integer `k ≥ 1` or never.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Threshold {
    At(u32),
    Never,
}

impl Threshold {
    pub fn reached_by(self, count: usize) -> bool {
        match self {
            Threshold::At(k) => count >= k as usize,
            Threshold::Never => false,
        }
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::At(1)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::At(k) => write!(f, "{k}"),
            Threshold::Never => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Threshold::At(k) => s.serialize_u32(*k),
            Threshold::Never => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) if k >= 1 && k <= u32::MAX as i64 => Ok(Threshold::At(k as u32)),
            Raw::Int(k) => Err(serde::de::Error::custom(format!("threshold must be >= 1, got {k}"))),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "never" | "infinity") => Ok(Threshold::Never),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid threshold `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockMode {
    /// Returns every input unchanged.
    Identity,
    #[default]
    Gendered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockConfig {
    #[serde(default)]
    pub mode: MockMode,
    /// Stereotyped gender per English occupation.
    #[serde(default)]
    pub bias: BTreeMap<String, Gender>,
    #[serde(default)]
    pub signal_threshold: Threshold,
    /// Per-occupation overrides of `signal_threshold`.
    #[serde(default)]
    pub occupation_thresholds: BTreeMap<String, Threshold>,
    #[serde(default = "never")]
    pub self_threshold: Threshold,
    #[serde(default)]
    pub drop_delimiter: bool,
    #[serde(skip, default = "OccupationLexicon::builtin")]
    pub occupations: OccupationLexicon,
}

fn never() -> Threshold {
    Threshold::Never
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            mode: MockMode::Gendered,
            bias: BTreeMap::new(),
            signal_threshold: Threshold::At(1),
            occupation_thresholds: BTreeMap::new(),
            self_threshold: Threshold::Never,
            drop_delimiter: false,
            occupations: OccupationLexicon::builtin(),
        }
    }
}

impl MockConfig {
    pub fn identity() -> Self {
        Self {
            mode: MockMode::Identity,
            ..Self::default()
        }
    }

    pub fn gendered<S: AsRef<str>>(bias: impl IntoIterator<Item = (S, Gender)>, k: Threshold) -> Self {
        Self {
            bias: bias.into_iter().map(|(o, g)| (o.as_ref().to_lowercase(), g)).collect(),
            signal_threshold: k,
            ..Self::default()
        }
    }

    fn threshold_for(&self, occupation: &str) -> Threshold {
        self.occupation_thresholds
            .get(occupation)
            .copied()
            .unwrap_or(self.signal_threshold)
    }

    fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(format!("{:?}", self.occupations));
        hex::encode(&h.finalize()[..12])
    }
}

struct Dictionary {
    words: &'static [(&'static str, &'static str)],
    pronouns: &'static [(&'static str, &'static str, &'static str)],
    definite: (&'static str, &'static str),
    indefinite: (&'static str, &'static str),
    elide: bool,
}

// (english, male rendering, female rendering) for gendered English words
const DE: Dictionary = Dictionary {
    words: &[
        ("is", "ist"), ("was", "war"), ("are", "sind"), ("kind", "nett"), ("slept", "schlief"),
        ("said", "sagte"), ("that", "dass"), ("tired", "müde"), ("late", "spät"), ("in", "in"),
        ("next", "nächsten"), ("sentence", "Satz"), ("following", "folgenden"),
        ("previous", "vorherigen"), ("statement", "Aussage"), ("and", "und"), ("who", "der"),
        ("works", "arbeitet"), ("hard", "hart"), ("uses", "benutzt"), ("using", "mit"),
        ("pronouns", "Pronomen"), ("identifies", "identifiziert"), ("as", "als"),
        ("loves", "liebt"), ("job", "Beruf"), ("work", "Arbeit"), ("everyone", "alle"),
        ("likes", "mag"), ("because", "weil"), ("the", "die"), ("a", "ein"), ("an", "ein"),
        ("finished", "beendete"), ("report", "Bericht"), ("helped", "half"), ("client", "Kunden"),
        ("arrived", "kam"), ("early", "früh"), ("today", "heute"), ("left", "ging"),
        ("asked", "fragte"), ("about", "über"), ("wanted", "wollte"), ("to", "zu"),
        ("help", "helfen"), ("with", "mit"), ("of", "von"), ("from", "aus"), ("very", "sehr"),
        ("good", "gut"), ("professional", "Profi"), ("person", "Person"), ("friendly", "freundlich"),
        ("town", "Stadt"), ("best", "besten"), ("one", "eine"), ("family", "Familie"),
        ("name", "Namen"), ("calls", "nennt"), ("by", "bei"), ("told", "erzählte"), ("us", "uns"),
    ],
    pronouns: &[
        ("he", "er", "sie"), ("she", "er", "sie"), ("him", "ihn", "sie"), ("her", "ihn", "sie"),
        ("his", "sein", "ihr"), ("hers", "seins", "ihres"), ("himself", "sich", "sich"),
        ("herself", "sich", "sich"), ("man", "Mann", "Frau"), ("woman", "Mann", "Frau"),
        ("guy", "Kerl", "Mädel"), ("gal", "Kerl", "Mädel"), ("male", "männlich", "weiblich"),
        ("female", "männlich", "weiblich"), ("men", "Männer", "Frauen"), ("women", "Männer", "Frauen"),
    ],
    definite: ("der", "die"),
    indefinite: ("ein", "eine"),
    elide: false,
};

const FR: Dictionary = Dictionary {
    words: &[
        ("is", "est"), ("was", "était"), ("are", "sont"), ("kind", "gentil"), ("slept", "dormait"),
        ("said", "a dit"), ("that", "que"), ("tired", "fatigué"), ("late", "en retard"),
        ("in", "dans"), ("next", "suivante"), ("sentence", "phrase"), ("following", "suivante"),
        ("previous", "précédente"), ("statement", "déclaration"), ("and", "et"), ("who", "qui"),
        ("works", "travaille"), ("hard", "dur"), ("using", "avec"), ("pronouns", "pronoms"),
        ("identifies", "identifie"), ("as", "comme"), ("loves", "aime"), ("job", "métier"),
        ("work", "travail"), ("everyone", "tout le monde"), ("likes", "aime"),
        ("because", "parce que"), ("the", "le"), ("a", "un"), ("an", "un"),
        ("finished", "a fini"), ("report", "rapport"), ("helped", "a aidé"), ("client", "client"),
        ("arrived", "est arrivé"), ("early", "tôt"), ("today", "aujourd'hui"), ("left", "est parti"),
        ("asked", "a demandé"), ("about", "sur"), ("wanted", "voulait"), ("to", "à"),
        ("help", "aider"), ("with", "avec"), ("of", "de"), ("from", "de"), ("very", "très"),
        ("good", "bon"), ("professional", "professionnel"), ("person", "personne"),
        ("friendly", "sympathique"), ("town", "ville"), ("family", "famille"), ("name", "nom"),
        ("told", "a raconté"), ("us", "nous"),
    ],
    pronouns: &[
        ("he", "il", "elle"), ("she", "il", "elle"), ("him", "le", "la"), ("her", "le", "la"),
        ("his", "son", "sa"), ("hers", "le sien", "la sienne"), ("himself", "lui-même", "elle-même"),
        ("herself", "lui-même", "elle-même"), ("man", "homme", "femme"), ("woman", "homme", "femme"),
        ("guy", "gars", "nana"), ("gal", "gars", "nana"), ("male", "masculin", "féminin"),
        ("female", "masculin", "féminin"), ("men", "hommes", "femmes"), ("women", "hommes", "femmes"),
    ],
    definite: ("le", "la"),
    indefinite: ("un", "une"),
    elide: true,
};

const ES: Dictionary = Dictionary {
    words: &[
        ("is", "es"), ("was", "estaba"), ("are", "son"), ("kind", "amable"), ("slept", "durmió"),
        ("said", "dijo"), ("that", "que"), ("tired", "cansado"), ("late", "tarde"), ("in", "en"),
        ("next", "siguiente"), ("sentence", "frase"), ("following", "siguiente"),
        ("previous", "anterior"), ("statement", "declaración"), ("and", "y"), ("who", "quien"),
        ("works", "trabaja"), ("hard", "duro"), ("using", "con"), ("pronouns", "pronombres"),
        ("identifies", "identifica"), ("as", "como"), ("loves", "ama"), ("job", "trabajo"),
        ("work", "trabajo"), ("everyone", "todos"), ("likes", "gusta"), ("because", "porque"),
        ("the", "el"), ("a", "un"), ("an", "un"), ("finished", "terminó"), ("report", "informe"),
        ("helped", "ayudó"), ("client", "cliente"), ("arrived", "llegó"), ("early", "temprano"),
        ("today", "hoy"), ("left", "salió"), ("asked", "preguntó"), ("about", "sobre"),
        ("wanted", "quería"), ("to", "a"), ("help", "ayudar"), ("with", "con"), ("of", "de"),
        ("from", "de"), ("very", "muy"), ("good", "bueno"), ("professional", "profesional"),
        ("person", "persona"), ("friendly", "simpático"), ("town", "ciudad"), ("family", "familia"),
        ("name", "nombre"), ("told", "contó"), ("us", "nos"),
    ],
    pronouns: &[
        ("he", "él", "ella"), ("she", "él", "ella"), ("him", "lo", "la"), ("her", "lo", "la"),
        ("his", "su", "su"), ("hers", "suyo", "suya"), ("himself", "sí mismo", "sí misma"),
        ("herself", "sí mismo", "sí misma"), ("man", "hombre", "mujer"), ("woman", "hombre", "mujer"),
        ("guy", "tipo", "chica"), ("gal", "tipo", "chica"), ("male", "masculino", "femenino"),
        ("female", "masculino", "femenino"), ("men", "hombres", "mujeres"), ("women", "hombres", "mujeres"),
    ],
    definite: ("el", "la"),
    indefinite: ("un", "una"),
    elide: false,
};

fn dictionary(lang: &str) -> Option<&'static Dictionary> {
    match lang {
        "de" => Some(&DE),
        "fr" => Some(&FR),
        "es" => Some(&ES),
        _ => None,
    }
}

/// The mock model. Stateless apart from its configuration.
pub struct MockTranslator {
    cfg: MockConfig,
    english: GenderLexicon,
    // occupation phrases, longest first
    phrases: Vec<(String, Vec<String>)>,
    id: String,
}

impl MockTranslator {
    pub fn new(cfg: MockConfig) -> Self {
        let english = GenderLexicons::builtin()
            .get("en")
            .expect("builtin English lexicon")
            .clone();
        let mut phrases: Vec<(String, Vec<String>)> = cfg
            .occupations
            .occupations()
            .map(|o| (o.to_string(), text::phrase_words(o)))
            .collect();
        phrases.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
        let id = format!("mock:{}", cfg.fingerprint());
        Self {
            cfg,
            english,
            phrases,
            id,
        }
    }

    pub fn config(&self) -> &MockConfig {
        &self.cfg
    }

    /// Translates one string.
    pub fn translate(&self, text: &str, pair: &LangPair) -> Result<String, BackendError> {
        if self.cfg.mode == MockMode::Identity {
            return Ok(text.to_string());
        }
        if pair.src != "en" {
            return Err(BackendError::UnsupportedPair(pair.clone()));
        }
        let dict = dictionary(&pair.tgt).ok_or_else(|| BackendError::UnsupportedPair(pair.clone()))?;

        let (segments, separators) = split_segments(text);
        let counts: Vec<(usize, usize)> = segments.iter().map(|s| self.signal_counts(s)).collect();
        let mut out = String::new();
        for (i, seg) in segments.iter().enumerate() {
            if i > 0 {
                if self.cfg.drop_delimiter {
                    out.push(' ');
                } else {
                    out.push(' ');
                    out.push(separators[i - 1]);
                    out.push(' ');
                }
            }
            let others = counts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold((0, 0), |acc, (_, c)| (acc.0 + c.0, acc.1 + c.1));
            out.push_str(&self.translate_segment(seg, others, counts[i], &pair.tgt, dict)?);
        }
        Ok(out)
    }

    /// (male, female) signal-token counts.
    fn signal_counts(&self, segment: &str) -> (usize, usize) {
        let mut m = 0;
        let mut f = 0;
        for tok in segment.split_whitespace() {
            let genders: Vec<Gender> = text::words(tok)
                .iter()
                .filter_map(|w| self.english.evidence(&w.lower))
                .collect();
            if genders.contains(&Gender::Male) {
                m += 1;
            }
            if genders.contains(&Gender::Female) {
                f += 1;
            }
        }
        (m, f)
    }

    fn occupation_gender(
        &self,
        occupation: &str,
        others: (usize, usize),
        own: (usize, usize),
    ) -> Result<Gender, BackendError> {
        let decide = |(m, f): (usize, usize), k: Threshold| {
            if m > f && k.reached_by(m) {
                Some(Gender::Male)
            } else if f > m && k.reached_by(f) {
                Some(Gender::Female)
            } else {
                None
            }
        };
        if let Some(g) = decide(others, self.cfg.threshold_for(occupation)) {
            return Ok(g);
        }
        if let Some(g) = decide(own, self.cfg.self_threshold) {
            return Ok(g);
        }
        match self.cfg.bias.get(occupation) {
            Some(g) if g.is_known() => Ok(*g),
            _ => Err(BackendError::UnknownOccupation(occupation.to_string())),
        }
    }

    fn translate_segment(
        &self,
        segment: &str,
        others: (usize, usize),
        own: (usize, usize),
        tgt: &str,
        dict: &Dictionary,
    ) -> Result<String, BackendError> {
        let words = text::words(segment);
        // (first word, past-last word, replacement)
        let mut edits: Vec<(usize, usize, String)> = Vec::new();
        let mut i = 0;
        while i < words.len() {
            if let Some((occ, len)) = self.match_occupation(&words[i..]) {
                let forms = self
                    .cfg
                    .occupations
                    .forms(occ, tgt)
                    .ok_or_else(|| BackendError::UnknownOccupation(occ.to_string()))?;
                let gender = self.occupation_gender(occ, others, own)?;
                let noun = forms.form(gender).expect("known gender").to_string();
                let article = i
                    .checked_sub(1)
                    .filter(|&p| matches!(words[p].lower.as_str(), "the" | "a" | "an"))
                    .filter(|&p| edits.last().is_none_or(|e| e.1 <= p || e.0 == p));
                match article {
                    Some(p) => {
                        let definite = words[p].lower == "the";
                        let (m, f) = if definite { dict.definite } else { dict.indefinite };
                        let art = if gender == Gender::Male { m } else { f };
                        let starts_vowel = noun
                            .chars()
                            .next()
                            .is_some_and(|c| "aeiouhéèêàâîôûAEIOUHÉ".contains(c));
                        let phrase = if dict.elide && definite && starts_vowel {
                            format!("l'{noun}")
                        } else {
                            format!("{art} {noun}")
                        };
                        let phrase = match_case(segment_word(segment, &words[p]), &phrase);
                        if edits.last().is_some_and(|e| e.0 == p) {
                            edits.pop();
                        }
                        edits.push((p, i + len, phrase));
                    }
                    None => edits.push((i, i + len, noun)),
                }
                i += len;
                continue;
            }
            let w = &words[i];
            let surface = segment_word(segment, w);
            let pronoun = dict.pronouns.iter().find(|(en, _, _)| *en == w.lower);
            let replacement = match pronoun {
                Some((en, m, f)) => {
                    let g = self.english.evidence(en).unwrap_or(Gender::Male);
                    Some(if g == Gender::Female { *f } else { *m })
                }
                None => dict.words.iter().find(|(en, _)| *en == w.lower).map(|(_, t)| *t),
            };
            if let Some(t) = replacement {
                edits.push((i, i + 1, match_case(surface, t)));
            }
            i += 1;
        }

        let mut out = String::with_capacity(segment.len() + 16);
        let mut cursor = 0;
        for (first, last, replacement) in edits {
            out.push_str(&segment[cursor..words[first].start]);
            out.push_str(&replacement);
            cursor = words[last - 1].end;
        }
        out.push_str(&segment[cursor..]);
        Ok(out)
    }

    fn match_occupation<'a>(&'a self, words: &[Word]) -> Option<(&'a str, usize)> {
        self.phrases.iter().find_map(|(occ, phrase)| {
            (phrase.len() <= words.len() && phrase.iter().zip(words).all(|(p, w)| *p == w.lower))
                .then_some((occ.as_str(), phrase.len()))
        })
    }
}

fn segment_word<'a>(segment: &'a str, w: &Word) -> &'a str {
    &segment[w.start..w.end]
}

/// Capitalizes `translated` when `source` starts with an uppercase letter.
fn match_case(source: &str, translated: &str) -> String {
    if source.chars().next().is_some_and(char::is_uppercase) {
        text::capitalize(translated)
    } else {
        translated.to_string()
    }
}

/// Splits at whitespace-delimited delimiter tokens. Returns the trimmed
/// segments and the separator literals between them.
fn split_segments(input: &str) -> (Vec<&str>, Vec<char>) {
    let mut segments = Vec::new();
    let mut separators = Vec::new();
    let mut seg_start = 0;
    let mut pos = 0;
    for tok in input.split_whitespace() {
        let at = pos + input[pos..].find(tok).expect("token from input");
        pos = at + tok.len();
        let mut chars = tok.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if Delimiter::from_literal(c).is_some() {
                segments.push(input[seg_start..at].trim());
                separators.push(c);
                seg_start = pos;
            }
        }
    }
    segments.push(input[seg_start..].trim());
    (segments, separators)
}

/// Translates one string under `cfg`. Builds a fresh translator, so prefer
/// [`MockTranslator`] for repeated calls.
pub fn mock_translate(cfg: &MockConfig, text: &str, pair: &LangPair) -> Result<String, BackendError> {
    MockTranslator::new(cfg.clone()).translate(text, pair)
}

impl TranslationBackend for MockTranslator {
    fn cache_id(&self) -> String {
        self.id.clone()
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, BackendError> {
        req.texts.iter().map(|t| self.translate(t, &req.pair)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn de() -> LangPair {
        LangPair::new("en", "de")
    }

    fn nurse_female(k: Threshold) -> MockTranslator {
        MockTranslator::new(MockConfig::gendered([("nurse".to_string(), Gender::Female)], k))
    }

    #[test]
    fn identity_mode_echoes() {
        let m = MockTranslator::new(MockConfig::identity());
        let req = TranslationRequest::single("hello", de());
        assert_eq!(m.translate_batch(&req).unwrap(), ["hello"]);
    }

    #[test]
    fn gendered_examples() {
        let m = nurse_female(Threshold::At(1));
        assert_eq!(m.translate("The nurse slept.", &de()).unwrap(), "Die Krankenschwester schlief.");
        assert_eq!(
            m.translate("She is kind. # The nurse slept.", &de()).unwrap(),
            "Sie ist nett. # Die Krankenschwester schlief."
        );
        assert_eq!(
            m.translate("He is kind. # The nurse slept.", &de()).unwrap(),
            "Er ist nett. # Der Krankenpfleger schlief."
        );
    }

    #[test]
    fn in_sentence_pronoun_does_not_override_bias() {
        let m = nurse_female(Threshold::At(1));
        let out = m.translate("The nurse said he was tired.", &de()).unwrap();
        assert!(out.starts_with("Die Krankenschwester"), "{out}");
    }

    #[test]
    fn threshold_gates_context() {
        let never = nurse_female(Threshold::Never);
        let out = never.translate("He is a man. # The nurse slept.", &de()).unwrap();
        assert!(out.ends_with("Die Krankenschwester schlief."), "{out}");

        let two = nurse_female(Threshold::At(2));
        let out = two.translate("He is kind. # The nurse slept.", &de()).unwrap();
        assert!(out.ends_with("Die Krankenschwester schlief."), "{out}");
        let out = two.translate("He is a man. # The nurse slept.", &de()).unwrap();
        assert!(out.ends_with("Der Krankenpfleger schlief."), "{out}");
    }

    #[test]
    fn drop_delimiter_removes_separator() {
        let mut cfg = MockConfig::gendered([("nurse".to_string(), Gender::Female)], Threshold::At(1));
        cfg.drop_delimiter = true;
        let out = mock_translate(&cfg, "She is kind. # The nurse slept.", &de()).unwrap();
        assert_eq!(out, "Sie ist nett. Die Krankenschwester schlief.");
    }

    #[test]
    fn french_elision_and_spanish() {
        let m = nurse_female(Threshold::At(1));
        assert_eq!(m.translate("The nurse slept.", &LangPair::new("en", "fr")).unwrap(), "L'infirmière dormait.");
        assert_eq!(
            m.translate("He is kind. # The nurse slept.", &LangPair::new("en", "es")).unwrap(),
            "Él es amable. # El enfermero durmió."
        );
    }

    #[test]
    fn errors() {
        let m = nurse_female(Threshold::At(1));
        assert!(matches!(
            m.translate("The doctor slept.", &de()),
            Err(BackendError::UnknownOccupation(o)) if o == "doctor"
        ));
        assert!(matches!(
            m.translate("The nurse slept.", &LangPair::new("en", "ja")),
            Err(BackendError::UnsupportedPair(_))
        ));
        // no occupation at all is fine
        assert_eq!(m.translate("She is kind.", &de()).unwrap(), "Sie ist nett.");
    }

    #[test]
    fn per_occupation_threshold_and_multiword() {
        let mut cfg = MockConfig::gendered(
            [("nurse".to_string(), Gender::Female), ("construction worker".to_string(), Gender::Male)],
            Threshold::At(1),
        );
        cfg.occupation_thresholds.insert("nurse".into(), Threshold::At(3));
        let m = MockTranslator::new(cfg);
        let out = m.translate("She is a woman. # The construction worker and the nurse slept.", &de()).unwrap();
        assert!(out.contains("Die Bauarbeiterin"), "{out}");
        assert!(out.contains("die Krankenschwester"), "{out}");
        let out = m.translate("He is a man. # The nurse slept.", &de()).unwrap();
        assert!(out.contains("Die Krankenschwester"), "{out}");
    }

    #[test]
    fn threshold_serde() {
        let t: Threshold = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(t, Threshold::Never);
        let t: Threshold = serde_json::from_str("3").unwrap();
        assert_eq!(t, Threshold::At(3));
        assert!(serde_json::from_str::<Threshold>("0").is_err());
        assert_eq!(serde_json::to_string(&Threshold::Never).unwrap(), "\"inf\"");
    }

    #[test]
    fn cache_id_tracks_config() {
        let a = nurse_female(Threshold::At(1));
        let b = nurse_female(Threshold::At(2));
        assert_ne!(a.cache_id(), b.cache_id());
        assert_eq!(a.cache_id(), nurse_female(Threshold::At(1)).cache_id());
    }
}
