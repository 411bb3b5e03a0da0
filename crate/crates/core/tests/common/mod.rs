#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxdebias::backend::{LangPair, MockConfig, MockTranslator, Threshold};
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::corpus::Sample;
use ctxdebias::engine::{EngineConfig, EngineSettings};
use ctxdebias::gender::Gender;
use ctxdebias::tagger::{LexiconTagger, OccupationLexicon};
use ctxdebias::template::{PlaceholderTable, TemplateBank};

pub const M: Gender = Gender::Male;
pub const F: Gender = Gender::Female;
pub const U: Gender = Gender::Unknown;

/// Occupations whose masculine and feminine forms differ in every mock
/// target language, in lexicon order.
pub fn distinct_occupations() -> Vec<String> {
    let lex = OccupationLexicon::builtin();
    lex.occupations()
        .filter(|o| {
            ["de", "fr", "es"].iter().all(|l| {
                lex.forms(o, l)
                    .map(|f| f.form(M).is_some() && f.form(M) != f.form(F))
                    .unwrap_or(false)
            })
        })
        .map(str::to_string)
        .collect()
}

pub fn pronoun(g: Gender) -> &'static str {
    match g {
        Gender::Male => "he",
        Gender::Female => "she",
        Gender::Unknown => "they",
    }
}

pub fn sample(id: &str, occupation: &str, gold: Gender) -> Sample {
    let text = format!("The {occupation} said that {} was tired.", pronoun(gold));
    Sample::new(id, text, occupation, gold, "synthetic").unwrap()
}

/// The balanced corpus: `n_occ` occupations with alternating stereotype
/// bias, one male and one female sample each, so exactly half of the
/// samples contradict the stereotype.
pub struct Balanced {
    pub samples: Vec<Sample>,
    pub bias: BTreeMap<String, Gender>,
    pub occupations: Vec<String>,
}

pub fn balanced(n_occ: usize) -> Balanced {
    let occupations: Vec<String> = distinct_occupations().into_iter().take(n_occ).collect();
    assert_eq!(occupations.len(), n_occ, "lexicon has too few gender-distinct occupations");
    let mut samples = Vec::new();
    let mut bias = BTreeMap::new();
    for (i, o) in occupations.iter().enumerate() {
        bias.insert(o.clone(), if i % 2 == 0 { M } else { F });
        samples.push(sample(&format!("{o}-m"), o, M));
        samples.push(sample(&format!("{o}-f"), o, F));
    }
    Balanced {
        samples,
        bias,
        occupations,
    }
}

pub fn mock(bias: &BTreeMap<String, Gender>, k: Threshold) -> MockTranslator {
    MockTranslator::new(MockConfig::gendered(bias.iter().map(|(o, g)| (o.as_str(), *g)), k))
}

pub fn engine(tgt: &str) -> EngineConfig {
    EngineConfig::new(EngineSettings::new(LangPair::new("en", tgt), Delimiter::Hash, Position::Prepend))
}

pub fn tagger() -> LexiconTagger {
    LexiconTagger::builtin()
}

pub fn bank_from(rows: &[(&str, &str, &str)]) -> TemplateBank {
    let tsv: String = rows.iter().map(|(id, kind, p)| format!("{id}\t{kind}\t{p}\n")).collect();
    TemplateBank::parse(&tsv, PlaceholderTable::builtin()).unwrap()
}

/// Relevant templates with one, two and three signal tokens, three of each.
pub fn graded_bank() -> TemplateBank {
    bank_from(&[
        ("s1-a", "relevant", "The {occupation} in the next sentence is {sbj-prn}."),
        ("s1-b", "relevant", "Everyone trusts the {occupation} and likes {obj-prn}."),
        ("s1-c", "relevant", "The {occupation} in the next sentence loves {pos-prn} job."),
        ("s2-a", "relevant", "{sbj-prn} is the {occupation} and {sbj-prn} works hard."),
        ("s2-b", "relevant", "The {occupation} loves {pos-prn} job and {sbj-prn} works hard."),
        ("s2-c", "relevant", "{sbj-prn} is the {occupation} and everyone trusts {obj-prn}."),
        ("s3-a", "relevant", "{sbj-prn} is the {occupation} and {sbj-prn} loves {pos-prn} job."),
        ("s3-b", "relevant", "{sbj-prn} said the {occupation} is {obj-prn} and {sbj-prn} agreed."),
        ("s3-c", "relevant", "The {occupation} said {sbj-prn} loves {pos-prn} job and {pos-prn} team."),
    ])
}

pub struct World {
    pub samples: Vec<Sample>,
    pub backend: MockTranslator,
    pub bank: TemplateBank,
    pub engine: EngineConfig,
}

/// A randomly configured mock world: bias, thresholds, delimiter damage,
/// sentences (some untaggable on even seeds), bank subset and language.
pub fn random_world(seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = distinct_occupations();
    let occs: Vec<String> = (0..5).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect();
    let thresholds = [Threshold::At(1), Threshold::At(2), Threshold::At(3), Threshold::Never];
    let bias: Vec<(&str, Gender)> = occs
        .iter()
        .map(|o| (o.as_str(), if rng.random_bool(0.5) { M } else { F }))
        .collect();
    let mut cfg = MockConfig::gendered(bias, thresholds[rng.random_range(0..4)]);
    for o in &occs {
        if rng.random_bool(0.3) {
            cfg.occupation_thresholds.insert(o.clone(), thresholds[rng.random_range(0..4)]);
        }
    }
    cfg.self_threshold = [Threshold::Never, Threshold::At(1), Threshold::At(2)][rng.random_range(0..3)];
    cfg.drop_delimiter = rng.random_bool(0.1);

    let n = rng.random_range(6..=16);
    let samples = (0..n)
        .map(|i| {
            let o = &occs[rng.random_range(0..occs.len())];
            let g = if rng.random_bool(0.5) { M } else { F };
            let (p, pos) = if g == M { ("he", "his") } else { ("she", "her") };
            let variants = if seed.is_multiple_of(2) { 4 } else { 3 };
            let text = match rng.random_range(0..variants) {
                0 => format!("The {o} said that {p} was tired."),
                1 => format!("Yesterday the {o} finished {pos} shift early."),
                2 => format!("The {o} told us that {p} would come."),
                _ => format!("The {o} slept."),
            };
            Sample::new(format!("w{seed}-{i}"), text, o.as_str(), g, "random").unwrap()
        })
        .collect();

    let all = TemplateBank::builtin_relevant().concat(&TemplateBank::builtin_irrelevant()).unwrap();
    let k = rng.random_range(1..=8);
    let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, all.len(), k).into_vec();
    idx.sort_unstable();
    let tgt = ["de", "fr", "es"][rng.random_range(0..3)];
    let delimiter = Delimiter::ALL[rng.random_range(0..4)];
    let position = if rng.random_bool(0.5) { Position::Prepend } else { Position::Append };
    World {
        samples,
        backend: MockTranslator::new(cfg),
        bank: all.subset(&idx),
        engine: EngineConfig::new(EngineSettings::new(LangPair::new("en", tgt), delimiter, position)),
    }
}
