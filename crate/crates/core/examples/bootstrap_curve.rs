//! A_C as a function of bank size, estimated by seeded bootstrap over
//! template subsets.

use ctxdebias::backend::{LangPair, MockConfig, MockTranslator, Threshold};
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::corpus::Sample;
use ctxdebias::engine::{apply_all, EngineConfig, EngineSettings, SignalMode};
use ctxdebias::gender::Gender;
use ctxdebias::metrics::bootstrap_subsets;
use ctxdebias::tagger::LexiconTagger;
use ctxdebias::template::TemplateBank;

fn main() {
    let occupations = ["nurse", "doctor", "baker", "lawyer", "teacher"];
    let mut cfg = MockConfig::gendered(occupations.iter().map(|o| (*o, Gender::Female)), Threshold::At(1));
    for (i, o) in occupations.iter().enumerate() {
        cfg.occupation_thresholds.insert(o.to_string(), Threshold::At(i as u32 + 1));
    }
    let backend = MockTranslator::new(cfg);
    let samples: Vec<Sample> = occupations
        .iter()
        .map(|o| Sample::new(*o, format!("The {o} said he was busy."), *o, Gender::Male, "demo").unwrap())
        .collect();
    let bank = TemplateBank::builtin_relevant();
    let engine = EngineConfig::new(EngineSettings::new(LangPair::new("en", "es"), Delimiter::Hash, Position::Prepend));
    let m = apply_all(&samples, &bank, &backend, &engine, &LexiconTagger::builtin(), SignalMode::CorrectGender);
    let sizes: Vec<usize> = (1..=bank.len()).step_by(4).collect();
    for p in bootstrap_subsets(&m, &sizes, 50, 7).unwrap() {
        println!("|T|={:<3} A_C = {:6.2} +- {:.2}", p.size, p.mean, p.std);
    }
}
