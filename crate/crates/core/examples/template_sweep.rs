//! Applies every template to every sample and reports A, A_C, A_all, C_U,
//! C_L and feature correlations.

use ctxdebias::backend::{LangPair, MockConfig, MockTranslator, Threshold};
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::corpus::Sample;
use ctxdebias::engine::{apply_all, EngineConfig, EngineSettings, SignalMode};
use ctxdebias::gender::Gender;
use ctxdebias::metrics;
use ctxdebias::tagger::LexiconTagger;
use ctxdebias::template::TemplateBank;

fn main() {
    let mut thresholds = std::collections::BTreeMap::new();
    thresholds.insert("nurse".to_string(), Threshold::At(2));
    let mut cfg = MockConfig::gendered([("nurse", Gender::Female), ("doctor", Gender::Male)], Threshold::At(1));
    cfg.occupation_thresholds = thresholds;
    let backend = MockTranslator::new(cfg);
    let samples: Vec<Sample> = [
        ("The nurse said he was tired.", "nurse", Gender::Male),
        ("The nurse said she was tired.", "nurse", Gender::Female),
        ("The doctor said she was late.", "doctor", Gender::Female),
        ("The doctor said he was late.", "doctor", Gender::Male),
    ]
    .iter()
    .enumerate()
    .map(|(i, (t, o, g))| Sample::new(format!("s{i}"), *t, *o, *g, "demo").unwrap())
    .collect();
    let bank = TemplateBank::builtin_relevant();
    let engine = EngineConfig::new(EngineSettings::new(LangPair::new("en", "de"), Delimiter::Hash, Position::Prepend));
    let m = apply_all(&samples, &bank, &backend, &engine, &LexiconTagger::builtin(), SignalMode::CorrectGender);

    let gold: Vec<Gender> = samples.iter().map(|s| s.gold_gender).collect();
    let base: Vec<Gender> = m.baselines.iter().map(|b| b.gender).collect();
    let all: Vec<usize> = (0..bank.len()).collect();
    println!("A     = {:.2}", metrics::accuracy::<u8>(&base, &gold, None).unwrap().mean);
    println!("A_C   = {:.2}", metrics::accuracy::<u8>(&m.greedy_replay(&all), &gold, None).unwrap().mean);
    let a_all = metrics::average_accuracy(&m).unwrap();
    println!("A_all = {:.2} (std {:.2})", a_all.mean, a_all.std.unwrap_or(0.0));
    let cov = metrics::coverage(&m).unwrap().expect("biased samples present");
    println!("C_U   = {:.2}, C_L = {:.2} over {} biased samples", cov.upper, cov.lower, cov.biased);

    let acc = metrics::per_template_accuracy(&m).unwrap();
    let s: Vec<f64> = bank.iter().map(|t| t.features.signals as f64).collect();
    println!("pearson(s, accuracy) = {:?}", metrics::pearson(&s, &acc).unwrap());
}
