//! Counterfactual sensitivity: every template rendered with both genders.

use ctxdebias::backend::{LangPair, MockConfig, MockTranslator, Threshold};
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::corpus::Sample;
use ctxdebias::engine::{apply_all, EngineConfig, EngineSettings, SignalMode};
use ctxdebias::gender::Gender;
use ctxdebias::metrics;
use ctxdebias::tagger::LexiconTagger;
use ctxdebias::template::TemplateBank;

fn main() {
    let backend = MockTranslator::new(MockConfig::gendered(
        [("nurse", Gender::Female), ("doctor", Gender::Male), ("baker", Gender::Male)],
        Threshold::At(2),
    ));
    let samples = vec![
        Sample::new("a", "The nurse slept.", "nurse", Gender::Female, "demo").unwrap(),
        Sample::new("b", "The doctor ate.", "doctor", Gender::Male, "demo").unwrap(),
        Sample::new("c", "The baker sang.", "baker", Gender::Male, "demo").unwrap(),
    ];
    let engine = EngineConfig::new(EngineSettings::new(LangPair::new("en", "fr"), Delimiter::Period, Position::Prepend));
    let bank = TemplateBank::builtin_relevant();
    let m = apply_all(&samples, &bank, &backend, &engine, &LexiconTagger::builtin(), SignalMode::Counterfactual);
    let css = metrics::css(&m).unwrap();
    for (s, score) in samples.iter().zip(&css.per_sample) {
        println!("{:<20} CSS = {score:.3}", s.text);
    }
    println!("mean {:.3}, std {:.3}", css.mean, css.std);
    println!("{:?}", metrics::sensitivity_bins(&css.per_sample));
}
