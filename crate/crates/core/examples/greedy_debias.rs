//! Greedy search over the template bank for a handful of samples.

use ctxdebias::backend::{LangPair, MockConfig, MockTranslator, Threshold};
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::corpus::Sample;
use ctxdebias::engine::{run_greedy, EngineConfig, EngineSettings};
use ctxdebias::gender::Gender;
use ctxdebias::tagger::LexiconTagger;
use ctxdebias::template::TemplateBank;

fn main() {
    let backend = MockTranslator::new(MockConfig::gendered(
        [("nurse", Gender::Female), ("engineer", Gender::Male)],
        Threshold::At(1),
    ));
    let samples = vec![
        Sample::new("s1", "The nurse said he was tired.", "nurse", Gender::Male, "demo").unwrap(),
        Sample::new("s2", "The nurse said she was tired.", "nurse", Gender::Female, "demo").unwrap(),
        Sample::new("s3", "The engineer said she was late.", "engineer", Gender::Female, "demo").unwrap(),
    ];
    let cfg = EngineConfig::new(EngineSettings::new(LangPair::new("en", "de"), Delimiter::Hash, Position::Prepend));
    let outcomes = run_greedy(&samples, &TemplateBank::builtin_relevant(), &backend, &cfg, &LexiconTagger::builtin());
    for o in outcomes {
        println!(
            "{}: {:?} via {:?} after {} calls\n  baseline: {}\n  final:    {}",
            o.sample_id,
            o.status,
            o.chosen_template,
            o.translation_calls,
            o.baseline_translation.unwrap_or_default(),
            o.final_translation.unwrap_or_default()
        );
    }
}
