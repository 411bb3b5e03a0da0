//! Prunes templates whose standalone translation loses the intended gender.

use ctxdebias::backend::{LangPair, MockConfig, MockMode, MockTranslator, Threshold};
use ctxdebias::gender::Gender;
use ctxdebias::tagger::LexiconTagger;
use ctxdebias::template::{prune_bank, TemplateBank};

fn main() {
    let bank = TemplateBank::builtin_relevant();
    let tagger = LexiconTagger::builtin();
    let probes = vec!["doctor".to_string(), "nurse".to_string()];
    let pair = LangPair::new("en", "de");

    let stereotyped = MockConfig::gendered([("doctor", Gender::Male), ("nurse", Gender::Female)], Threshold::At(1));
    let honest = MockConfig {
        self_threshold: Threshold::At(1),
        ..stereotyped.clone()
    };
    let kept = prune_bank(&bank, &MockTranslator::new(honest), &pair, &tagger, &probes).unwrap();
    println!("self-signal mock keeps {} of {}", kept.len(), bank.len());

    let biased = MockTranslator::new(stereotyped);
    let kept = prune_bank(&bank, &biased, &pair, &tagger, &probes).unwrap();
    println!("bias-only mock keeps {} of {}", kept.len(), bank.len());

    let identity = MockConfig {
        mode: MockMode::Identity,
        ..MockConfig::default()
    };
    let kept = prune_bank(&bank, &MockTranslator::new(identity), &LangPair::new("en", "en"), &tagger, &probes);
    println!("identity backend: {:?}", kept.map(|b| b.len()));
}
