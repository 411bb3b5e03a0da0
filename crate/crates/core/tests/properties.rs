mod common;

use proptest::prelude::*;

use ctxdebias::backend::{
    mock_translate, translate_batch, CachedBackend, DiskCache, LangPair, MockConfig, MockTranslator, Threshold,
    TranslationRequest,
};
use ctxdebias::context::{compose, strip, Delimiter, Position};
use ctxdebias::engine::{apply_all, run_greedy, OutcomeStatus, SignalMode};
use ctxdebias::gender::Gender;
use ctxdebias::metrics::{self, corpus_bleu};
use ctxdebias::tagger::GenderTagger;
use ctxdebias::template::{prune_bank, TemplateBank};
use ctxdebias::text;

use common::*;

fn delimiter() -> impl Strategy<Value = Delimiter> {
    prop::sample::select(Delimiter::ALL.to_vec())
}

fn position() -> impl Strategy<Value = Position> {
    prop::sample::select(vec![Position::Prepend, Position::Append])
}

fn word() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9#.:;'!,äöü]{1,8}".prop_filter("standalone delimiter", |w| !matches!(w.as_str(), "#" | "." | ":" | ";"))
}

fn phrase() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..10).prop_map(|w| w.join(" "))
}

fn gender() -> impl Strategy<Value = Gender> {
    prop::sample::select(vec![M, F])
}

fn occupation() -> impl Strategy<Value = String> {
    prop::sample::select(distinct_occupations())
}

fn sentence() -> impl Strategy<Value = String> {
    (occupation(), prop::sample::select(vec!["he", "she", "they"]), prop::sample::select(vec!["slept", "ate", "left"]))
        .prop_map(|(o, p, v)| format!("The {o} {v} because {p} was tired."))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compose_strip_round_trips(ctx in phrase(), payload in phrase(), d in delimiter(), p in position()) {
        let c = compose(&payload, &ctx, d, p).unwrap();
        prop_assert_eq!(strip(&c.text, d, p).unwrap(), payload);
    }

    #[test]
    fn mock_is_pure(text in sentence(), tgt in prop::sample::select(vec!["de", "fr", "es"])) {
        let cfg = MockConfig::gendered(distinct_occupations().iter().map(|o| (o.as_str(), F)), Threshold::At(1));
        let pair = LangPair::new("en", tgt);
        prop_assert_eq!(mock_translate(&cfg, &text, &pair).unwrap(), mock_translate(&cfg, &text, &pair).unwrap());
    }

    #[test]
    fn batch_order_is_preserved(texts in prop::collection::vec(sentence(), 1..12), seed in any::<u64>()) {
        let backend = MockTranslator::new(MockConfig::gendered(
            distinct_occupations().iter().map(|o| (o.as_str(), M)),
            Threshold::At(1),
        ));
        let pair = LangPair::new("en", "de");
        let mut order: Vec<usize> = (0..texts.len()).collect();
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let shuffled: Vec<String> = order.iter().map(|&i| texts[i].clone()).collect();
        let straight = translate_batch(&backend, &TranslationRequest::new(texts.clone(), pair.clone())).unwrap();
        let permuted = translate_batch(&backend, &TranslationRequest::new(shuffled, pair)).unwrap();
        for (k, &i) in order.iter().enumerate() {
            prop_assert_eq!(&permuted[k], &straight[i]);
        }
    }

    #[test]
    fn cache_is_transparent(texts in prop::collection::vec(sentence(), 1..8)) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = MockConfig::gendered(distinct_occupations().iter().map(|o| (o.as_str(), F)), Threshold::At(2));
        let plain = MockTranslator::new(cfg.clone());
        let cached = CachedBackend::new(MockTranslator::new(cfg), DiskCache::new(dir.path()));
        let req = TranslationRequest::new(texts, LangPair::new("en", "fr"));
        let want = translate_batch(&plain, &req).unwrap();
        prop_assert_eq!(&translate_batch(&cached, &req).unwrap(), &want);
        prop_assert_eq!(&translate_batch(&cached, &req).unwrap(), &want);
        let (hits, misses) = cached.counters();
        prop_assert_eq!(hits + misses, 2 * req.texts.len() as u64);
        prop_assert!(hits >= req.texts.len() as u64);
    }

    #[test]
    fn raising_k_never_helps(occ in occupation(), g in gender(), t in 0usize..25, k in 1u32..4) {
        let bank = TemplateBank::builtin_relevant();
        let template = &bank.templates()[t];
        let ctx = template.render(&occ, g, bank.placeholders()).unwrap();
        let payload = format!("The {occ} slept.");
        let text = compose(&payload, &ctx, Delimiter::Hash, Position::Prepend).unwrap().text;
        let tagger = tagger();
        let bias = std::collections::BTreeMap::from([(occ.clone(), g.opposite())]);
        let success = |k: Threshold| {
            let out = mock(&bias, k).translate(&text, &LangPair::new("en", "de")).unwrap();
            let stripped = strip(&out, Delimiter::Hash, Position::Prepend).unwrap();
            tagger.target_gender(&stripped, &occ, "de") == g
        };
        prop_assert!(!success(Threshold::At(k + 1)) || success(Threshold::At(k)));
        prop_assert!(!success(Threshold::Never) || success(Threshold::At(k)));
    }

    #[test]
    fn bleu_is_permutation_invariant(
        pairs in prop::collection::vec((phrase(), phrase()), 1..10),
        rotate in 0usize..10,
    ) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.iter().cloned().unzip();
        let mut rotated = pairs.clone();
        rotated.rotate_left(rotate % pairs.len());
        rotated.reverse();
        let (h2, r2): (Vec<String>, Vec<String>) = rotated.into_iter().unzip();
        let a = corpus_bleu(&h, &r).unwrap();
        prop_assert_eq!(a, corpus_bleu(&h2, &r2).unwrap());
        prop_assert!((0.0..=100.0).contains(&a));
    }

    #[test]
    fn bins_partition(scores in prop::collection::vec(prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..=1.0], 0..40)) {
        let b = metrics::sensitivity_bins(&scores);
        prop_assert_eq!(b.no_change + b.less_sensitive + b.more_sensitive, scores.len());
        prop_assert_eq!(b.no_change, scores.iter().filter(|s| **s == 0.0).count());
        prop_assert_eq!(b.more_sensitive, scores.iter().filter(|s| **s > 0.5).count());
    }

    #[test]
    fn render_carries_only_the_intended_gender(occ in occupation(), g in gender(), t in 0usize..25) {
        let bank = TemplateBank::builtin_relevant();
        let table = bank.placeholders();
        let out = bank.templates()[t].render(&occ, g, table).unwrap();
        prop_assert!(out.contains(&occ));
        let words: Vec<String> = text::words(&out).into_iter().map(|w| w.lower).collect();
        let lexicon = table.lexicon();
        prop_assert!(lexicon.iter().any(|(w, lg)| *lg == g && words.contains(w)));
        let opposite: Vec<&str> = ["sbj-prn", "obj-prn", "pos-prn", "ref-prn"]
            .iter()
            .filter_map(|k| table.value(k, g.opposite()))
            .collect();
        for p in opposite {
            prop_assert!(!words.iter().any(|w| w == p), "{out} contains {p}");
        }
        prop_assert_eq!(bank.templates()[t].render(&occ, g, table).unwrap(), out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn world_invariants(seed in any::<u64>()) {
        let w = random_world(seed);
        let tagger = tagger();
        let m = apply_all(&w.samples, &w.bank, &w.backend, &w.engine, &tagger, SignalMode::CorrectGender);
        if let Some(c) = metrics::coverage(&m).unwrap() {
            prop_assert!(0.0 <= c.lower && c.lower <= c.upper && c.upper <= 100.0);
        }
        let a_all = metrics::average_accuracy(&m).unwrap();
        prop_assert!((0.0..=100.0).contains(&a_all.mean));

        let outcomes = run_greedy(&w.samples, &w.bank, &w.backend, &w.engine, &tagger);
        for o in &outcomes {
            let budget = match o.status {
                OutcomeStatus::AlreadyCorrect | OutcomeStatus::Untaggable => 1,
                OutcomeStatus::Corrected => {
                    let id = o.chosen_template.as_deref().unwrap();
                    w.bank.iter().position(|t| t.id == id).unwrap() + 2
                }
                OutcomeStatus::Uncorrected => w.bank.len() + 1,
                OutcomeStatus::Error => continue,
            };
            prop_assert_eq!(o.translation_calls, budget, "{:?}", o.status);
        }

        let cf = apply_all(&w.samples, &w.bank, &w.backend, &w.engine, &tagger, SignalMode::Counterfactual);
        let css = metrics::css(&cf).unwrap();
        prop_assert!(css.per_sample.iter().all(|s| (0.0..=1.0).contains(s)));
    }
}

#[test]
fn signal_feature_matches_token_scan() {
    let bank = TemplateBank::builtin_relevant().concat(&TemplateBank::builtin_irrelevant()).unwrap();
    for t in bank.iter() {
        let mut tokens: Vec<&str> = t.pattern.split_whitespace().collect();
        if let Some(last) = tokens.last_mut() {
            *last = last.trim_end_matches(['.', '!', '?']);
        }
        let scan = tokens
            .iter()
            .filter(|tok| {
                tok.split('{')
                    .skip(1)
                    .any(|rest| rest.split('}').next().is_some_and(|key| key != "occupation"))
            })
            .count();
        assert_eq!(t.features.signals, scan, "{}", t.id);
        assert_eq!(t.features.length, tokens.len(), "{}", t.id);
    }
}

#[test]
fn pruning_is_a_subset_and_idempotent() {
    let bank = TemplateBank::builtin_relevant().concat(&TemplateBank::builtin_irrelevant()).unwrap();
    let probes = vec!["doctor".to_string(), "nurse".to_string()];
    let pair = LangPair::new("en", "de");
    let tagger = tagger();
    for self_k in [Threshold::At(1), Threshold::At(2), Threshold::Never] {
        let cfg = MockConfig {
            self_threshold: self_k,
            ..MockConfig::gendered([("doctor", M), ("nurse", F)], Threshold::At(1))
        };
        let backend = MockTranslator::new(cfg);
        let once = prune_bank(&bank, &backend, &pair, &tagger, &probes).unwrap();
        assert!(once.iter().all(|t| bank.get(&t.id) == Some(t)));
        let twice = prune_bank(&once, &backend, &pair, &tagger, &probes).unwrap();
        let ids = |b: &TemplateBank| b.iter().map(|t| t.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&once), ids(&twice));
    }
}
