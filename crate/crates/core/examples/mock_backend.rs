//! The deterministic mock translator: stereotype bias, signal threshold and
//! delimiter handling.

use ctxdebias::backend::{mock_translate, LangPair, MockConfig, Threshold};
use ctxdebias::gender::Gender;

fn main() {
    let cfg = MockConfig::gendered([("nurse", Gender::Female), ("doctor", Gender::Male)], Threshold::At(1));
    for tgt in ["de", "fr", "es"] {
        let pair = LangPair::new("en", tgt);
        for text in [
            "The nurse slept.",
            "He is a nurse. # The nurse slept.",
            "The doctor slept.",
            "She is a doctor. # The doctor slept.",
        ] {
            println!("{tgt}: {text:<40} -> {}", mock_translate(&cfg, text, &pair).unwrap());
        }
    }
    let never = MockConfig::gendered([("nurse", Gender::Female)], Threshold::Never);
    let out = mock_translate(&never, "He is a nurse. # The nurse slept.", &LangPair::new("en", "de")).unwrap();
    println!("k=inf ignores context: {out}");
}
