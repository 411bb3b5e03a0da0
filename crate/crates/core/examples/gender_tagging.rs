//! Source- and target-side gender detection with the lexicon tagger.

use ctxdebias::tagger::{GenderTagger, LexiconTagger};

fn main() {
    let tagger = LexiconTagger::builtin();
    for s in ["The nurse said he was tired.", "The doctor finished her shift.", "The baker slept."] {
        let occ = s.split_whitespace().nth(1).unwrap();
        println!("{s:<35} source gender of {occ}: {}", tagger.source_gender(s, occ).unwrap());
    }
    for (t, lang) in [
        ("Die Krankenschwester schlief.", "de"),
        ("Der Krankenpfleger schlief.", "de"),
        ("L'infirmière dormait.", "fr"),
        ("El enfermero durmió.", "es"),
    ] {
        println!("{t:<35} target gender ({lang}): {}", tagger.target_gender(t, "nurse", lang));
    }
}
