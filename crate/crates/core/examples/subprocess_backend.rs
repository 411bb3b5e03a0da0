//! Drives a line-oriented translator process (here: a shell echo loop).

use std::time::Duration;

use ctxdebias::backend::{translate_batch, LangPair, SubprocessTranslator, TranslationRequest};

fn main() {
    let argv = vec![
        "sh".to_string(),
        "-c".to_string(),
        "while IFS= read -r l; do printf '%s\\n' \"${l#*\t*\t}\"; done".to_string(),
    ];
    let backend = SubprocessTranslator::new(argv, Duration::from_secs(5)).unwrap();
    let req = TranslationRequest::new(
        vec!["The nurse slept.".into(), "tab\there".into()],
        LangPair::new("en", "de"),
    );
    println!("{:?}", translate_batch(&backend, &req).unwrap());
}
