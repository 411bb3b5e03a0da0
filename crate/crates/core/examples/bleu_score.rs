//! Corpus BLEU with its sufficient statistics.

use ctxdebias::metrics::{corpus_bleu, tokenize, BleuStats};

fn main() {
    let hyps = vec![
        "Die Krankenschwester schlief.".to_string(),
        "Der Arzt aß einen Apfel.".to_string(),
    ];
    let refs = vec![
        "Die Krankenschwester schlief.".to_string(),
        "Der Arzt aß den Apfel.".to_string(),
    ];
    println!("tokens: {:?}", tokenize(&hyps[1]));
    let stats = BleuStats::collect(&hyps, &refs).unwrap();
    println!("matches {:?} totals {:?} hyp_len {} ref_len {}", stats.matches, stats.totals, stats.hyp_len, stats.ref_len);
    println!("BLEU = {:.4}", corpus_bleu(&hyps, &refs).unwrap());
    println!("identity BLEU = {:.4}", corpus_bleu(&refs, &refs).unwrap());
}
