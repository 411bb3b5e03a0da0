//! Corpus-level BLEU.
//!
//! * Tokens: whitespace-separated chunks, with every non-alphanumeric
//!   character split off as its own token. Case is kept.
//! * Modified n-gram precision for n = 1..=4, clipped by the reference
//!   counts and summed over the corpus.
//! * Floor smoothing: for n ≥ 2 a zero match count is replaced by 1/2, so
//!   the precision becomes `1 / (2 · hyp_ngrams_n)`. A zero unigram match
//!   gives a score of 0.
//! * Orders for which the hypotheses contain no n-gram at all are left out
//!   of the geometric mean.
//! * Brevity penalty `exp(1 − r/c)` when `c ≤ r`, with `c`, `r` the total
//!   hypothesis and reference token counts; an empty hypothesis side
//!   scores 0.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const MAX_ORDER: usize = 4;

pub fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in s.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if c.is_alphanumeric() {
                word.push(c);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

/// Sufficient statistics of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn collect(hypotheses: &[String], references: &[String]) -> Result<Self, MetricsError> {
        if hypotheses.len() != references.len() {
            return Err(MetricsError::LengthMismatch(hypotheses.len(), references.len()));
        }
        if hypotheses.is_empty() {
            return Err(MetricsError::EmptyCorpus);
        }
        let mut stats = BleuStats {
            matches: [0; MAX_ORDER],
            totals: [0; MAX_ORDER],
            hyp_len: 0,
            ref_len: 0,
        };
        for (h, r) in hypotheses.iter().zip(references) {
            let h = tokenize(h);
            let r = tokenize(r);
            stats.hyp_len += h.len() as u64;
            stats.ref_len += r.len() as u64;
            for n in 1..=MAX_ORDER {
                let ref_counts = ngram_counts(&r, n);
                for (gram, count) in ngram_counts(&h, n) {
                    stats.totals[n - 1] += count;
                    stats.matches[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
                }
            }
        }
        Ok(stats)
    }

    /// Score in `[0, 100]`.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut orders = 0;
        for n in 0..MAX_ORDER {
            let total = self.totals[n];
            if total == 0 {
                continue;
            }
            let m = if self.matches[n] == 0 { 0.5 } else { self.matches[n] as f64 };
            log_sum += (m / total as f64).ln();
            orders += 1;
        }
        let c = self.hyp_len as f64;
        let r = self.ref_len as f64;
        let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
        100.0 * bp * (log_sum / orders as f64).exp()
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU of hypotheses against one reference each.
pub fn corpus_bleu(hypotheses: &[String], references: &[String]) -> Result<f64, MetricsError> {
    Ok(BleuStats::collect(hypotheses, references)?.score())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(tokenize("L'infirmière dormait, oui."), ["L", "'", "infirmière", "dormait", ",", "oui", "."]);
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn identical_corpus_is_100() {
        let c = s(&["Die Krankenschwester schlief.", "Er ist nett."]);
        assert!((corpus_bleu(&c, &c).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn hand_computed_short_pair() {
        // hyp: a b c d (4), ref: a b c e (4)
        // p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = 0 -> 0.5/1, bp = 1
        let got = corpus_bleu(&s(&["a b c d"]), &s(&["a b c e"])).unwrap();
        let want = 100.0 * (0.75f64 * (2.0 / 3.0) * 0.5 * 0.5).powf(0.25);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(corpus_bleu(&[], &[]), Err(MetricsError::EmptyCorpus));
        assert_eq!(corpus_bleu(&s(&[""]), &s(&["a"])).unwrap(), 0.0);
        assert_eq!(corpus_bleu(&s(&["x y"]), &s(&["a b"])).unwrap(), 0.0);
        assert!(corpus_bleu(&s(&["a"]), &s(&["a", "b"])).is_err());
    }

    #[test]
    fn brevity_penalty_applies() {
        let got = corpus_bleu(&s(&["a b"]), &s(&["a b c d"])).unwrap();
        // p1 = 1, p2 = 1, higher orders absent, bp = exp(1 - 2)
        assert!((got - 100.0 * (-1.0f64).exp()).abs() < 1e-9);
    }
}
