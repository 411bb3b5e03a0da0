//! Word segmentation shared by the taggers, the mock translator and the
//! corpus loaders.
//!
//! A word is a maximal run of alphanumeric characters and inner hyphens.
//! Everything else (whitespace, punctuation, apostrophes, slashes) separates
//! words, so `L'infirmière` yields `l`, `infirmière` and `he/him` yields
//! `he`, `him`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    /// Lowercased surface form.
    pub lower: String,
    /// Byte offset of the first character in the source text.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

pub fn words(text: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (i, &(pos, c)) in chars.iter().enumerate() {
        let inner_hyphen = c == '-'
            && start.is_some()
            && chars.get(i + 1).is_some_and(|&(_, n)| is_word_char(n));
        if is_word_char(c) || inner_hyphen {
            if start.is_none() {
                start = Some(pos);
            }
        } else if let Some(s) = start.take() {
            out.push(Word {
                lower: text[s..pos].to_lowercase(),
                start: s,
                end: pos,
            });
        }
    }
    if let Some(s) = start {
        out.push(Word {
            lower: text[s..].to_lowercase(),
            start: s,
            end: text.len(),
        });
    }
    out
}

/// Finds the first occurrence of `phrase` (one or more words) in `haystack`
/// as a contiguous word sequence, case-insensitively. Returns the index of
/// the first matching word.
pub fn find_phrase(haystack: &[Word], phrase: &[String]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return None;
    }
    (0..=haystack.len() - phrase.len())
        .find(|&i| phrase.iter().zip(&haystack[i..]).all(|(p, w)| *p == w.lower))
}

/// Lowercased word list of a phrase, e.g. an occupation name.
pub fn phrase_words(phrase: &str) -> Vec<String> {
    words(phrase).into_iter().map(|w| w.lower).collect()
}

/// Uppercases the first character, leaving the rest untouched.
pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lowers(text: &str) -> Vec<String> {
        words(text).into_iter().map(|w| w.lower).collect()
    }

    #[test]
    fn splits_elision_and_slashes() {
        assert_eq!(lowers("L'infirmière est arrivée."), ["l", "infirmière", "est", "arrivée"]);
        assert_eq!(lowers("pronouns he/him."), ["pronouns", "he", "him"]);
        assert_eq!(lowers("elle-même, short-tempered -x"), ["elle-même", "short-tempered", "x"]);
    }

    #[test]
    fn offsets_slice_back_to_source() {
        let text = "Die Krankenschwester schlief.";
        for w in words(text) {
            assert_eq!(text[w.start..w.end].to_lowercase(), w.lower);
        }
    }

    #[test]
    fn phrase_lookup_is_word_aligned() {
        let ws = words("The construction worker met the nurse.");
        assert_eq!(find_phrase(&ws, &phrase_words("construction worker")), Some(1));
        assert_eq!(find_phrase(&ws, &phrase_words("nurse")), Some(5));
        assert_eq!(find_phrase(&words("nursery rhymes"), &phrase_words("nurse")), None);
    }
}
