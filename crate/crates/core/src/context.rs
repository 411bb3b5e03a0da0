//! Composition of context-augmented inputs and recovery of the payload
//! translation.
//!
//! A composed input is `context ␣ literal ␣ payload` (prepend) or
//! `payload ␣ literal ␣ context` (append). Stripping prefers a delimiter
//! occurrence that stands alone between whitespace, which is exactly what
//! composition produces, and falls back to a bare occurrence of the literal
//! when the translator glued it to a neighbouring word.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Hash,
    Period,
    Colon,
    Semicolon,
}

impl Delimiter {
    pub const ALL: [Delimiter; 4] = [
        Delimiter::Hash,
        Delimiter::Period,
        Delimiter::Colon,
        Delimiter::Semicolon,
    ];

    pub fn literal(self) -> char {
        match self {
            Delimiter::Hash => '#',
            Delimiter::Period => '.',
            Delimiter::Colon => ':',
            Delimiter::Semicolon => ';',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Delimiter::Hash => "hash",
            Delimiter::Period => "period",
            Delimiter::Colon => "colon",
            Delimiter::Semicolon => "semicolon",
        }
    }

    pub fn from_literal(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.literal() == c)
    }
}

impl fmt::Display for Delimiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s) || s.chars().eq(std::iter::once(d.literal())))
            .ok_or_else(|| format!("unknown delimiter `{s}` (expected hash, period, colon or semicolon)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Prepend,
    Append,
}

impl Position {
    pub const ALL: [Position; 2] = [Position::Prepend, Position::Append];

    pub fn name(self) -> &'static str {
        match self {
            Position::Prepend => "prepend",
            Position::Append => "append",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prepend" => Ok(Position::Prepend),
            "append" => Ok(Position::Append),
            other => Err(format!("unknown position `{other}` (expected prepend or append)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComposeError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{0} has leading or trailing whitespace")]
    Untrimmed(&'static str),
    #[error("delimiter `{literal}` already occurs as a standalone token in the {part}")]
    DelimiterCollision { literal: char, part: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum SplitFailure {
    #[error("delimiter not found in translation")]
    NoDelimiter,
    #[error("payload side of the translation is empty")]
    EmptyPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedInput {
    pub text: String,
    pub context: String,
    pub payload: String,
    pub delimiter: Delimiter,
    pub position: Position,
}

fn check_part(s: &str, part: &'static str, literal: char) -> Result<(), ComposeError> {
    if s.is_empty() {
        return Err(ComposeError::Empty(part));
    }
    if s.trim() != s {
        return Err(ComposeError::Untrimmed(part));
    }
    // A sentence-final period is attached to its word and never forms a
    // standalone token, so it passes this check.
    if s.split_whitespace().any(|tok| tok.chars().eq(std::iter::once(literal))) {
        return Err(ComposeError::DelimiterCollision { literal, part });
    }
    Ok(())
}

pub fn compose(
    payload: &str,
    context: &str,
    delimiter: Delimiter,
    position: Position,
) -> Result<ComposedInput, ComposeError> {
    let lit = delimiter.literal();
    check_part(payload, "payload", lit)?;
    check_part(context, "context", lit)?;
    let text = match position {
        Position::Prepend => format!("{context} {lit} {payload}"),
        Position::Append => format!("{payload} {lit} {context}"),
    };
    Ok(ComposedInput {
        text,
        context: context.to_string(),
        payload: payload.to_string(),
        delimiter,
        position,
    })
}

/// Byte offsets of occurrences of `lit` that have whitespace (or a string
/// boundary) on both sides.
fn standalone_occurrences(text: &str, lit: char) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        if c != lit {
            continue;
        }
        let before = text[..i].chars().next_back().is_none_or(char::is_whitespace);
        let after = text[i + c.len_utf8()..].chars().next().is_none_or(char::is_whitespace);
        if before && after {
            out.push(i);
        }
    }
    out
}

/// Recovers the payload translation from a translated composed input.
pub fn strip(translated: &str, delimiter: Delimiter, position: Position) -> Result<String, SplitFailure> {
    let lit = delimiter.literal();
    let standalone = standalone_occurrences(translated, lit);
    let at = match position {
        Position::Prepend => standalone.first().copied().or_else(|| translated.find(lit)),
        Position::Append => standalone.last().copied().or_else(|| translated.rfind(lit)),
    }
    .ok_or(SplitFailure::NoDelimiter)?;
    let side = match position {
        Position::Prepend => &translated[at + lit.len_utf8()..],
        Position::Append => &translated[..at],
    };
    let side = side.trim();
    if side.is_empty() {
        return Err(SplitFailure::EmptyPayload);
    }
    Ok(side.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_prepend_and_append() {
        let c = compose("The nurse slept.", "She is kind.", Delimiter::Hash, Position::Prepend).unwrap();
        assert_eq!(c.text, "She is kind. # The nurse slept.");
        let c = compose("The nurse slept.", "She is kind.", Delimiter::Hash, Position::Append).unwrap();
        assert_eq!(c.text, "The nurse slept. # She is kind.");
    }

    #[test]
    fn compose_rejects_collisions() {
        assert_eq!(
            compose("A # B", "She is kind.", Delimiter::Hash, Position::Prepend),
            Err(ComposeError::DelimiterCollision { literal: '#', part: "payload" })
        );
        assert!(compose("A", "c :", Delimiter::Colon, Position::Append).is_err());
        // sentence-final period is exempt
        assert!(compose("He left.", "She is kind.", Delimiter::Period, Position::Prepend).is_ok());
        assert!(compose("", "c", Delimiter::Hash, Position::Prepend).is_err());
        assert!(compose(" a", "c", Delimiter::Hash, Position::Prepend).is_err());
    }

    #[test]
    fn strip_examples() {
        assert_eq!(
            strip("Sie ist nett. # Die Pflegerin schlief.", Delimiter::Hash, Position::Prepend).unwrap(),
            "Die Pflegerin schlief."
        );
        assert_eq!(
            strip("Sie ist nett. Die Pflegerin schlief.", Delimiter::Hash, Position::Prepend),
            Err(SplitFailure::NoDelimiter)
        );
        assert_eq!(strip("A # B # C", Delimiter::Hash, Position::Append).unwrap(), "A # B");
        assert_eq!(strip("A # B # C", Delimiter::Hash, Position::Prepend).unwrap(), "B # C");
        assert_eq!(strip("A #  ", Delimiter::Hash, Position::Prepend), Err(SplitFailure::EmptyPayload));
    }

    #[test]
    fn strip_prefers_standalone_period() {
        assert_eq!(
            strip("Sie ist nett. . Er schlief.", Delimiter::Period, Position::Prepend).unwrap(),
            "Er schlief."
        );
        assert_eq!(
            strip("Er schlief. . Sie ist nett.", Delimiter::Period, Position::Append).unwrap(),
            "Er schlief."
        );
        // glued delimiter falls back to the bare literal
        assert_eq!(strip("Sie ist nett.# Er schlief.", Delimiter::Hash, Position::Prepend).unwrap(), "Er schlief.");
    }

    #[test]
    fn parse_names_and_literals() {
        assert_eq!("hash".parse::<Delimiter>().unwrap(), Delimiter::Hash);
        assert_eq!(";".parse::<Delimiter>().unwrap(), Delimiter::Semicolon);
        assert!("comma".parse::<Delimiter>().is_err());
        assert_eq!("Append".parse::<Position>().unwrap(), Position::Append);
    }
}
