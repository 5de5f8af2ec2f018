//! Normalization and tokenization of mixed Devanagari/Latin text.

use std::fmt;
use std::ops::Deref;

use unicode_normalization::UnicodeNormalization;

pub const DANDA: char = '\u{0964}';
pub const DOUBLE_DANDA: char = '\u{0965}';

/// Canonical composition (NFC), whitespace runs collapsed to one space,
/// leading and trailing whitespace removed.
pub fn normalize(text: &str) -> String {
    let composed: String = text.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    for word in composed.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Characters that always form a token of their own.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            DANDA
                | DOUBLE_DANDA
                | '\u{2013}'
                | '\u{2014}'
                | '\u{2018}'..='\u{201F}'
                | '\u{2026}'
                | '\u{00AB}'
                | '\u{00BB}'
        )
}

/// An ordered sequence of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps tokens, dropping empty ones and splitting any that contain
    /// whitespace.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            tokens
                .into_iter()
                .flat_map(|t| {
                    t.as_ref()
                        .split_whitespace()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    /// Takes the first `n` tokens.
    pub fn truncated(&self, n: usize) -> Self {
        Self(self.0.iter().take(n).cloned().collect())
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

/// Splits normalized text on whitespace and peels every punctuation
/// character (Latin punctuation, danda, double danda) into its own token.
/// Digit runs stay together.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    TokenSequence(tokens)
}

/// Lowercases Latin letters and leaves every other script alone.
pub fn fold_latin_case(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if c.is_ascii_alphabetic() || ('\u{00C0}'..='\u{024F}').contains(&c) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// The full preparation applied before any metric sees a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextPipeline {
    pub fold_case: bool,
}

impl Default for TextPipeline {
    fn default() -> Self {
        Self { fold_case: true }
    }
}

impl TextPipeline {
    pub fn prepare(&self, raw: &str) -> TokenSequence {
        let seq = tokenize(&normalize(raw));
        if self.fold_case {
            TokenSequence(seq.0.iter().map(|t| fold_latin_case(t)).collect())
        } else {
            seq
        }
    }

    /// Normalizes a single lexicon entry the same way tokens are prepared.
    pub fn prepare_token(&self, raw: &str) -> String {
        let t = normalize(raw);
        if self.fold_case {
            fold_latin_case(&t)
        } else {
            t
        }
    }
}
