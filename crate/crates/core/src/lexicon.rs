//! Synonym and paraphrase resources for the METEOR matcher stages.
//!
//! Synonym file: `synset_id<TAB>token<TAB>token...`, one synset per line.
//! Paraphrase file: `phrase<TAB>phrase`, tokens space-separated inside each
//! phrase. Blank lines and lines starting with `#` are skipped in both.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::text::TextPipeline;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Token to synset-id membership.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    members: HashMap<String, BTreeSet<String>>,
}

impl SynonymLexicon {
    pub fn parse(text: &str, pipeline: &TextPipeline) -> Result<Self, LexiconError> {
        let mut lex = Self::default();
        for (line, raw) in content_lines(text) {
            let mut fields = raw.split('\t');
            let id = fields.next().unwrap_or_default().trim();
            let tokens: Vec<&str> = fields.map(str::trim).filter(|t| !t.is_empty()).collect();
            if id.is_empty() || tokens.is_empty() {
                return Err(LexiconError::Parse {
                    line,
                    message: "expected `id<TAB>token[<TAB>token...]`".into(),
                });
            }
            for t in tokens {
                lex.insert(id, &pipeline.prepare_token(t));
            }
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>, pipeline: &TextPipeline) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?, pipeline)
    }

    pub fn insert(&mut self, synset_id: &str, token: &str) {
        self.members
            .entry(token.to_string())
            .or_default()
            .insert(synset_id.to_string());
    }

    pub fn synsets(&self, token: &str) -> Option<&BTreeSet<String>> {
        self.members.get(token)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True when the tokens differ and share at least one synset.
    pub fn synonyms_match(&self, a: &str, b: &str) -> bool {
        if a == b {
            return false;
        }
        match (self.members.get(a), self.members.get(b)) {
            (Some(x), Some(y)) => !x.is_disjoint(y),
            _ => false,
        }
    }
}

/// Symmetric phrase equivalences. Every listed pair is stored in both
/// directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParaphraseTable {
    entries: HashMap<Vec<String>, BTreeSet<Vec<String>>>,
    max_phrase_len: usize,
}

impl ParaphraseTable {
    pub fn parse(text: &str, pipeline: &TextPipeline) -> Result<Self, LexiconError> {
        let mut table = Self::default();
        for (line, raw) in content_lines(text) {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 2 {
                return Err(LexiconError::Parse {
                    line,
                    message: format!("expected 2 tab-separated phrases, found {}", fields.len()),
                });
            }
            let a = pipeline.prepare(fields[0]).into_inner();
            let b = pipeline.prepare(fields[1]).into_inner();
            if a.is_empty() || b.is_empty() {
                return Err(LexiconError::Parse {
                    line,
                    message: "empty phrase".into(),
                });
            }
            table.insert(a, b);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>, pipeline: &TextPipeline) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?, pipeline)
    }

    /// Adds `a <-> b`. Repeated pairs are absorbed.
    pub fn insert(&mut self, a: Vec<String>, b: Vec<String>) {
        if a.is_empty() || b.is_empty() || a == b {
            return;
        }
        self.max_phrase_len = self.max_phrase_len.max(a.len()).max(b.len());
        self.entries.entry(a.clone()).or_default().insert(b.clone());
        self.entries.entry(b).or_default().insert(a);
    }

    pub fn equivalents(&self, phrase: &[String]) -> Option<&BTreeSet<Vec<String>>> {
        self.entries.get(phrase)
    }

    pub fn matches(&self, a: &[String], b: &[String]) -> bool {
        self.entries.get(a).is_some_and(|set| set.contains(b))
    }

    /// Length in tokens of the longest phrase on either side of any entry.
    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
