//! Light Hindi stemmer: a single longest-suffix strip against an editable
//! suffix inventory.

use std::path::Path;

use crate::text::normalize;

/// Suffix list shipped with the crate, seeded with common Hindi inflections.
pub const DEFAULT_SUFFIXES: &str = include_str!("../data/hindi_suffixes.txt");

/// Suffixes kept sorted longest first (by characters) without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixInventory {
    suffixes: Vec<String>,
    min_stem_len: usize,
}

impl Default for SuffixInventory {
    fn default() -> Self {
        Self::parse(DEFAULT_SUFFIXES)
    }
}

impl SuffixInventory {
    pub fn new<I, S>(suffixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list: Vec<String> = suffixes
            .into_iter()
            .map(|s| normalize(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        // longest first; ties broken lexicographically so the order is total
        list.sort_by(|a, b| {
            b.chars()
                .count()
                .cmp(&a.chars().count())
                .then_with(|| a.cmp(b))
        });
        list.dedup();
        Self {
            suffixes: list,
            min_stem_len: 1,
        }
    }

    /// One suffix per line, `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn with_min_stem_len(mut self, min_stem_len: usize) -> Self {
        self.min_stem_len = min_stem_len;
        self
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }

    /// Removes the longest suffix that leaves at least `min_stem_len`
    /// characters (and never an empty stem). Returns the token unchanged
    /// when nothing qualifies.
    pub fn stem<'a>(&self, token: &'a str) -> &'a str {
        let token_chars = token.chars().count();
        let floor = self.min_stem_len.max(1);
        for suffix in &self.suffixes {
            if !token.ends_with(suffix.as_str()) {
                continue;
            }
            let remaining = token_chars - suffix.chars().count();
            if remaining >= floor {
                return &token[..token.len() - suffix.len()];
            }
        }
        token
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inventory_is_sorted_and_deduplicated() {
        let inv = SuffixInventory::new(["ा", "ों", "ा", "ियों"]);
        assert_eq!(inv.suffixes(), ["ियों", "ों", "ा"]);
        let def = SuffixInventory::default();
        let lens: Vec<usize> = def.suffixes().iter().map(|s| s.chars().count()).collect();
        assert!(lens.windows(2).all(|w| w[0] >= w[1]));
        assert!(def.suffixes().iter().all(|s| !s.starts_with('#')));
    }

    #[test]
    fn stem_examples() {
        let inv = SuffixInventory::default();
        // ल ड़ क े: longest qualifying suffix in the default list is "े"
        assert_eq!(inv.stem(&normalize("लड़के")), normalize("लड़क"));
        assert_eq!(inv.stem(&normalize("लड़का")), normalize("लड़क"));
        assert_eq!(inv.stem("घर"), "घर");
        assert_eq!(inv.stem("taj"), "taj");
        // token equal to a suffix would leave nothing
        assert_eq!(inv.stem("कर"), "कर");
        assert_eq!(inv.stem("ा"), "ा");
    }

    #[test]
    fn stem_prefers_longest_suffix() {
        let inv = SuffixInventory::default();
        // "ियों" (4 chars) wins over "ों" and "ो"
        assert_eq!(inv.stem("लड़कियों"), "लड़क");
        // with a large minimum stem, only shorter suffixes qualify
        let strict = SuffixInventory::new(["ियों", "ों"]).with_min_stem_len(5);
        assert_eq!(strict.stem("लड़कियों"), "लड़किय");
    }

    #[test]
    fn stem_is_single_pass() {
        let inv = SuffixInventory::new(["ा", "ाा"]);
        assert_eq!(inv.stem("कााा"), "का");
    }

    #[test]
    fn inventory_file_comments() {
        let inv = SuffixInventory::parse("# header\nें\n\n  # indented comment\nों\n");
        assert_eq!(inv.suffixes().len(), 2);
    }

    proptest! {
        #[test]
        fn stem_is_prefix_and_respects_floor(
            token in "[कखगलड़ािीुूेैोौंँ]{1,8}",
            min in 0usize..4,
        ) {
            let inv = SuffixInventory::default().with_min_stem_len(min);
            let stem = inv.stem(&token);
            prop_assert!(token.starts_with(stem));
            let n = token.chars().count();
            prop_assert!(stem.chars().count() >= min.min(n));
            prop_assert!(!stem.is_empty());
        }
    }
}
