//! Staged METEOR matching and scoring.
//!
//! Stages run in the fixed order exact, stem, synonym, paraphrase, each one
//! looking only at tokens left unmatched by the earlier stages. Within a
//! stage the matcher is greedy: hypothesis positions are visited left to
//! right and each takes the leftmost compatible unmatched reference
//! position. The paraphrase stage tries the longest table phrases first.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lexicon::{ParaphraseTable, SynonymLexicon};
use crate::stemmer::SuffixInventory;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeteorError {
    #[error("the exact stage must be enabled")]
    MissingExactStage,
    #[error("invalid METEOR parameters: {0}")]
    InvalidParams(String),
    #[error("at least one reference is required")]
    NoReferences,
    #[error("unknown stage set {0:?}")]
    UnknownStages(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatcherStage {
    Exact,
    Stem,
    Synonym,
    Paraphrase,
}

impl MatcherStage {
    pub const ALL: [MatcherStage; 4] = [
        MatcherStage::Exact,
        MatcherStage::Stem,
        MatcherStage::Synonym,
        MatcherStage::Paraphrase,
    ];

    /// Letter used in config ids (`meteor-esyp`).
    pub fn letter(self) -> char {
        match self {
            MatcherStage::Exact => 'e',
            MatcherStage::Stem => 's',
            MatcherStage::Synonym => 'y',
            MatcherStage::Paraphrase => 'p',
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

/// A subset of matcher stages, always iterated in cascade order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct StageSet(u8);

impl StageSet {
    pub fn new(stages: impl IntoIterator<Item = MatcherStage>) -> Self {
        Self(stages.into_iter().fold(0, |acc, s| acc | s.bit()))
    }

    pub fn all() -> Self {
        Self::new(MatcherStage::ALL)
    }

    pub fn contains(self, stage: MatcherStage) -> bool {
        self.0 & stage.bit() != 0
    }

    pub fn with(self, stage: MatcherStage) -> Self {
        Self(self.0 | stage.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = MatcherStage> {
        MatcherStage::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

impl fmt::Display for StageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.iter().try_for_each(|s| write!(f, "{}", s.letter()))
    }
}

impl FromStr for StageSet {
    type Err = MeteorError;

    /// Parses the letter form (`"esy"`); letters must appear in cascade order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = StageSet::default();
        let mut last = None;
        for c in s.chars() {
            let stage = MatcherStage::ALL
                .into_iter()
                .find(|st| st.letter() == c)
                .ok_or_else(|| MeteorError::UnknownStages(s.to_string()))?;
            if last.is_some_and(|l| l >= stage) {
                return Err(MeteorError::UnknownStages(s.to_string()));
            }
            last = Some(stage);
            set = set.with(stage);
        }
        if set.is_empty() {
            return Err(MeteorError::UnknownStages(s.to_string()));
        }
        Ok(set)
    }
}

/// The four matcher combinations reported alongside BLEU 1..4.
pub fn report_stage_sets() -> [StageSet; 4] {
    use MatcherStage::*;
    [
        StageSet::new([Exact, Stem]),
        StageSet::new([Exact, Synonym]),
        StageSet::new([Exact, Stem, Synonym]),
        StageSet::new([Exact, Stem, Synonym, Paraphrase]),
    ]
}

/// Language resources used by the stem, synonym and paraphrase stages.
#[derive(Debug, Clone, Default)]
pub struct MatchResources {
    pub stemmer: SuffixInventory,
    pub synonyms: SynonymLexicon,
    pub paraphrases: ParaphraseTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Match {
    pub hyp: Range<usize>,
    pub reference: Range<usize>,
    pub stage: MatcherStage,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignmentError {
    #[error("match {index} has an empty or out-of-bounds span")]
    BadSpan { index: usize },
    #[error("{stage:?} match {index} is not a single-token match")]
    NotUnigram { index: usize, stage: MatcherStage },
    #[error("hypothesis token {0} is matched twice")]
    HypOverlap(usize),
    #[error("reference token {0} is matched twice")]
    RefOverlap(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alignment {
    pub matches: Vec<Match>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl Alignment {
    pub fn validate(&self) -> Result<(), AlignmentError> {
        let mut hyp_used = vec![false; self.hyp_len];
        let mut ref_used = vec![false; self.ref_len];
        for (index, m) in self.matches.iter().enumerate() {
            if m.hyp.is_empty()
                || m.reference.is_empty()
                || m.hyp.end > self.hyp_len
                || m.reference.end > self.ref_len
            {
                return Err(AlignmentError::BadSpan { index });
            }
            if m.stage != MatcherStage::Paraphrase && (m.hyp.len() != 1 || m.reference.len() != 1)
            {
                return Err(AlignmentError::NotUnigram {
                    index,
                    stage: m.stage,
                });
            }
            for i in m.hyp.clone() {
                if std::mem::replace(&mut hyp_used[i], true) {
                    return Err(AlignmentError::HypOverlap(i));
                }
            }
            for j in m.reference.clone() {
                if std::mem::replace(&mut ref_used[j], true) {
                    return Err(AlignmentError::RefOverlap(j));
                }
            }
        }
        Ok(())
    }

    pub fn matched_hyp_tokens(&self) -> usize {
        self.matches.iter().map(|m| m.hyp.len()).sum()
    }

    pub fn matched_ref_tokens(&self) -> usize {
        self.matches.iter().map(|m| m.reference.len()).sum()
    }

    pub fn matched_by(&self, stage: MatcherStage) -> usize {
        self.matches
            .iter()
            .filter(|m| m.stage == stage)
            .map(|m| m.hyp.len())
            .sum()
    }
}

struct Cursor {
    hyp_used: Vec<bool>,
    ref_used: Vec<bool>,
    matches: Vec<Match>,
}

impl Cursor {
    fn take(&mut self, hyp: Range<usize>, reference: Range<usize>, stage: MatcherStage) {
        self.hyp_used[hyp.clone()].fill(true);
        self.ref_used[reference.clone()].fill(true);
        self.matches.push(Match {
            hyp,
            reference,
            stage,
        });
    }

    fn unigram_stage(&mut self, stage: MatcherStage, compatible: impl Fn(usize, usize) -> bool) {
        for i in 0..self.hyp_used.len() {
            if self.hyp_used[i] {
                continue;
            }
            let found = (0..self.ref_used.len()).find(|&j| !self.ref_used[j] && compatible(i, j));
            if let Some(j) = found {
                self.take(i..i + 1, j..j + 1, stage);
            }
        }
    }

    fn paraphrase_stage(&mut self, hyp: &[String], reference: &[String], table: &ParaphraseTable) {
        let longest = table.max_phrase_len().min(hyp.len());
        for len in (1..=longest).rev() {
            let mut i = 0;
            while i + len <= hyp.len() {
                if self.hyp_used[i..i + len].iter().any(|&u| u) {
                    i += 1;
                    continue;
                }
                let Some(equivalents) = table.equivalents(&hyp[i..i + len]) else {
                    i += 1;
                    continue;
                };
                let mut candidates: Vec<&Vec<String>> = equivalents.iter().collect();
                candidates.sort_by_key(|p| std::cmp::Reverse(p.len()));
                let found = candidates.into_iter().find_map(|phrase| {
                    let k = phrase.len();
                    (0..(reference.len() + 1).saturating_sub(k))
                        .find(|&j| {
                            !self.ref_used[j..j + k].iter().any(|&u| u)
                                && reference[j..j + k] == phrase[..]
                        })
                        .map(|j| j..j + k)
                });
                match found {
                    Some(span) => {
                        self.take(i..i + len, span, MatcherStage::Paraphrase);
                        i += len;
                    }
                    None => i += 1,
                }
            }
        }
    }
}

pub fn align(
    hyp: &[String],
    reference: &[String],
    stages: StageSet,
    resources: &MatchResources,
) -> Result<Alignment, MeteorError> {
    if !stages.contains(MatcherStage::Exact) {
        return Err(MeteorError::MissingExactStage);
    }
    let mut cur = Cursor {
        hyp_used: vec![false; hyp.len()],
        ref_used: vec![false; reference.len()],
        matches: Vec::new(),
    };
    for stage in stages.iter() {
        match stage {
            MatcherStage::Exact => cur.unigram_stage(stage, |i, j| hyp[i] == reference[j]),
            MatcherStage::Stem => {
                let stem = |t: &String| resources.stemmer.stem(t).to_string();
                let hs: Vec<String> = hyp.iter().map(stem).collect();
                let rs: Vec<String> = reference.iter().map(stem).collect();
                cur.unigram_stage(stage, |i, j| hs[i] == rs[j]);
            }
            MatcherStage::Synonym => cur.unigram_stage(stage, |i, j| {
                resources.synonyms.synonyms_match(&hyp[i], &reference[j])
            }),
            MatcherStage::Paraphrase => cur.paraphrase_stage(hyp, reference, &resources.paraphrases),
        }
    }
    Ok(Alignment {
        matches: cur.matches,
        hyp_len: hyp.len(),
        ref_len: reference.len(),
    })
}

/// Number of runs of matches that are adjacent and identically ordered on
/// both sides.
pub fn count_chunks(alignment: &Alignment) -> usize {
    let mut spans: Vec<(&Range<usize>, &Range<usize>)> = alignment
        .matches
        .iter()
        .map(|m| (&m.hyp, &m.reference))
        .collect();
    spans.sort_by_key(|(h, _)| h.start);
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for (h, r) in spans {
        if prev != Some((h.start, r.start)) {
            chunks += 1;
        }
        prev = Some((h.end, r.end));
    }
    chunks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeteorParams {
    /// Precision/recall balance, in [0, 1].
    pub alpha: f64,
    /// Fragmentation penalty exponent, >= 0.
    pub beta: f64,
    /// Fragmentation penalty weight, in [0, 1].
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
        }
    }
}

impl MeteorParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, MeteorError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MeteorError::InvalidParams(format!("alpha {alpha} not in [0, 1]")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(MeteorError::InvalidParams(format!("beta {beta} must be >= 0")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(MeteorError::InvalidParams(format!("gamma {gamma} not in [0, 1]")));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

/// Score of one hypothesis against one reference, with its parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeteorBreakdown {
    pub alignment: Alignment,
    pub matched: usize,
    pub chunks: usize,
    pub precision: f64,
    pub recall: f64,
    pub fmean: f64,
    pub penalty: f64,
    pub score: f64,
}

pub fn meteor_breakdown(
    hyp: &[String],
    reference: &[String],
    stages: StageSet,
    params: &MeteorParams,
    resources: &MatchResources,
) -> Result<MeteorBreakdown, MeteorError> {
    let alignment = align(hyp, reference, stages, resources)?;
    let matched = alignment.matched_hyp_tokens();
    let chunks = count_chunks(&alignment);
    let mut out = MeteorBreakdown {
        alignment,
        matched,
        chunks,
        precision: 0.0,
        recall: 0.0,
        fmean: 0.0,
        penalty: 0.0,
        score: 0.0,
    };
    if matched == 0 {
        return Ok(out);
    }
    // recall counts reference tokens so phrase matches of unequal length
    // keep it within [0, 1]
    let p = matched as f64 / hyp.len() as f64;
    let r = out.alignment.matched_ref_tokens() as f64 / reference.len() as f64;
    let fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
    let penalty = params.gamma * (chunks as f64 / matched as f64).powf(params.beta);
    out.precision = p;
    out.recall = r;
    out.fmean = fmean;
    out.penalty = penalty;
    out.score = ((1.0 - penalty) * fmean).clamp(0.0, 1.0);
    Ok(out)
}

/// Best score over the references. Empty references are skipped; an empty
/// hypothesis scores 0.
pub fn meteor_segment<R: AsRef<[String]>>(
    hyp: &[String],
    refs: &[R],
    stages: StageSet,
    params: &MeteorParams,
    resources: &MatchResources,
) -> Result<f64, MeteorError> {
    if refs.is_empty() {
        return Err(MeteorError::NoReferences);
    }
    if !stages.contains(MatcherStage::Exact) {
        return Err(MeteorError::MissingExactStage);
    }
    let mut best: f64 = 0.0;
    for r in refs {
        let r = r.as_ref();
        if hyp.is_empty() || r.is_empty() {
            continue;
        }
        best = best.max(meteor_breakdown(hyp, r, stages, params, resources)?.score);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{normalize, TextPipeline};
    use approx::assert_abs_diff_eq;
    use MatcherStage::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(normalize).collect()
    }

    #[test]
    fn exact_identity() {
        let x = toks("क ख");
        let a = align(&x, &x, StageSet::new([Exact]), &MatchResources::default()).unwrap();
        assert_eq!(a.matches.len(), 2);
        assert!(a.matches.iter().all(|m| m.hyp == m.reference && m.stage == Exact));
        assert_eq!(count_chunks(&a), 1);
    }

    #[test]
    fn stem_stage() {
        let res = MatchResources::default();
        let a = align(&toks("लड़के"), &toks("लड़का"), StageSet::new([Exact, Stem]), &res).unwrap();
        assert_eq!(a.matched_by(Stem), 1);
        let a = align(&toks("लड़के"), &toks("लड़का"), StageSet::new([Exact]), &res).unwrap();
        assert_eq!(a.matched_hyp_tokens(), 0);
    }

    #[test]
    fn synonym_stage() {
        let res = MatchResources {
            synonyms: SynonymLexicon::parse("1\tघर\tमकान\n", &TextPipeline::default()).unwrap(),
            ..Default::default()
        };
        let a = align(&toks("घर"), &toks("मकान"), StageSet::new([Exact, Synonym]), &res).unwrap();
        assert_eq!(a.matched_by(Synonym), 1);
    }

    #[test]
    fn paraphrase_prefers_longest_phrase() {
        let table = ParaphraseTable::parse("a b\tx y z\nb\tz\n", &TextPipeline::default()).unwrap();
        let res = MatchResources {
            paraphrases: table,
            ..Default::default()
        };
        let a = align(&toks("a b c"), &toks("x y z c"), StageSet::all(), &res).unwrap();
        a.validate().unwrap();
        assert_eq!(a.matches.len(), 2);
        let para = a.matches.iter().find(|m| m.stage == Paraphrase).unwrap();
        assert_eq!((para.hyp.clone(), para.reference.clone()), (0..2, 0..3));
        assert_eq!(count_chunks(&a), 1);
    }

    #[test]
    fn exact_stage_is_required() {
        let x = toks("a");
        assert_eq!(
            align(&x, &x, StageSet::new([Stem]), &MatchResources::default()),
            Err(MeteorError::MissingExactStage)
        );
    }

    #[test]
    fn leftmost_reference_position_wins() {
        let a = align(&toks("a"), &toks("b a a"), StageSet::new([Exact]), &MatchResources::default())
            .unwrap();
        assert_eq!(a.matches[0].reference, 1..2);
    }

    #[test]
    fn chunk_examples() {
        let res = MatchResources::default();
        let e = StageSet::new([Exact]);
        let a = align(&toks("a b"), &toks("b a"), e, &res).unwrap();
        assert_eq!(count_chunks(&a), 2);
        let a = align(&toks("a b"), &toks("c d"), e, &res).unwrap();
        assert_eq!(count_chunks(&a), 0);
        let a = align(&toks("a b c"), &toks("a c"), e, &res).unwrap();
        assert_eq!(count_chunks(&a), 2);
    }

    #[test]
    fn worked_example() {
        let b = meteor_breakdown(
            &toks("a b c"),
            &toks("a c"),
            StageSet::new([Exact]),
            &MeteorParams::default(),
            &MatchResources::default(),
        )
        .unwrap();
        assert_eq!((b.matched, b.chunks), (2, 2));
        assert_abs_diff_eq!(b.precision, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.recall, 1.0, epsilon = 1e-15);
        // Fmean = (2/3) / (0.9 * 2/3 + 0.1) = 0.952381, penalty = 0.5 * 1^3
        assert_abs_diff_eq!(b.fmean, 0.9523809523809523, epsilon = 1e-12);
        assert_abs_diff_eq!(b.penalty, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.score, 0.4762, epsilon = 1e-4);
    }

    #[test]
    fn identity_and_disjoint_closed_forms() {
        let params = MeteorParams::default();
        let res = MatchResources::default();
        for m in 1..6 {
            let x: Vec<String> = (0..m).map(|i| format!("w{i}")).collect();
            let s = meteor_segment(&x, std::slice::from_ref(&x), StageSet::new([Exact]), &params, &res).unwrap();
            let expected = 1.0 - params.gamma * (1.0 / m as f64).powf(params.beta);
            assert_abs_diff_eq!(s, expected, epsilon = 1e-12);
        }
        let s = meteor_segment(&toks("a b"), &[toks("c d")], StageSet::all(), &params, &res).unwrap();
        assert_eq!(s, 0.0);
        let s = meteor_segment(&[], &[toks("c d")], StageSet::all(), &params, &res).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn best_reference_wins() {
        let params = MeteorParams::default();
        let res = MatchResources::default();
        let hyp = toks("a b c");
        let s = meteor_segment(&hyp, &[toks("x y"), hyp.clone()], StageSet::new([Exact]), &params, &res)
            .unwrap();
        assert_abs_diff_eq!(s, 1.0 - 0.5 / 27.0, epsilon = 1e-12);
    }

    #[test]
    fn report_stage_sets_in_order() {
        let sets = report_stage_sets();
        assert_eq!(sets.len(), 4);
        assert!(sets.iter().all(|s| s.contains(Exact)));
        assert_eq!(sets[3], StageSet::all());
        let ids: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        assert_eq!(ids, ["es", "ey", "esy", "esyp"]);
        for id in &ids {
            assert_eq!(id.parse::<StageSet>().unwrap().to_string(), *id);
        }
        assert!("se".parse::<StageSet>().is_err());
        assert!("".parse::<StageSet>().is_err());
        assert!("ex".parse::<StageSet>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MeteorParams::new(1.2, 3.0, 0.5).is_err());
        assert!(MeteorParams::new(0.9, -1.0, 0.5).is_err());
        assert!(MeteorParams::new(0.9, 3.0, 1.5).is_err());
        assert!(MeteorParams::new(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn inserting_a_stage_is_not_monotone() {
        // stem(pa) == stem(pd), pa~rc and qb~pd: a stem stage placed before
        // synonym takes pa-pd and blocks both synonym matches
        let res = MatchResources {
            stemmer: SuffixInventory::new(["a", "d"]),
            synonyms: SynonymLexicon::parse("1\tpa\trc\n2\tqb\tpd\n", &TextPipeline::default())
                .unwrap(),
            ..Default::default()
        };
        let (hyp, reference) = (toks("pa qb"), toks("rc pd"));
        let ey = align(&hyp, &reference, StageSet::new([Exact, Synonym]), &res).unwrap();
        let esy = align(&hyp, &reference, StageSet::new([Exact, Stem, Synonym]), &res).unwrap();
        assert_eq!(ey.matched_hyp_tokens(), 2);
        assert_eq!(esy.matched_hyp_tokens(), 1);
        // appending a stage at the end never loses matches
        let es = align(&hyp, &reference, StageSet::new([Exact, Stem]), &res).unwrap();
        assert!(es.matched_hyp_tokens() <= esy.matched_hyp_tokens());
    }

    #[test]
    fn validation_catches_overlap() {
        let bad = Alignment {
            matches: vec![
                Match { hyp: 0..1, reference: 0..1, stage: Exact },
                Match { hyp: 0..1, reference: 1..2, stage: Exact },
            ],
            hyp_len: 2,
            ref_len: 2,
        };
        assert_eq!(bad.validate(), Err(AlignmentError::HypOverlap(0)));
        let bad = Alignment {
            matches: vec![Match { hyp: 0..2, reference: 0..1, stage: Stem }],
            hyp_len: 2,
            ref_len: 2,
        };
        assert!(matches!(bad.validate(), Err(AlignmentError::NotUnigram { .. })));
    }
}
