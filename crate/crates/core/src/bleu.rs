//! Clipped n-gram precision, BLEU and the arithmetic-mean (NIST-style)
//! variant.
//!
//! The default brevity factor is the linear `min(1, c / r)`; the classic
//! exponential penalty is available through [`BrevityMode`]. With several
//! references the effective reference length is the one closest to the
//! hypothesis length, ties going to the shorter reference.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("hypothesis is empty")]
    EmptyHypothesis,
    #[error("at least one reference is required")]
    NoReferences,
    #[error("nothing to aggregate")]
    NoSegments,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrevityMode {
    /// `min(1, c / r)`
    #[default]
    PaperLinear,
    /// `1` if `c >= r`, else `exp(1 - r / c)`
    ClassicExponential,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// `p_n = (matched + eps) / (total + eps)`; an order with no hypothesis
    /// n-grams gets `p_n = eps`.
    AddEpsilon(f64),
}

/// Smoothing used when sentence scores feed a correlation.
pub const CORRELATION_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BleuConfig {
    weights: Vec<f64>,
    pub brevity: BrevityMode,
    pub smoothing: Smoothing,
}

impl BleuConfig {
    pub fn new(
        weights: Vec<f64>,
        brevity: BrevityMode,
        smoothing: Smoothing,
    ) -> Result<Self, MetricError> {
        if weights.is_empty() || weights.len() > 4 {
            return Err(MetricError::InvalidConfig(format!(
                "max_n must be in 1..=4, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MetricError::InvalidConfig("weights must be non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricError::InvalidConfig(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        if let Smoothing::AddEpsilon(eps) = smoothing {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(MetricError::InvalidConfig(format!(
                    "epsilon must be in (0, 1], got {eps}"
                )));
            }
        }
        Ok(Self {
            weights,
            brevity,
            smoothing,
        })
    }

    /// `w_n = 1 / max_n`, linear brevity factor, no smoothing.
    pub fn uniform(max_n: usize) -> Result<Self, MetricError> {
        if max_n == 0 {
            return Err(MetricError::InvalidConfig("max_n must be at least 1".into()));
        }
        Self::new(
            vec![1.0 / max_n as f64; max_n],
            BrevityMode::default(),
            Smoothing::None,
        )
    }

    pub fn with_brevity(mut self, brevity: BrevityMode) -> Self {
        self.brevity = brevity;
        self
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn max_n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Every contiguous `n`-token window, with multiplicity.
pub fn ngram_counts<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || seq.len() < n {
        return counts;
    }
    for w in seq.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// `(matched_clipped, total_hyp)` for order `n`: each hypothesis n-gram is
/// credited at most its largest count in any single reference.
pub fn clipped_matches<R: AsRef<[String]>>(hyp: &[String], refs: &[R], n: usize) -> (u64, u64) {
    if n == 0 {
        return (0, 0);
    }
    let hyp_counts = ngram_counts(hyp, n);
    let total = hyp.len().saturating_sub(n - 1) as u64;
    if hyp_counts.is_empty() {
        return (0, total);
    }
    let mut max_ref: HashMap<&[String], usize> = HashMap::new();
    for r in refs {
        for (g, c) in ngram_counts(r.as_ref(), n) {
            if hyp_counts.contains_key(g) {
                let slot = max_ref.entry(g).or_insert(0);
                *slot = (*slot).max(c);
            }
        }
    }
    let matched = hyp_counts
        .iter()
        .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)) as u64)
        .sum();
    (matched, total)
}

/// Reference length closest to `hyp_len`; ties go to the shorter one.
pub fn effective_ref_len(hyp_len: usize, ref_lens: impl IntoIterator<Item = usize>) -> usize {
    ref_lens
        .into_iter()
        .min_by_key(|&r| (r.abs_diff(hyp_len), r))
        .unwrap_or(0)
}

pub fn brevity_factor(hyp_len: u64, ref_len: u64, mode: BrevityMode) -> Result<f64, MetricError> {
    if hyp_len == 0 {
        return Err(MetricError::EmptyHypothesis);
    }
    if hyp_len >= ref_len {
        return Ok(1.0);
    }
    let (c, r) = (hyp_len as f64, ref_len as f64);
    Ok(match mode {
        BrevityMode::PaperLinear => c / r,
        BrevityMode::ClassicExponential => (1.0 - r / c).exp(),
    })
}

/// Sufficient statistics for BLEU over one segment or a pooled set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramStats {
    pub matched: Vec<u64>,
    pub total: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl NgramStats {
    pub fn collect<R: AsRef<[String]>>(
        hyp: &[String],
        refs: &[R],
        max_n: usize,
    ) -> Result<Self, MetricError> {
        if refs.is_empty() {
            return Err(MetricError::NoReferences);
        }
        let (matched, total) = (1..=max_n).map(|n| clipped_matches(hyp, refs, n)).unzip();
        let ref_len = effective_ref_len(hyp.len(), refs.iter().map(|r| r.as_ref().len()));
        Ok(Self {
            matched,
            total,
            hyp_len: hyp.len() as u64,
            ref_len: ref_len as u64,
        })
    }

    pub fn max_n(&self) -> usize {
        self.matched.len()
    }

    /// Sums counts and lengths across segments.
    pub fn pooled<'a>(stats: impl IntoIterator<Item = &'a NgramStats>) -> Option<NgramStats> {
        let mut iter = stats.into_iter();
        let mut acc = iter.next()?.clone();
        for s in iter {
            let n = acc.max_n().min(s.max_n());
            acc.matched.truncate(n);
            acc.total.truncate(n);
            for k in 0..n {
                acc.matched[k] += s.matched[k];
                acc.total[k] += s.total[k];
            }
            acc.hyp_len += s.hyp_len;
            acc.ref_len += s.ref_len;
        }
        Some(acc)
    }

    /// Precision of order `n` (1-based) after smoothing.
    pub fn precision(&self, n: usize, smoothing: Smoothing) -> f64 {
        let (m, t) = (self.matched[n - 1] as f64, self.total[n - 1] as f64);
        match smoothing {
            Smoothing::None if t == 0.0 => 0.0,
            Smoothing::None => m / t,
            Smoothing::AddEpsilon(eps) if t == 0.0 => eps,
            Smoothing::AddEpsilon(eps) => (m + eps) / (t + eps),
        }
    }
}

/// Brevity factor times the weighted geometric mean of the precisions.
pub fn bleu_from_stats(stats: &NgramStats, config: &BleuConfig) -> f64 {
    assert!(stats.max_n() >= config.max_n(), "statistics do not cover max_n");
    let Ok(factor) = brevity_factor(stats.hyp_len, stats.ref_len, config.brevity) else {
        return 0.0;
    };
    let mut log_sum = 0.0;
    let mut arith = 0.0;
    for (k, &w) in config.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let p = stats.precision(k + 1, config.smoothing);
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += w * p.ln();
        arith += w * p;
    }
    // exp(ln p) can round one ulp above p; the weighted geometric mean never
    // exceeds the weighted arithmetic mean, so cap it there.
    (factor * log_sum.exp().min(arith)).clamp(0.0, 1.0)
}

/// Brevity factor times the arithmetic mean of the unsmoothed precisions.
/// Orders with no hypothesis n-grams contribute 0.
pub fn nist_from_stats(stats: &NgramStats, max_n: usize, brevity: BrevityMode) -> f64 {
    assert!(stats.max_n() >= max_n && max_n >= 1);
    let Ok(factor) = brevity_factor(stats.hyp_len, stats.ref_len, brevity) else {
        return 0.0;
    };
    // same summation as the uniform BLEU weights, so the two means compare exactly
    let w = 1.0 / max_n as f64;
    let mean = (1..=max_n)
        .map(|n| w * stats.precision(n, Smoothing::None))
        .sum::<f64>();
    (factor * mean).clamp(0.0, 1.0)
}

pub fn bleu_segment<R: AsRef<[String]>>(
    hyp: &[String],
    refs: &[R],
    config: &BleuConfig,
) -> Result<f64, MetricError> {
    let stats = NgramStats::collect(hyp, refs, config.max_n())?;
    Ok(bleu_from_stats(&stats, config))
}

/// Corpus-style BLEU: pool the segment statistics, then score once.
pub fn bleu_aggregate(stats: &[NgramStats], config: &BleuConfig) -> Result<f64, MetricError> {
    let pooled = NgramStats::pooled(stats).ok_or(MetricError::NoSegments)?;
    Ok(bleu_from_stats(&pooled, config))
}

pub fn nist_variant_segment<R: AsRef<[String]>>(
    hyp: &[String],
    refs: &[R],
    max_n: usize,
    brevity: BrevityMode,
) -> Result<f64, MetricError> {
    if max_n == 0 {
        return Err(MetricError::InvalidConfig("max_n must be at least 1".into()));
    }
    let stats = NgramStats::collect(hyp, refs, max_n)?;
    Ok(nist_from_stats(&stats, max_n, brevity))
}

pub fn nist_aggregate(
    stats: &[NgramStats],
    max_n: usize,
    brevity: BrevityMode,
) -> Result<f64, MetricError> {
    let pooled = NgramStats::pooled(stats).ok_or(MetricError::NoSegments)?;
    Ok(nist_from_stats(&pooled, max_n, brevity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn ngram_count_examples() {
        let seq = toks("a b a b");
        let c = ngram_counts(&seq, 2);
        assert_eq!(c.len(), 2);
        assert_eq!(c[&seq[0..2]], 2);
        assert_eq!(c[&seq[1..3]], 1);
        assert_eq!(ngram_counts(&seq, 4).len(), 1);
        assert!(ngram_counts(&toks("a b"), 3).is_empty());
    }

    #[test]
    fn clipping() {
        assert_eq!(clipped_matches(&toks("the the the"), &[toks("the cat")], 1), (1, 3));
        let x = toks("a b c d");
        for n in 1..=4 {
            let t = (4 - n + 1) as u64;
            assert_eq!(clipped_matches(&x, std::slice::from_ref(&x), n), (t, t));
        }
        assert_eq!(clipped_matches(&toks("a b c"), &[toks("x y z")], 2), (0, 2));
        // the best single reference sets the clip, not the sum over references
        assert_eq!(
            clipped_matches(&toks("the the the"), &[toks("the cat"), toks("the the dog")], 1),
            (2, 3)
        );
    }

    #[test]
    fn brevity_examples() {
        assert_abs_diff_eq!(
            brevity_factor(3, 4, BrevityMode::PaperLinear).unwrap(),
            0.75,
            epsilon = 1e-15
        );
        for mode in [BrevityMode::PaperLinear, BrevityMode::ClassicExponential] {
            assert_eq!(brevity_factor(5, 4, mode).unwrap(), 1.0);
            assert_eq!(brevity_factor(4, 4, mode).unwrap(), 1.0);
            assert_eq!(brevity_factor(0, 4, mode), Err(MetricError::EmptyHypothesis));
        }
        assert_abs_diff_eq!(
            brevity_factor(2, 4, BrevityMode::ClassicExponential).unwrap(),
            0.36787944117144233,
            epsilon = 1e-15
        );
    }

    #[test]
    fn effective_reference_length() {
        assert_eq!(effective_ref_len(5, [3, 7]), 3);
        assert_eq!(effective_ref_len(5, [7, 4]), 4);
        assert_eq!(effective_ref_len(5, [6, 9]), 6);
    }

    #[test]
    fn bleu_examples() {
        let x = toks("a b c d");
        let cfg = BleuConfig::uniform(4).unwrap();
        assert_eq!(bleu_segment(&x, std::slice::from_ref(&x), &cfg).unwrap(), 1.0);

        let cfg1 = BleuConfig::uniform(1).unwrap();
        let s = bleu_segment(&toks("a b c"), &[toks("a b c d")], &cfg1).unwrap();
        assert_abs_diff_eq!(s, 0.75, epsilon = 1e-15);

        let cfg2 = BleuConfig::uniform(2).unwrap();
        assert_eq!(bleu_segment(&toks("a c b"), &[toks("a b c")], &cfg2).unwrap(), 0.0);
        assert_eq!(bleu_segment(&[], &[toks("a")], &cfg2).unwrap(), 0.0);
        assert_eq!(
            bleu_segment::<Vec<String>>(&toks("a"), &[], &cfg2),
            Err(MetricError::NoReferences)
        );
    }

    #[test]
    fn smoothing_keeps_zero_orders_positive() {
        let cfg = BleuConfig::uniform(2)
            .unwrap()
            .with_smoothing(Smoothing::AddEpsilon(1e-9));
        let s = bleu_segment(&toks("a c b"), &[toks("a b c")], &cfg).unwrap();
        assert!(s > 0.0 && s < 1e-3);
        let x = toks("a b c");
        assert_eq!(bleu_segment(&x, std::slice::from_ref(&x), &cfg).unwrap(), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(BleuConfig::new(vec![0.5, 0.4], BrevityMode::PaperLinear, Smoothing::None).is_err());
        assert!(BleuConfig::new(vec![], BrevityMode::PaperLinear, Smoothing::None).is_err());
        assert!(BleuConfig::new(vec![0.2; 5], BrevityMode::PaperLinear, Smoothing::None).is_err());
        assert!(BleuConfig::new(vec![1.5, -0.5], BrevityMode::PaperLinear, Smoothing::None).is_err());
        assert!(BleuConfig::uniform(0).is_err());
        assert!(BleuConfig::new(vec![1.0], BrevityMode::PaperLinear, Smoothing::AddEpsilon(0.0)).is_err());
    }

    #[test]
    fn aggregate_pools_counts() {
        let cfg1 = BleuConfig::uniform(1).unwrap();
        let a = NgramStats::collect(&toks("a b c"), &[toks("a b c d")], 1).unwrap();
        assert_eq!(
            bleu_aggregate(std::slice::from_ref(&a), &cfg1).unwrap(),
            bleu_from_stats(&a, &cfg1)
        );

        let x = toks("a b c d");
        let id = NgramStats::collect(&x, std::slice::from_ref(&x), 4).unwrap();
        let cfg4 = BleuConfig::uniform(4).unwrap();
        assert_eq!(bleu_aggregate(&[id.clone(), id], &cfg4).unwrap(), 1.0);

        // (1 of 2 matched, len 2 vs 2) and (0 of 2 matched, len 2 vs 2):
        // pooled p_1 = (1 + 0 + eps) / (4 + eps), factor 1
        let s1 = NgramStats::collect(&toks("a x"), &[toks("a b")], 1).unwrap();
        let s2 = NgramStats::collect(&toks("y z"), &[toks("c d")], 1).unwrap();
        let eps = 1e-9;
        let cfg = cfg1.with_smoothing(Smoothing::AddEpsilon(eps));
        let pooled = bleu_aggregate(&[s1, s2], &cfg).unwrap();
        assert_abs_diff_eq!(pooled, (1.0 + eps) / (4.0 + eps), epsilon = 1e-15);

        assert_eq!(bleu_aggregate(&[], &cfg), Err(MetricError::NoSegments));
    }

    #[test]
    fn nist_examples() {
        let x = toks("a b c d");
        assert_eq!(
            nist_variant_segment(&x, std::slice::from_ref(&x), 4, BrevityMode::PaperLinear).unwrap(),
            1.0
        );
        // p_1 = 1, p_2 = 0, factor 1
        let hyp = toks("a b");
        let refs = [toks("b a")];
        let nist = nist_variant_segment(&hyp, &refs, 2, BrevityMode::PaperLinear).unwrap();
        assert_abs_diff_eq!(nist, 0.5, epsilon = 1e-15);
        let bleu = bleu_segment(&hyp, &refs, &BleuConfig::uniform(2).unwrap()).unwrap();
        assert_eq!(bleu, 0.0);
        assert_eq!(
            nist_variant_segment(&toks("x y"), &refs, 2, BrevityMode::PaperLinear).unwrap(),
            0.0
        );
    }
}
