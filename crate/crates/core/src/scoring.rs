//! Metric configurations by id and corpus-level scoring of attached systems.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bleu::{self, BleuConfig, BrevityMode, MetricError, NgramStats, Smoothing};
use crate::corpus::{Corpus, Segment, SegmentKey};
use crate::meteor::{self, MatchResources, MeteorError, MeteorParams, StageSet};
use crate::text::{TextPipeline, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Segment,
    Document,
    System,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Segment => "segment",
            Level::Document => "document",
            Level::System => "system",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "segment" => Ok(Level::Segment),
            "document" => Ok(Level::Document),
            "system" => Ok(Level::System),
            _ => Err(format!("unknown level {s:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Meteor(#[from] MeteorError),
    #[error("unknown metric config {0:?}")]
    UnknownConfig(String),
    #[error("system {0:?} is not attached")]
    UnknownSystem(String),
    #[error("segment {key} has {available} usable references among the first {requested}")]
    InsufficientReferences {
        key: SegmentKey,
        requested: usize,
        available: usize,
    },
}

/// A metric variant: `bleu-N`, `nist-N` or `meteor-<stages>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricConfig {
    Bleu(usize),
    Nist(usize),
    Meteor(StageSet),
}

impl MetricConfig {
    /// The eight report rows, BLEU 1..4 then the four METEOR stage sets.
    pub fn report_rows() -> Vec<MetricConfig> {
        (1..=4)
            .map(MetricConfig::Bleu)
            .chain(meteor::report_stage_sets().into_iter().map(MetricConfig::Meteor))
            .collect()
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    /// Hindi row label as used in the published report layout.
    pub fn label(&self) -> String {
        use crate::meteor::MatcherStage::*;
        match self {
            MetricConfig::Bleu(n) => format!("ब्लू {n}-ग्राम"),
            MetricConfig::Nist(n) => format!("निस्ट {n}-ग्राम"),
            MetricConfig::Meteor(stages) => {
                let names: Vec<&str> = stages
                    .iter()
                    .map(|s| match s {
                        Exact => "शाब्दिक",
                        Stem => "मूल-शब्द",
                        Synonym => "पर्यायवाची",
                        Paraphrase => "पैराफ्रेज़",
                    })
                    .collect();
                let joined = match names.split_last() {
                    Some((last, rest)) if !rest.is_empty() => {
                        format!("{} व {last}", rest.join(", "))
                    }
                    _ => names.join(""),
                };
                format!("मेटियोर {joined} मिलान")
            }
        }
    }

    pub fn parse_list(csv: &str) -> Result<Vec<MetricConfig>, ScoreError> {
        csv.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for MetricConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricConfig::Bleu(n) => write!(f, "bleu-{n}"),
            MetricConfig::Nist(n) => write!(f, "nist-{n}"),
            MetricConfig::Meteor(s) => write!(f, "meteor-{s}"),
        }
    }
}

impl FromStr for MetricConfig {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ScoreError::UnknownConfig(s.to_string());
        let order = |n: &str| match n.parse::<usize>() {
            Ok(n @ 1..=4) => Ok(n),
            _ => Err(unknown()),
        };
        if let Some(n) = s.strip_prefix("bleu-") {
            Ok(MetricConfig::Bleu(order(n)?))
        } else if let Some(n) = s.strip_prefix("nist-") {
            Ok(MetricConfig::Nist(order(n)?))
        } else if let Some(st) = s.strip_prefix("meteor-") {
            let stages: StageSet = st.parse().map_err(|_| unknown())?;
            if !stages.contains(crate::meteor::MatcherStage::Exact) {
                return Err(unknown());
            }
            Ok(MetricConfig::Meteor(stages))
        } else {
            Err(unknown())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScore {
    pub value: f64,
    pub config_id: String,
    pub level: Level,
}

/// Everything needed to turn raw text into metric scores.
#[derive(Debug, Clone, Default)]
pub struct Scorer {
    pub pipeline: TextPipeline,
    pub resources: MatchResources,
    pub meteor: MeteorParams,
    pub brevity: BrevityMode,
    pub smoothing: Smoothing,
}

/// Scores of one config for one system at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigScores {
    pub config: MetricConfig,
    /// Corpus order.
    pub segments: Vec<f64>,
    pub documents: Vec<(String, f64)>,
    pub system: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemScores {
    pub system_id: String,
    pub ref_count: usize,
    pub keys: Vec<SegmentKey>,
    pub configs: Vec<ConfigScores>,
}

enum Prepared {
    Stats(NgramStats),
    Value(f64),
}

impl Scorer {
    pub fn prepare(&self, raw: &str) -> TokenSequence {
        self.pipeline.prepare(raw)
    }

    fn bleu_config(&self, n: usize) -> Result<BleuConfig, MetricError> {
        Ok(BleuConfig::uniform(n)?
            .with_brevity(self.brevity)
            .with_smoothing(self.smoothing))
    }

    /// Score of one prepared hypothesis against prepared references.
    pub fn score_tokens(
        &self,
        config: MetricConfig,
        hyp: &TokenSequence,
        refs: &[TokenSequence],
    ) -> Result<f64, ScoreError> {
        Ok(match config {
            MetricConfig::Bleu(n) => bleu::bleu_segment(hyp, refs, &self.bleu_config(n)?)?,
            MetricConfig::Nist(n) => bleu::nist_variant_segment(hyp, refs, n, self.brevity)?,
            MetricConfig::Meteor(stages) => {
                meteor::meteor_segment(hyp, refs, stages, &self.meteor, &self.resources)?
            }
        })
    }

    pub fn score_text(
        &self,
        config: MetricConfig,
        hyp: &str,
        refs: &[&str],
    ) -> Result<f64, ScoreError> {
        let refs: Vec<TokenSequence> = refs.iter().map(|r| self.prepare(r)).collect();
        self.score_tokens(config, &self.prepare(hyp), &refs)
    }

    /// Prepared references from the first `ref_count` positions.
    pub fn references(
        &self,
        segment: &Segment,
        ref_count: usize,
    ) -> Result<Vec<TokenSequence>, ScoreError> {
        let refs: Vec<TokenSequence> = segment
            .available_references(ref_count)
            .map(|r| self.prepare(r))
            .collect();
        if refs.is_empty() || segment.references.len() < ref_count {
            return Err(ScoreError::InsufficientReferences {
                key: segment.key(),
                requested: ref_count,
                available: refs.len(),
            });
        }
        Ok(refs)
    }

    fn prepare_segment(
        &self,
        config: MetricConfig,
        hyp: &TokenSequence,
        refs: &[TokenSequence],
    ) -> Result<Prepared, ScoreError> {
        Ok(match config {
            MetricConfig::Bleu(n) | MetricConfig::Nist(n) => {
                Prepared::Stats(NgramStats::collect(hyp, refs, n)?)
            }
            MetricConfig::Meteor(_) => Prepared::Value(self.score_tokens(config, hyp, refs)?),
        })
    }

    fn score_stats(&self, config: MetricConfig, stats: &NgramStats) -> Result<f64, ScoreError> {
        Ok(match config {
            MetricConfig::Bleu(n) => bleu::bleu_from_stats(stats, &self.bleu_config(n)?),
            MetricConfig::Nist(n) => bleu::nist_from_stats(stats, n, self.brevity),
            MetricConfig::Meteor(_) => unreachable!("METEOR has no n-gram statistics"),
        })
    }

    /// Scores every segment of one system with each config, restricted to
    /// the first `ref_count` references, and rolls the scores up per
    /// document (pooled n-gram counts for BLEU/NIST, mean for METEOR) and
    /// for the whole system.
    pub fn score_system(
        &self,
        corpus: &Corpus,
        system_id: &str,
        configs: &[MetricConfig],
        ref_count: usize,
    ) -> Result<SystemScores, ScoreError> {
        let system = corpus
            .system(system_id)
            .ok_or_else(|| ScoreError::UnknownSystem(system_id.to_string()))?;
        let segments: Vec<&Segment> = corpus.segments().collect();
        let prepared: Vec<(TokenSequence, Vec<TokenSequence>)> = segments
            .iter()
            .zip(&system.hypotheses)
            .map(|(seg, hyp)| Ok((self.prepare(hyp), self.references(seg, ref_count)?)))
            .collect::<Result<_, ScoreError>>()?;

        let mut out = Vec::with_capacity(configs.len());
        for &config in configs {
            let per_segment = self.map_segments(&prepared, |(h, r)| self.prepare_segment(config, h, r))?;
            let segment_values = per_segment
                .iter()
                .map(|p| match p {
                    Prepared::Stats(s) => self.score_stats(config, s),
                    Prepared::Value(v) => Ok(*v),
                })
                .collect::<Result<Vec<f64>, _>>()?;

            let roll_up = |range: std::ops::Range<usize>| -> Result<f64, ScoreError> {
                match &per_segment[range.start] {
                    Prepared::Stats(_) => {
                        let stats: Vec<&NgramStats> = per_segment[range]
                            .iter()
                            .map(|p| match p {
                                Prepared::Stats(s) => s,
                                Prepared::Value(_) => unreachable!(),
                            })
                            .collect();
                        let pooled = NgramStats::pooled(stats).ok_or(MetricError::NoSegments)?;
                        self.score_stats(config, &pooled)
                    }
                    Prepared::Value(_) => {
                        let v = &segment_values[range];
                        Ok(v.iter().sum::<f64>() / v.len() as f64)
                    }
                }
            };

            let mut documents = Vec::with_capacity(corpus.documents.len());
            let mut offset = 0;
            for doc in &corpus.documents {
                let end = offset + doc.segments.len();
                if end > offset {
                    documents.push((doc.doc_id.clone(), roll_up(offset..end)?));
                }
                offset = end;
            }
            let system_value = if segment_values.is_empty() {
                0.0
            } else {
                roll_up(0..segment_values.len())?
            };
            out.push(ConfigScores {
                config,
                segments: segment_values,
                documents,
                system: system_value,
            });
        }
        Ok(SystemScores {
            system_id: system_id.to_string(),
            ref_count,
            keys: corpus.keys().collect(),
            configs: out,
        })
    }

    #[cfg(feature = "parallel")]
    fn map_segments<T: Send, F>(
        &self,
        prepared: &[(TokenSequence, Vec<TokenSequence>)],
        f: F,
    ) -> Result<Vec<T>, ScoreError>
    where
        F: Fn(&(TokenSequence, Vec<TokenSequence>)) -> Result<T, ScoreError> + Sync + Send,
    {
        use rayon::prelude::*;
        prepared.par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn map_segments<T, F>(
        &self,
        prepared: &[(TokenSequence, Vec<TokenSequence>)],
        f: F,
    ) -> Result<Vec<T>, ScoreError>
    where
        F: Fn(&(TokenSequence, Vec<TokenSequence>)) -> Result<T, ScoreError>,
    {
        prepared.iter().map(f).collect()
    }
}

/// Writes `system_id, config_id, doc_id, seg_id, value` records.
pub fn write_segment_records<W: Write>(mut out: W, scores: &[SystemScores]) -> std::io::Result<()> {
    writeln!(out, "system_id\tconfig_id\tdoc_id\tseg_id\tvalue")?;
    for sys in scores {
        for c in &sys.configs {
            for (key, v) in sys.keys.iter().zip(&c.segments) {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    sys.system_id, c.config, key.doc_id, key.seg_id, v
                )?;
            }
        }
    }
    Ok(())
}

/// Writes `system_id, config_id, doc_id, value` roll-up records.
pub fn write_document_records<W: Write>(mut out: W, scores: &[SystemScores]) -> std::io::Result<()> {
    writeln!(out, "system_id\tconfig_id\tdoc_id\tvalue")?;
    for sys in scores {
        for c in &sys.configs {
            for (doc, v) in &c.documents {
                writeln!(out, "{}\t{}\t{}\t{}", sys.system_id, c.config, doc, v)?;
            }
        }
    }
    Ok(())
}

/// Writes `system_id, config_id, value` roll-up records.
pub fn write_system_records<W: Write>(mut out: W, scores: &[SystemScores]) -> std::io::Result<()> {
    writeln!(out, "system_id\tconfig_id\tvalue")?;
    for sys in scores {
        for c in &sys.configs {
            writeln!(out, "{}\t{}\t{}", sys.system_id, c.config, c.system)?;
        }
    }
    Ok(())
}
