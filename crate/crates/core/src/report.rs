//! Human-vs-metric correlation reports: metric configs as rows, one column
//! per (system, reference count).

use std::fmt::Write as _;

use serde::Serialize;

use crate::correlation::{Correlation, CorrelationError, CorrelationMethod};
use crate::corpus::{Corpus, SegmentKey};
use crate::human::{aggregate_human, HumanScore, RatingLog};
use crate::scoring::{Level, MetricConfig, ScoreError, Scorer, SystemScores};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error("corpus has {available} reference files, {requested} requested")]
    InsufficientReferences { requested: usize, available: usize },
    #[error("{} segment(s) have no ratings, first: {}", keys.len(), keys.first().map(String::as_str).unwrap_or(""))]
    MissingRatings { keys: Vec<String> },
    #[error("corpus has no attached systems")]
    NoSystems,
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Aligned human and metric observations for one report cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVectorPair {
    pub keys: Vec<String>,
    pub human: Vec<f64>,
    pub metric: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportColumn {
    /// System id, or `*` for system-level reports that correlate across
    /// systems.
    pub system_id: String,
    pub ref_count: usize,
}

impl ReportColumn {
    pub fn label(&self) -> String {
        format!("{}/{}", self.system_id, self.ref_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub method: CorrelationMethod,
    pub level: Level,
    pub rows: Vec<String>,
    pub row_labels: Vec<String>,
    pub columns: Vec<ReportColumn>,
    /// `cells[row][column]`
    pub cells: Vec<Vec<Correlation>>,
}

#[derive(Debug, Clone)]
pub struct ReportRequest {
    pub configs: Vec<MetricConfig>,
    pub ref_counts: Vec<usize>,
    pub method: CorrelationMethod,
    pub level: Level,
}

impl Default for ReportRequest {
    fn default() -> Self {
        Self {
            configs: MetricConfig::report_rows(),
            ref_counts: vec![1, 4],
            method: CorrelationMethod::Pearson,
            level: Level::Segment,
        }
    }
}

/// Segment human scores for every system, failing with the full list of
/// unrated (system, segment) pairs.
pub fn human_segment_scores(
    corpus: &Corpus,
    log: &RatingLog,
) -> Result<Vec<Vec<HumanScore>>, ReportError> {
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(corpus.systems.len());
    for sys in &corpus.systems {
        let scores = log.segment_scores(&sys.system_id);
        let mut row = Vec::with_capacity(corpus.segment_count());
        for key in corpus.keys() {
            match scores.get(&key) {
                Some(s) => row.push(*s),
                None => missing.push(format!("{}/{}", sys.system_id, key)),
            }
        }
        out.push(row);
    }
    if !missing.is_empty() {
        return Err(ReportError::MissingRatings { keys: missing });
    }
    Ok(out)
}

fn doc_human_scores(corpus: &Corpus, segment_scores: &[HumanScore]) -> Vec<f64> {
    let mut out = Vec::with_capacity(corpus.documents.len());
    let mut offset = 0;
    for doc in &corpus.documents {
        let end = offset + doc.segments.len();
        if end > offset {
            let agg = aggregate_human(Level::Document, &segment_scores[offset..end])
                .expect("non-empty document");
            out.push(agg.value);
        }
        offset = end;
    }
    out
}

/// Pairs human and metric vectors for every (config, column) at the
/// requested level. Returns `pairs[row][column]` and the columns.
pub fn build_pairs(
    corpus: &Corpus,
    log: &RatingLog,
    scorer: &Scorer,
    request: &ReportRequest,
) -> Result<(Vec<Vec<ScoreVectorPair>>, Vec<ReportColumn>), ReportError> {
    if corpus.systems.is_empty() {
        return Err(ReportError::NoSystems);
    }
    let available = corpus.reference_count();
    if let Some(&requested) = request.ref_counts.iter().find(|&&k| k > available || k == 0) {
        return Err(ReportError::InsufficientReferences {
            requested,
            available,
        });
    }
    let human = human_segment_scores(corpus, log)?;

    // scores[ref_index][system_index]
    let mut scores: Vec<Vec<SystemScores>> = Vec::with_capacity(request.ref_counts.len());
    for &rc in &request.ref_counts {
        let per_system = corpus
            .systems
            .iter()
            .map(|s| scorer.score_system(corpus, &s.system_id, &request.configs, rc))
            .collect::<Result<Vec<_>, _>>()?;
        scores.push(per_system);
    }

    let seg_keys: Vec<String> = corpus.keys().map(|k: SegmentKey| k.to_string()).collect();
    let doc_keys: Vec<String> = corpus
        .documents
        .iter()
        .filter(|d| !d.segments.is_empty())
        .map(|d| d.doc_id.clone())
        .collect();

    let mut columns = Vec::new();
    let mut pairs: Vec<Vec<ScoreVectorPair>> = vec![Vec::new(); request.configs.len()];
    match request.level {
        Level::Segment | Level::Document => {
            for (si, sys) in corpus.systems.iter().enumerate() {
                let human_vec: Vec<f64> = match request.level {
                    Level::Segment => human[si].iter().map(|h| h.value).collect(),
                    _ => doc_human_scores(corpus, &human[si]),
                };
                for (ri, &rc) in request.ref_counts.iter().enumerate() {
                    columns.push(ReportColumn {
                        system_id: sys.system_id.clone(),
                        ref_count: rc,
                    });
                    for (row, cs) in scores[ri][si].configs.iter().enumerate() {
                        let (keys, metric) = match request.level {
                            Level::Segment => (seg_keys.clone(), cs.segments.clone()),
                            _ => (doc_keys.clone(), cs.documents.iter().map(|d| d.1).collect()),
                        };
                        pairs[row].push(ScoreVectorPair {
                            keys,
                            human: human_vec.clone(),
                            metric,
                        });
                    }
                }
            }
        }
        Level::System => {
            let keys: Vec<String> = corpus.systems.iter().map(|s| s.system_id.clone()).collect();
            let human_vec: Vec<f64> = human
                .iter()
                .map(|h| aggregate_human(Level::System, h).map(|s| s.value))
                .collect::<Result<_, _>>()
                .map_err(|_| ReportError::MissingRatings { keys: keys.clone() })?;
            for (ri, &rc) in request.ref_counts.iter().enumerate() {
                columns.push(ReportColumn {
                    system_id: "*".into(),
                    ref_count: rc,
                });
                for (row, pair_row) in pairs.iter_mut().enumerate() {
                    pair_row.push(ScoreVectorPair {
                        keys: keys.clone(),
                        human: human_vec.clone(),
                        metric: scores[ri].iter().map(|s| s.configs[row].system).collect(),
                    });
                }
            }
        }
    }
    Ok((pairs, columns))
}

pub fn build_report(
    corpus: &Corpus,
    log: &RatingLog,
    scorer: &Scorer,
    request: &ReportRequest,
) -> Result<CorrelationReport, ReportError> {
    let (pairs, columns) = build_pairs(corpus, log, scorer, request)?;
    let cells = pairs
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| request.method.apply(&p.human, &p.metric))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationReport {
        method: request.method,
        level: request.level,
        rows: request.configs.iter().map(MetricConfig::id).collect(),
        row_labels: request.configs.iter().map(MetricConfig::label).collect(),
        columns,
        cells,
    })
}

/// Three decimals; undefined cells print as `NA`.
pub fn format_cell(c: Correlation) -> String {
    match c {
        Correlation::Undefined => "NA".into(),
        Correlation::Value(v) => {
            let s = format!("{v:.3}");
            if s == "-0.000" {
                "0.000".into()
            } else {
                s
            }
        }
    }
}

impl CorrelationReport {
    /// Tab-separated grid (tabs shown as spaces):
    ///
    /// ```text
    /// # method=pearson level=segment
    /// config google/1 google/4 ...
    /// bleu-1 0.050 0.099 ...
    /// ```
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# method={} level={}", self.method, self.level);
        out.push_str("config");
        for c in &self.columns {
            out.push('\t');
            out.push_str(&c.label());
        }
        out.push('\n');
        for (id, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(id);
            for &cell in row {
                out.push('\t');
                out.push_str(&format_cell(cell));
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`CorrelationReport::to_tsv`] output. Cell values keep only
    /// the printed precision.
    pub fn from_tsv(text: &str) -> Result<Self, ReportError> {
        let bad = |line: usize, message: String| ReportError::Parse { line, message };
        let mut lines = text.lines().enumerate();
        let (_, meta) = lines.next().ok_or_else(|| bad(1, "empty report".into()))?;
        let mut method = None;
        let mut level = None;
        for part in meta.trim_start_matches('#').split_whitespace() {
            match part.split_once('=') {
                Some(("method", m)) => method = Some(m.parse().map_err(|e| bad(1, e))?),
                Some(("level", l)) => level = Some(l.parse().map_err(|e| bad(1, e))?),
                _ => {}
            }
        }
        let (method, level) = method
            .zip(level)
            .ok_or_else(|| bad(1, "missing method/level header".into()))?;

        let (_, header) = lines.next().ok_or_else(|| bad(2, "missing header".into()))?;
        let mut columns = Vec::new();
        for label in header.split('\t').skip(1) {
            let (sys, rc) = label
                .rsplit_once('/')
                .ok_or_else(|| bad(2, format!("bad column {label:?}")))?;
            let ref_count = rc.parse().map_err(|_| bad(2, format!("bad column {label:?}")))?;
            columns.push(ReportColumn {
                system_id: sys.to_string(),
                ref_count,
            });
        }

        let mut rows = Vec::new();
        let mut row_labels = Vec::new();
        let mut cells = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let id = fields.next().unwrap_or_default();
            let config: MetricConfig = id.parse().map_err(|e: ScoreError| bad(i + 1, e.to_string()))?;
            let row = fields
                .map(|f| match f {
                    "NA" => Ok(Correlation::Undefined),
                    v => v
                        .parse()
                        .map(Correlation::Value)
                        .map_err(|_| bad(i + 1, format!("bad cell {v:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != columns.len() {
                return Err(bad(i + 1, format!("{} cells for {} columns", row.len(), columns.len())));
            }
            rows.push(id.to_string());
            row_labels.push(config.label());
            cells.push(row);
        }
        Ok(Self {
            method,
            level,
            rows,
            row_labels,
            columns,
            cells,
        })
    }

    /// Aligned plain-text table with system names over their reference
    /// columns and the Hindi row label after the numbers.
    pub fn to_text(&self) -> String {
        const CELL: usize = 8;
        let id_width = self.rows.iter().map(|r| r.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        let _ = writeln!(out, "correlation: {} ({} level)", self.method, self.level);

        // group consecutive columns of the same system under one heading
        let mut groups: Vec<(&str, usize)> = Vec::new();
        for c in &self.columns {
            match groups.last_mut() {
                Some((name, n)) if *name == c.system_id => *n += 1,
                _ => groups.push((&c.system_id, 1)),
            }
        }
        let _ = write!(out, "{:id_width$}", "");
        for (name, n) in &groups {
            let width = CELL * n;
            let _ = write!(out, "{name:>width$}");
        }
        out.push('\n');
        let _ = write!(out, "{:id_width$}", "");
        for c in &self.columns {
            let refs = if c.ref_count == 1 {
                "1 ref".to_string()
            } else {
                format!("{} refs", c.ref_count)
            };
            let _ = write!(out, "{refs:>CELL$}");
        }
        out.push('\n');
        for ((id, label), row) in self.rows.iter().zip(&self.row_labels).zip(&self.cells) {
            let _ = write!(out, "{id:id_width$}");
            for &cell in row {
                let _ = write!(out, "{:>CELL$}", format_cell(cell));
            }
            let _ = writeln!(out, "  {label}");
        }
        out
    }

    pub fn cell(&self, config_id: &str, system_id: &str, ref_count: usize) -> Option<Correlation> {
        let r = self.rows.iter().position(|id| id == config_id)?;
        let c = self
            .columns
            .iter()
            .position(|c| c.system_id == system_id && c.ref_count == ref_count)?;
        Some(self.cells[r][c])
    }
}
