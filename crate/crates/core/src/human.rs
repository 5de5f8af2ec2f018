//! Ten-criterion human adequacy ratings: rubric, validated append-only
//! rating log, and averaging to segment, document and system scores.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SegmentKey};
use crate::scoring::Level;

pub const CRITERIA: usize = 10;
pub const MAX_RATING: i64 = 4;

pub const DEFAULT_RUBRIC: &str = include_str!("../data/rubric.tsv");

#[derive(Debug, thiserror::Error)]
pub enum HumanError {
    #[error("criterion {criterion} has rating {value}, expected 0..={MAX_RATING}")]
    OutOfRangeRating { criterion: usize, value: i64 },
    #[error("expected {CRITERIA} ratings, found {found}")]
    MissingCriterion { found: usize },
    #[error("expected {CRITERIA} ratings, found {found}")]
    ExtraCriterion { found: usize },
    #[error("unknown segment {system_id}/{key}")]
    UnknownSegment { system_id: String, key: SegmentKey },
    #[error("empty judge or system id")]
    MissingId,
    #[error("no ratings")]
    NoRatings,
    #[error("rubric: {0}")]
    Rubric(String),
    #[error("rating log {path} line {line}: {message}")]
    Log {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub index: usize,
    pub short_name: String,
    pub hindi: String,
    pub english: String,
}

/// Exactly ten criteria, indexed 1..=10.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rubric {
    criteria: Vec<Criterion>,
}

impl Default for Rubric {
    fn default() -> Self {
        Self::parse(DEFAULT_RUBRIC).expect("bundled rubric is valid")
    }
}

impl Rubric {
    /// `index<TAB>short_name<TAB>hindi<TAB>english` per line.
    pub fn parse(text: &str) -> Result<Self, HumanError> {
        let mut criteria = Vec::with_capacity(CRITERIA);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(HumanError::Rubric(format!("line {}: expected 4 fields", i + 1)));
            }
            let index: usize = f[0]
                .trim()
                .parse()
                .map_err(|_| HumanError::Rubric(format!("line {}: bad index", i + 1)))?;
            criteria.push(Criterion {
                index,
                short_name: f[1].trim().into(),
                hindi: f[2].trim().into(),
                english: f[3].trim().into(),
            });
        }
        let indices_ok = criteria.iter().enumerate().all(|(i, c)| c.index == i + 1);
        if criteria.len() != CRITERIA || !indices_ok {
            return Err(HumanError::Rubric(format!(
                "expected criteria 1..={CRITERIA} in order, found {}",
                criteria.len()
            )));
        }
        Ok(Self { criteria })
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }
}

/// One judge's ratings of one system's output for one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRecord {
    pub judge_id: String,
    pub system_id: String,
    pub doc_id: String,
    pub seg_id: u32,
    pub ratings: Vec<i64>,
    /// Milliseconds since the Unix epoch, supplied by the client.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatingKey {
    pub judge_id: String,
    pub system_id: String,
    pub key: SegmentKey,
}

impl RatingRecord {
    pub fn segment_key(&self) -> SegmentKey {
        SegmentKey::new(self.doc_id.clone(), self.seg_id)
    }

    pub fn rating_key(&self) -> RatingKey {
        RatingKey {
            judge_id: self.judge_id.clone(),
            system_id: self.system_id.clone(),
            key: self.segment_key(),
        }
    }

    /// Shape checks that need no corpus.
    pub fn validate(&self) -> Result<(), HumanError> {
        if self.judge_id.is_empty() || self.system_id.is_empty() {
            return Err(HumanError::MissingId);
        }
        match self.ratings.len() {
            n if n < CRITERIA => return Err(HumanError::MissingCriterion { found: n }),
            n if n > CRITERIA => return Err(HumanError::ExtraCriterion { found: n }),
            _ => {}
        }
        for (i, &value) in self.ratings.iter().enumerate() {
            if !(0..=MAX_RATING).contains(&value) {
                return Err(HumanError::OutOfRangeRating {
                    criterion: i + 1,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Answers whether a (system, segment) pair can be rated.
pub trait SegmentLookup {
    fn has_segment(&self, system_id: &str, key: &SegmentKey) -> bool;
}

impl SegmentLookup for Corpus {
    fn has_segment(&self, system_id: &str, key: &SegmentKey) -> bool {
        self.system(system_id).is_some() && self.contains(key)
    }
}

pub type RecordId = u64;

/// Append-only log of rating records; the latest record per
/// (judge, system, segment) is the effective one.
#[derive(Debug, Default)]
pub struct RatingLog {
    file: Option<File>,
    history: Vec<RatingRecord>,
    latest: HashMap<RatingKey, usize>,
}

impl RatingLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a line-delimited JSON log and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, HumanError> {
        let path = path.as_ref();
        let mut log = Self::read(path)?;
        log.file = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(log)
    }

    /// Replays a log without opening it for writing. A missing file reads
    /// as an empty log.
    pub fn read(path: impl AsRef<Path>) -> Result<Self, HumanError> {
        let path = path.as_ref();
        let mut log = Self::default();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let bad = |message: String| HumanError::Log {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message,
                };
                let record: RatingRecord =
                    serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
                record.validate().map_err(|e| bad(e.to_string()))?;
                log.push(record);
            }
        }
        Ok(log)
    }

    fn push(&mut self, record: RatingRecord) -> RecordId {
        let id = self.history.len();
        self.latest.insert(record.rating_key(), id);
        self.history.push(record);
        id as RecordId
    }

    pub fn validate_and_store(
        &mut self,
        record: RatingRecord,
        segments: &impl SegmentLookup,
    ) -> Result<RecordId, HumanError> {
        record.validate()?;
        let key = record.segment_key();
        if !segments.has_segment(&record.system_id, &key) {
            return Err(HumanError::UnknownSegment {
                system_id: record.system_id,
                key,
            });
        }
        if let Some(file) = self.file.as_mut() {
            let mut line = serde_json::to_string(&record).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        Ok(self.push(record))
    }

    /// Every record ever stored, in submission order.
    pub fn history(&self) -> &[RatingRecord] {
        &self.history
    }

    /// Latest record per key, ordered by key.
    pub fn effective(&self) -> Vec<&RatingRecord> {
        let mut ids: Vec<(&RatingKey, usize)> = self.latest.iter().map(|(k, &i)| (k, i)).collect();
        ids.sort();
        ids.into_iter().map(|(_, i)| &self.history[i]).collect()
    }

    pub fn is_rated(&self, judge_id: &str, system_id: &str, key: &SegmentKey) -> bool {
        self.latest.contains_key(&RatingKey {
            judge_id: judge_id.to_string(),
            system_id: system_id.to_string(),
            key: key.clone(),
        })
    }

    /// Effective records for one (system, segment), one per judge.
    pub fn records_for(&self, system_id: &str, key: &SegmentKey) -> Vec<&RatingRecord> {
        self.effective()
            .into_iter()
            .filter(|r| r.system_id == system_id && r.doc_id == key.doc_id && r.seg_id == key.seg_id)
            .collect()
    }

    /// Segment human scores for one system keyed by segment.
    pub fn segment_scores(&self, system_id: &str) -> HashMap<SegmentKey, HumanScore> {
        let mut grouped: HashMap<SegmentKey, Vec<&RatingRecord>> = HashMap::new();
        for r in self.effective() {
            if r.system_id == system_id {
                grouped.entry(r.segment_key()).or_default().push(r);
            }
        }
        grouped
            .into_iter()
            .filter_map(|(k, recs)| segment_human_score(&recs).ok().map(|s| (k, s)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HumanScore {
    /// Mean rating on the 0..=4 scale.
    pub value: f64,
    /// `value / 4`.
    pub normalized: f64,
    pub level: Level,
}

impl HumanScore {
    pub fn new(value: f64, level: Level) -> Self {
        Self {
            value,
            normalized: value / MAX_RATING as f64,
            level,
        }
    }
}

/// Flat mean over every criterion rating of every judge.
pub fn segment_human_score(records: &[&RatingRecord]) -> Result<HumanScore, HumanError> {
    if records.is_empty() {
        return Err(HumanError::NoRatings);
    }
    let (sum, count) = records
        .iter()
        .flat_map(|r| r.ratings.iter())
        .fold((0i64, 0usize), |(s, c), &v| (s + v, c + 1));
    if count == 0 {
        return Err(HumanError::NoRatings);
    }
    Ok(HumanScore::new(sum as f64 / count as f64, Level::Segment))
}

/// Unweighted mean of segment scores.
pub fn aggregate_human(level: Level, scores: &[HumanScore]) -> Result<HumanScore, HumanError> {
    if scores.is_empty() {
        return Err(HumanError::NoRatings);
    }
    let mean = scores.iter().map(|s| s.value).sum::<f64>() / scores.len() as f64;
    Ok(HumanScore::new(mean, level))
}
