//! Evaluation corpus: documents of aligned segments, 1 to 4 references per
//! segment, and the hypotheses of every attached MT system.
//!
//! On disk a corpus is one UTF-8 file per role (source, each reference, each
//! system's hypotheses) holding one segment per line, plus a manifest that
//! maps document ids to inclusive 1-based line ranges, tab-separated:
//!
//! ```text
//! doc1 1 100
//! doc2 101 200
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Largest number of reference translations a segment may carry.
pub const MAX_REFERENCES: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} has {found} lines, expected {expected}")]
    LineCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("source line {line} is blank")]
    EmptySource { line: usize },
    #[error("line {line} has no non-blank reference")]
    MissingReference { line: usize },
    #[error("expected 1..={MAX_REFERENCES} reference files, got {0}")]
    ReferenceCount(usize),
    #[error("manifest line {line}: {message}")]
    ManifestParse { line: usize, message: String },
    #[error("manifest does not cover corpus line {line}")]
    ManifestGap { line: usize },
    #[error("manifest ranges overlap at corpus line {line}")]
    ManifestOverlap { line: usize },
    #[error("manifest range ends at line {end} but the corpus has {lines} lines")]
    ManifestOutOfRange { end: usize, lines: usize },
    #[error("document id {0:?} appears more than once")]
    DuplicateDocument(String),
    #[error("system {0:?} is already attached with different content")]
    DuplicateSystemId(String),
    #[error("invalid system id {0:?}")]
    InvalidSystemId(String),
    #[error("corpus record {line}: {message}")]
    Record { line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Identifies one segment: document id plus 1-based ordinal in the document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentKey {
    pub doc_id: String,
    pub seg_id: u32,
}

impl SegmentKey {
    pub fn new(doc_id: impl Into<String>, seg_id: u32) -> Self {
        Self {
            doc_id: doc_id.into(),
            seg_id,
        }
    }
}

impl fmt::Display for SegmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.doc_id, self.seg_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub doc_id: String,
    pub seg_id: u32,
    pub source: String,
    /// Raw reference lines by file position. A blank entry means that
    /// reference is missing for this segment.
    pub references: Vec<String>,
}

impl Segment {
    pub fn key(&self) -> SegmentKey {
        SegmentKey::new(self.doc_id.clone(), self.seg_id)
    }

    /// Non-blank references among the first `count` reference positions.
    pub fn available_references(&self, count: usize) -> impl Iterator<Item = &str> {
        self.references
            .iter()
            .take(count)
            .map(String::as_str)
            .filter(|r| !r.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemOutput {
    pub system_id: String,
    /// One hypothesis per corpus segment, in corpus order.
    pub hypotheses: Vec<String>,
}

/// Immutable once built; attach systems before sharing it across workers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub systems: Vec<SystemOutput>,
}

/// One inclusive 1-based line range of the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub start_line: usize,
    pub end_line: usize,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(CorpusError::ManifestParse {
                line,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse_num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CorpusError::ManifestParse {
                    line,
                    message: format!("bad line number {s:?}: {e}"),
                })
        };
        let doc_id = fields[0].trim().to_string();
        if doc_id.is_empty() {
            return Err(CorpusError::ManifestParse {
                line,
                message: "empty document id".into(),
            });
        }
        let start_line = parse_num(fields[1])?;
        let end_line = parse_num(fields[2])?;
        if start_line == 0 || end_line < start_line {
            return Err(CorpusError::ManifestParse {
                line,
                message: format!("invalid range {start_line}..={end_line}"),
            });
        }
        entries.push(ManifestEntry {
            doc_id,
            start_line,
            end_line,
        });
    }
    Ok(entries)
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(str::to_string).collect())
}

impl Corpus {
    /// Loads a corpus from a source file, 1..=4 reference files and a
    /// document manifest. Systems are attached separately.
    pub fn load(
        source_path: impl AsRef<Path>,
        reference_paths: &[impl AsRef<Path>],
        manifest_path: impl AsRef<Path>,
    ) -> Result<Self, CorpusError> {
        let source_path = source_path.as_ref();
        let manifest_path = manifest_path.as_ref();
        let source = read_lines(source_path)?;
        let mut references = Vec::with_capacity(reference_paths.len());
        for path in reference_paths {
            let path = path.as_ref();
            let lines = read_lines(path)?;
            if lines.len() != source.len() {
                return Err(CorpusError::LineCountMismatch {
                    path: path.to_path_buf(),
                    expected: source.len(),
                    found: lines.len(),
                });
            }
            references.push(lines);
        }
        let manifest_text = fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
        let manifest = parse_manifest(&manifest_text)?;
        Self::from_lines(source, references, &manifest)
    }

    /// Loads the corpus described by a manifest whose sibling files follow
    /// the default naming: `source.txt` and `ref1.txt` .. `ref4.txt`.
    pub fn load_from_manifest(manifest_path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let manifest_path = manifest_path.as_ref();
        let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let refs: Vec<PathBuf> = (1..=MAX_REFERENCES)
            .map(|k| dir.join(format!("ref{k}.txt")))
            .take_while(|p| p.is_file())
            .collect();
        Self::load(dir.join("source.txt"), &refs, manifest_path)
    }

    /// Builds a corpus from in-memory lines. `references[k][i]` is reference
    /// `k` of line `i`.
    pub fn from_lines(
        source: Vec<String>,
        references: Vec<Vec<String>>,
        manifest: &[ManifestEntry],
    ) -> Result<Self, CorpusError> {
        if references.is_empty() || references.len() > MAX_REFERENCES {
            return Err(CorpusError::ReferenceCount(references.len()));
        }
        let n = source.len();
        for refs in &references {
            if refs.len() != n {
                return Err(CorpusError::LineCountMismatch {
                    path: PathBuf::from("<reference>"),
                    expected: n,
                    found: refs.len(),
                });
            }
        }

        let mut ranges: Vec<&ManifestEntry> = manifest.iter().collect();
        ranges.sort_by_key(|e| e.start_line);
        let mut seen = HashSet::new();
        let mut next = 1;
        for e in &ranges {
            if !seen.insert(e.doc_id.as_str()) {
                return Err(CorpusError::DuplicateDocument(e.doc_id.clone()));
            }
            if e.start_line > next {
                return Err(CorpusError::ManifestGap { line: next });
            }
            if e.start_line < next {
                return Err(CorpusError::ManifestOverlap { line: e.start_line });
            }
            if e.end_line > n {
                return Err(CorpusError::ManifestOutOfRange {
                    end: e.end_line,
                    lines: n,
                });
            }
            next = e.end_line + 1;
        }
        if next <= n {
            return Err(CorpusError::ManifestGap { line: next });
        }

        let mut documents = Vec::with_capacity(ranges.len());
        for e in ranges {
            let mut segments = Vec::with_capacity(e.end_line - e.start_line + 1);
            for line in e.start_line..=e.end_line {
                let i = line - 1;
                if source[i].trim().is_empty() {
                    return Err(CorpusError::EmptySource { line });
                }
                let refs: Vec<String> = references.iter().map(|r| r[i].clone()).collect();
                if refs.iter().all(|r| r.trim().is_empty()) {
                    return Err(CorpusError::MissingReference { line });
                }
                segments.push(Segment {
                    doc_id: e.doc_id.clone(),
                    seg_id: (line - e.start_line + 1) as u32,
                    source: source[i].clone(),
                    references: refs,
                });
            }
            documents.push(Document {
                doc_id: e.doc_id.clone(),
                segments,
            });
        }
        Ok(Corpus {
            documents,
            systems: Vec::new(),
        })
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.documents.iter().flat_map(|d| d.segments.iter())
    }

    pub fn segment_count(&self) -> usize {
        self.documents.iter().map(|d| d.segments.len()).sum()
    }

    pub fn keys(&self) -> impl Iterator<Item = SegmentKey> + '_ {
        self.segments().map(Segment::key)
    }

    /// Number of reference positions (files) in this corpus.
    pub fn reference_count(&self) -> usize {
        self.segments().map(|s| s.references.len()).max().unwrap_or(0)
    }

    /// Position of a segment in corpus order.
    pub fn index_of(&self, key: &SegmentKey) -> Option<usize> {
        let mut offset = 0;
        for doc in &self.documents {
            if doc.doc_id == key.doc_id {
                let k = key.seg_id as usize;
                return (k >= 1 && k <= doc.segments.len()).then(|| offset + k - 1);
            }
            offset += doc.segments.len();
        }
        None
    }

    pub fn segment(&self, key: &SegmentKey) -> Option<&Segment> {
        self.documents
            .iter()
            .find(|d| d.doc_id == key.doc_id)
            .and_then(|d| d.segments.get((key.seg_id as usize).checked_sub(1)?))
    }

    pub fn contains(&self, key: &SegmentKey) -> bool {
        self.segment(key).is_some()
    }

    pub fn system(&self, system_id: &str) -> Option<&SystemOutput> {
        self.systems.iter().find(|s| s.system_id == system_id)
    }

    pub fn hypothesis(&self, system_id: &str, key: &SegmentKey) -> Option<&str> {
        let idx = self.index_of(key)?;
        self.system(system_id)
            .and_then(|s| s.hypotheses.get(idx))
            .map(String::as_str)
    }

    /// Attaches a system's hypothesis file (one line per segment, corpus order).
    pub fn attach_system(
        &mut self,
        system_id: &str,
        hypothesis_path: impl AsRef<Path>,
    ) -> Result<(), CorpusError> {
        let path = hypothesis_path.as_ref();
        let lines = read_lines(path)?;
        if lines.len() != self.segment_count() {
            return Err(CorpusError::LineCountMismatch {
                path: path.to_path_buf(),
                expected: self.segment_count(),
                found: lines.len(),
            });
        }
        self.attach_hypotheses(system_id, lines)
    }

    /// Re-attaching identical content is a no-op; different content under the
    /// same id is rejected.
    pub fn attach_hypotheses(
        &mut self,
        system_id: &str,
        hypotheses: Vec<String>,
    ) -> Result<(), CorpusError> {
        if system_id.is_empty() || system_id.chars().any(|c| c.is_whitespace()) {
            return Err(CorpusError::InvalidSystemId(system_id.to_string()));
        }
        if hypotheses.len() != self.segment_count() {
            return Err(CorpusError::LineCountMismatch {
                path: PathBuf::from(format!("<{system_id}>")),
                expected: self.segment_count(),
                found: hypotheses.len(),
            });
        }
        match self.systems.iter().find(|s| s.system_id == system_id) {
            Some(existing) if existing.hypotheses == hypotheses => Ok(()),
            Some(_) => Err(CorpusError::DuplicateSystemId(system_id.to_string())),
            None => {
                self.systems.push(SystemOutput {
                    system_id: system_id.to_string(),
                    hypotheses,
                });
                Ok(())
            }
        }
    }

    /// Writes one JSON record per segment.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (idx, seg) in self.segments().enumerate() {
            let record = SegmentRecord {
                doc_id: seg.doc_id.clone(),
                seg_id: seg.seg_id,
                source: seg.source.clone(),
                references: seg.references.clone(),
                hypotheses: self
                    .systems
                    .iter()
                    .map(|s| (s.system_id.clone(), s.hypotheses[idx].clone()))
                    .collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads records written by [`Corpus::write_jsonl`].
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut documents: Vec<Document> = Vec::new();
        let mut system_ids: Vec<String> = Vec::new();
        let mut hypotheses: Vec<Vec<String>> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|source| CorpusError::Io {
                path: PathBuf::from("<jsonl>"),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| CorpusError::Record {
                line: lineno,
                message,
            };
            let rec: SegmentRecord =
                serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            if rec.source.trim().is_empty() {
                return Err(CorpusError::EmptySource { line: lineno });
            }
            if rec.references.is_empty() || rec.references.len() > MAX_REFERENCES {
                return Err(CorpusError::ReferenceCount(rec.references.len()));
            }
            if rec.references.iter().all(|r| r.trim().is_empty()) {
                return Err(CorpusError::MissingReference { line: lineno });
            }

            if documents.is_empty() {
                system_ids = rec.hypotheses.keys().cloned().collect();
                hypotheses = vec![Vec::new(); system_ids.len()];
            } else if !rec.hypotheses.keys().eq(system_ids.iter()) {
                return Err(bad("system set differs from the first record".into()));
            }
            for (slot, text) in hypotheses.iter_mut().zip(rec.hypotheses.values()) {
                slot.push(text.clone());
            }

            let new_doc = documents.last().is_none_or(|d| d.doc_id != rec.doc_id);
            if new_doc {
                if documents.iter().any(|d| d.doc_id == rec.doc_id) {
                    return Err(CorpusError::DuplicateDocument(rec.doc_id));
                }
                documents.push(Document {
                    doc_id: rec.doc_id.clone(),
                    segments: Vec::new(),
                });
            }
            let doc = documents.last_mut().expect("document pushed above");
            if rec.seg_id as usize != doc.segments.len() + 1 {
                return Err(bad(format!(
                    "segment ids in {} are not contiguous at {}",
                    rec.doc_id, rec.seg_id
                )));
            }
            doc.segments.push(Segment {
                doc_id: rec.doc_id,
                seg_id: rec.seg_id,
                source: rec.source,
                references: rec.references,
            });
        }
        let systems = system_ids
            .into_iter()
            .zip(hypotheses)
            .map(|(system_id, hypotheses)| SystemOutput {
                system_id,
                hypotheses,
            })
            .collect();
        Ok(Corpus { documents, systems })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SegmentRecord {
    doc_id: String,
    seg_id: u32,
    source: String,
    references: Vec<String>,
    hypotheses: IndexMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn entry(doc: &str, start: usize, end: usize) -> ManifestEntry {
        ManifestEntry {
            doc_id: doc.into(),
            start_line: start,
            end_line: end,
        }
    }

    #[test]
    fn minimal_corpus() {
        let c = Corpus::from_lines(
            lines(&["hello"]),
            vec![lines(&["नमस्ते"])],
            &[entry("doc1", 1, 1)],
        )
        .unwrap();
        assert_eq!(c.documents.len(), 1);
        assert_eq!(c.segment_count(), 1);
        assert_eq!(c.documents[0].segments[0].references, vec!["नमस्ते"]);
    }

    #[test]
    fn manifest_errors() {
        let src = lines(&["a", "b", "c"]);
        let refs = vec![lines(&["x", "y", "z"])];
        let gap = Corpus::from_lines(src.clone(), refs.clone(), &[entry("d", 1, 2)]);
        assert!(matches!(gap, Err(CorpusError::ManifestGap { line: 3 })));
        let gap = Corpus::from_lines(
            src.clone(),
            refs.clone(),
            &[entry("d", 1, 1), entry("e", 3, 3)],
        );
        assert!(matches!(gap, Err(CorpusError::ManifestGap { line: 2 })));
        let overlap = Corpus::from_lines(
            src.clone(),
            refs.clone(),
            &[entry("d", 1, 2), entry("e", 2, 3)],
        );
        assert!(matches!(overlap, Err(CorpusError::ManifestOverlap { .. })));
        let dup = Corpus::from_lines(src, refs, &[entry("d", 1, 1), entry("d", 2, 3)]);
        assert!(matches!(dup, Err(CorpusError::DuplicateDocument(_))));
    }

    #[test]
    fn blank_source_and_missing_references() {
        let r = Corpus::from_lines(
            lines(&["a", "  "]),
            vec![lines(&["x", "y"])],
            &[entry("d", 1, 2)],
        );
        assert!(matches!(r, Err(CorpusError::EmptySource { line: 2 })));

        let r = Corpus::from_lines(
            lines(&["a", "b"]),
            vec![lines(&["x", ""]), lines(&["x", " "])],
            &[entry("d", 1, 2)],
        );
        assert!(matches!(r, Err(CorpusError::MissingReference { line: 2 })));

        // one blank reference among several is fine
        let c = Corpus::from_lines(
            lines(&["a", "b"]),
            vec![lines(&["x", ""]), lines(&["x", "y"])],
            &[entry("d", 1, 2)],
        )
        .unwrap();
        let seg = &c.documents[0].segments[1];
        assert_eq!(seg.available_references(1).count(), 0);
        assert_eq!(seg.available_references(2).collect::<Vec<_>>(), vec!["y"]);
    }

    #[test]
    fn internal_whitespace_is_kept() {
        let c = Corpus::from_lines(
            lines(&["  a   b "]),
            vec![lines(&["x  y"])],
            &[entry("d", 1, 1)],
        )
        .unwrap();
        assert_eq!(c.documents[0].segments[0].source, "  a   b ");
    }

    #[test]
    fn manifest_parsing() {
        let m = parse_manifest("doc1\t1\t100\n\ndoc2\t101\t200\n").unwrap();
        assert_eq!(m, vec![entry("doc1", 1, 100), entry("doc2", 101, 200)]);
        assert!(matches!(
            parse_manifest("doc1 1 100"),
            Err(CorpusError::ManifestParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_manifest("doc1\t5\t3"),
            Err(CorpusError::ManifestParse { .. })
        ));
    }

    #[test]
    fn attach_is_idempotent_for_identical_content() {
        let mut c = Corpus::from_lines(
            lines(&["a", "b"]),
            vec![lines(&["x", "y"])],
            &[entry("d", 1, 2)],
        )
        .unwrap();
        c.attach_hypotheses("google", lines(&["h1", "h2"])).unwrap();
        c.attach_hypotheses("google", lines(&["h1", "h2"])).unwrap();
        assert_eq!(c.systems.len(), 1);
        assert!(matches!(
            c.attach_hypotheses("google", lines(&["h1", "other"])),
            Err(CorpusError::DuplicateSystemId(_))
        ));
        assert!(matches!(
            c.attach_hypotheses("bing", lines(&["h1"])),
            Err(CorpusError::LineCountMismatch { found: 1, .. })
        ));
        assert_eq!(c.hypothesis("google", &SegmentKey::new("d", 2)), Some("h2"));
        assert_eq!(c.hypothesis("google", &SegmentKey::new("d", 3)), None);
    }
}
