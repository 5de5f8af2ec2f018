//! English to Hindi machine translation evaluation.
//!
//! * [`corpus`]: documents of aligned segments with 1 to 4 references and
//!   any number of system outputs.
//! * [`text`], [`stemmer`], [`lexicon`]: normalization, tokenization, light
//!   Hindi stemming, synonym sets and paraphrase tables.
//! * [`bleu`]: clipped n-gram precision, BLEU with a linear or exponential
//!   brevity factor, and the arithmetic-mean NIST-style variant.
//! * [`meteor`]: staged exact/stem/synonym/paraphrase alignment and scoring.
//! * [`human`]: the ten-criterion 0..=4 rating rubric and rating log.
//! * [`correlation`], [`report`]: Pearson/Spearman and report grids of
//!   metric configs against (system, reference count).
//!
//! ```
//! use mteval::scoring::{MetricConfig, Scorer};
//!
//! let scorer = Scorer::default();
//! let bleu1: MetricConfig = "bleu-1".parse().unwrap();
//! let s = scorer.score_text(bleu1, "वह घर गया", &["वह घर गया था"]).unwrap();
//! assert!((s - 0.75).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod bleu;
pub mod corpus;
pub mod correlation;
pub mod human;
pub mod lexicon;
pub mod meteor;
pub mod report;
pub mod scoring;
pub mod stemmer;
pub mod text;

pub use corpus::{Corpus, SegmentKey};
pub use correlation::{Correlation, CorrelationMethod};
pub use human::{RatingLog, RatingRecord, Rubric};
pub use report::{build_report, CorrelationReport, ReportRequest};
pub use scoring::{Level, MetricConfig, Scorer};
pub use text::{TextPipeline, TokenSequence};

impl AsRef<[String]> for TokenSequence {
    fn as_ref(&self) -> &[String] {
        self.tokens()
    }
}
