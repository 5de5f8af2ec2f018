//! Browser bindings for the metrics in `mteval`.
//!
//! Every export takes plain strings and numbers and returns a JSON string.
//! The `*_json` functions hold the logic and run natively, so they are
//! tested without a wasm runtime; the `#[wasm_bindgen]` wrappers only turn
//! errors into JS exceptions.

use mteval::bleu::{
    bleu_from_stats, brevity_factor, nist_from_stats, BleuConfig, BrevityMode, MetricError,
    NgramStats, Smoothing,
};
use mteval::lexicon::{LexiconError, ParaphraseTable, SynonymLexicon};
use mteval::meteor::{meteor_breakdown, MatchResources, MeteorBreakdown, MeteorError, MeteorParams, StageSet};
use mteval::stemmer::SuffixInventory;
use mteval::TextPipeline;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Meteor(#[from] MeteorError),
    #[error("lexicon {0}")]
    Lexicon(#[from] LexiconError),
    #[error("unknown brevity mode {0:?} (expected `linear` or `exponential`)")]
    Brevity(String),
    #[error("at least one non-empty reference is required")]
    NoReference,
}

fn to_js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_brevity(s: &str) -> Result<BrevityMode, DemoError> {
    match s {
        "linear" => Ok(BrevityMode::PaperLinear),
        "exponential" => Ok(BrevityMode::ClassicExponential),
        other => Err(DemoError::Brevity(other.to_string())),
    }
}

/// Non-blank lines of `refs`, each tokenized.
fn references(pipeline: &TextPipeline, refs: &str) -> Result<Vec<Vec<String>>, DemoError> {
    let out: Vec<Vec<String>> = refs
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| pipeline.prepare(l).into_inner())
        .collect();
    if out.is_empty() {
        return Err(DemoError::NoReference);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct OrderRow {
    pub n: usize,
    pub matched: u64,
    pub total: u64,
    pub precision: f64,
}

#[derive(Debug, Serialize)]
pub struct BleuBreakdown {
    pub hypothesis: Vec<String>,
    pub hyp_len: u64,
    pub ref_len: u64,
    pub brevity_factor: f64,
    pub orders: Vec<OrderRow>,
    pub bleu: f64,
    pub nist: f64,
}

pub fn bleu_breakdown_json(hyp: &str, refs: &str, max_n: usize, brevity: &str) -> Result<String, DemoError> {
    let pipeline = TextPipeline::default();
    let mode = parse_brevity(brevity)?;
    let config = BleuConfig::uniform(max_n)?.with_brevity(mode);
    let hypothesis = pipeline.prepare(hyp).into_inner();
    let refs = references(&pipeline, refs)?;
    let stats = NgramStats::collect(&hypothesis, &refs, max_n)?;
    let orders = (1..=max_n)
        .map(|n| OrderRow {
            n,
            matched: stats.matched[n - 1],
            total: stats.total[n - 1],
            precision: stats.precision(n, Smoothing::None),
        })
        .collect();
    let out = BleuBreakdown {
        brevity_factor: brevity_factor(stats.hyp_len, stats.ref_len, mode).unwrap_or(0.0),
        bleu: bleu_from_stats(&stats, &config),
        nist: nist_from_stats(&stats, max_n, mode),
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
        hypothesis,
        orders,
    };
    Ok(serde_json::to_string(&out).expect("breakdown serializes"))
}

/// Synonyms: one group per line, words separated by spaces.
/// Paraphrases: `phrase = phrase` per line.
fn resources(pipeline: &TextPipeline, suffixes: &str, synonyms: &str, paraphrases: &str) -> Result<MatchResources, DemoError> {
    let stemmer = if suffixes.trim().is_empty() {
        SuffixInventory::default()
    } else {
        SuffixInventory::new(suffixes.split_whitespace())
    };
    let synset_file: String = synonyms
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| format!("g{i}\t{}\n", l.split_whitespace().collect::<Vec<_>>().join("\t")))
        .collect();
    let phrase_file: String = paraphrases
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| format!("{}\n", l.replacen('=', "\t", 1)))
        .collect();
    Ok(MatchResources {
        stemmer,
        synonyms: SynonymLexicon::parse(&synset_file, pipeline)?,
        paraphrases: ParaphraseTable::parse(&phrase_file, pipeline)?,
    })
}

#[derive(Debug, Serialize)]
pub struct MeteorView {
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
    #[serde(flatten)]
    pub breakdown: MeteorBreakdown,
}

#[allow(clippy::too_many_arguments)]
pub fn meteor_alignment_json(
    hyp: &str,
    reference: &str,
    stages: &str,
    alpha: f64,
    beta: f64,
    gamma: f64,
    suffixes: &str,
    synonyms: &str,
    paraphrases: &str,
) -> Result<String, DemoError> {
    let pipeline = TextPipeline::default();
    let stages: StageSet = stages.parse()?;
    let params = MeteorParams::new(alpha, beta, gamma)?;
    let res = resources(&pipeline, suffixes, synonyms, paraphrases)?;
    let hypothesis = pipeline.prepare(hyp).into_inner();
    let reference = pipeline.prepare(reference).into_inner();
    let breakdown = meteor_breakdown(&hypothesis, &reference, stages, &params, &res)?;
    let view = MeteorView {
        hypothesis,
        reference,
        breakdown,
    };
    Ok(serde_json::to_string(&view).expect("alignment serializes"))
}

#[derive(Debug, Serialize)]
pub struct TokenView {
    pub token: String,
    pub stem: String,
}

pub fn tokenize_json(text: &str, suffixes: &str) -> String {
    let pipeline = TextPipeline::default();
    let stemmer = if suffixes.trim().is_empty() {
        SuffixInventory::default()
    } else {
        SuffixInventory::new(suffixes.split_whitespace())
    };
    let tokens: Vec<TokenView> = pipeline
        .prepare(text)
        .iter()
        .map(|t| TokenView {
            stem: stemmer.stem(t).to_string(),
            token: t.clone(),
        })
        .collect();
    serde_json::to_string(&tokens).expect("tokens serialize")
}

/// Suffix list used when the stemmer field is left empty.
#[wasm_bindgen(js_name = defaultSuffixes)]
pub fn default_suffixes() -> String {
    SuffixInventory::default().suffixes().join(" ")
}

#[wasm_bindgen(js_name = bleuBreakdown)]
pub fn bleu_breakdown(hyp: &str, refs: &str, max_n: usize, brevity: &str) -> Result<String, JsError> {
    bleu_breakdown_json(hyp, refs, max_n, brevity).map_err(to_js)
}

#[wasm_bindgen(js_name = meteorAlignment)]
#[allow(clippy::too_many_arguments)]
pub fn meteor_alignment(
    hyp: &str,
    reference: &str,
    stages: &str,
    alpha: f64,
    beta: f64,
    gamma: f64,
    suffixes: &str,
    synonyms: &str,
    paraphrases: &str,
) -> Result<String, JsError> {
    meteor_alignment_json(hyp, reference, stages, alpha, beta, gamma, suffixes, synonyms, paraphrases)
        .map_err(to_js)
}

#[wasm_bindgen]
pub fn tokenize(text: &str, suffixes: &str) -> String {
    tokenize_json(text, suffixes)
}
