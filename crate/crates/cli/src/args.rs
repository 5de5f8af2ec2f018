use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mteval::bleu::{BrevityMode, Smoothing};
use mteval::{CorrelationMethod, Level, MetricConfig};

use crate::service::JudgeSpec;

// mteval::bleu::CORRELATION_EPSILON as a flag default
const CORRELATION_EPSILON_STR: &str = "1e-9";

const DEFAULT_CONFIGS: &str = "bleu-1,bleu-2,bleu-3,bleu-4,meteor-es,meteor-ey,meteor-esy,meteor-esyp";

#[derive(Debug, Parser)]
#[command(name = "mteval", version, about = "Score MT output, collect ratings and correlate the two")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score attached systems and write segment, document and system records.
    Score(ScoreArgs),
    /// Correlate metric scores with human ratings and write the report grid.
    Correlate(CorrelateArgs),
    /// Print the pipeline tokens of each argument (or stdin line).
    Tokenize(TokenizeArgs),
    /// Print the stem of each token of each argument (or stdin line).
    Stem(StemArgs),
    /// Run the rating service.
    Serve(ServeArgs),
    /// Convert a saved correlation report to another format.
    ExportReport(ExportArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Document manifest (`doc_id<TAB>start<TAB>end`). Unless --source is
    /// given, `source.txt` and `ref1.txt`..`ref4.txt` are read from the same
    /// directory.
    #[arg(long, value_name = "MANIFEST")]
    pub corpus: PathBuf,
    /// Source file, one segment per line (pair with --ref).
    #[arg(long, value_name = "PATH", requires = "references")]
    pub source: Option<PathBuf>,
    /// Reference file, in reference order (repeatable, with --source).
    #[arg(long = "ref", value_name = "PATH", requires = "source")]
    pub references: Vec<PathBuf>,
    /// System output as `id=path` (repeatable).
    #[arg(long = "system", value_name = "ID=PATH", value_parser = parse_system, required = true)]
    pub systems: Vec<(String, PathBuf)>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BrevityArg {
    /// min(1, c/r)
    Linear,
    /// exp(1 - r/c) when c < r
    Exponential,
}

impl From<BrevityArg> for BrevityMode {
    fn from(b: BrevityArg) -> Self {
        match b {
            BrevityArg::Linear => BrevityMode::PaperLinear,
            BrevityArg::Exponential => BrevityMode::ClassicExponential,
        }
    }
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Suffix inventory, one suffix per line (default: bundled Hindi list).
    #[arg(long, value_name = "PATH")]
    pub suffixes: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_stem_len: usize,
    /// Synonym lexicon, `synset_id<TAB>token<TAB>token...` per line.
    #[arg(long, value_name = "PATH")]
    pub synonyms: Option<PathBuf>,
    /// Paraphrase table, `phrase<TAB>phrase` per line.
    #[arg(long, value_name = "PATH")]
    pub paraphrases: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub brevity: BrevityArg,
    /// Keep Latin letter case.
    #[arg(long)]
    pub no_case_fold: bool,
}

#[derive(Debug, Clone)]
pub struct ConfigList(pub Vec<MetricConfig>);

#[derive(Debug, Clone)]
pub struct RefCounts(pub Vec<usize>);

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[arg(long, default_value = DEFAULT_CONFIGS, value_parser = parse_configs)]
    pub configs: ConfigList,
    /// Number of references to score against, taken by position.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub refs: u8,
    /// `none` or an add-epsilon value for BLEU precisions.
    #[arg(long, default_value = "none", value_parser = parse_smoothing)]
    pub smoothing: Smoothing,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// Rating log (one JSON record per line).
    #[arg(long, value_name = "PATH")]
    pub ratings: PathBuf,
    #[arg(long, default_value = DEFAULT_CONFIGS, value_parser = parse_configs)]
    pub configs: ConfigList,
    /// Comma-separated reference counts, one report column each per system.
    #[arg(long, default_value = "1,4", value_parser = parse_ref_counts)]
    pub refs: RefCounts,
    #[arg(long, default_value = "pearson", value_parser = parse_method)]
    pub method: CorrelationMethod,
    #[arg(long, default_value = "segment", value_parser = parse_level)]
    pub level: Level,
    #[arg(long, default_value = CORRELATION_EPSILON_STR, value_parser = parse_smoothing)]
    pub smoothing: Smoothing,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    pub text: Vec<String>,
    #[arg(long)]
    pub no_case_fold: bool,
}

#[derive(Debug, Args)]
pub struct StemArgs {
    pub words: Vec<String>,
    #[arg(long, value_name = "PATH")]
    pub suffixes: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_stem_len: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Rating log; created if missing, replayed on start.
    #[arg(long, value_name = "PATH")]
    pub ratings: PathBuf,
    /// Judge as `judge_id` or `judge_id=session_token` (repeatable).
    #[arg(long = "judge", value_name = "JUDGE", required = true)]
    pub judges: Vec<JudgeSpec>,
    /// Rubric file (default: bundled ten-criterion rubric).
    #[arg(long, value_name = "PATH")]
    pub rubric: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Text,
    Json,
    Tsv,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Report written by `correlate` (correlation.tsv).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ExportFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_system(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((id, path)) if !id.is_empty() && !path.is_empty() => {
            Ok((id.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected ID=PATH, got {s:?}")),
    }
}

fn parse_configs(s: &str) -> Result<ConfigList, String> {
    let configs = MetricConfig::parse_list(s).map_err(|e| e.to_string())?;
    if configs.is_empty() {
        return Err("no metric configs given".into());
    }
    Ok(ConfigList(configs))
}

fn parse_ref_counts(s: &str) -> Result<RefCounts, String> {
    let counts = s
        .split(',')
        .map(|p| match p.trim().parse::<usize>() {
            Ok(n @ 1..=4) => Ok(n),
            _ => Err(format!("reference count {p:?} not in 1..=4")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RefCounts(counts))
}

fn parse_smoothing(s: &str) -> Result<Smoothing, String> {
    if s == "none" {
        return Ok(Smoothing::None);
    }
    match s.parse::<f64>() {
        Ok(eps) if eps > 0.0 && eps <= 1.0 => Ok(Smoothing::AddEpsilon(eps)),
        _ => Err(format!("expected `none` or an epsilon in (0, 1], got {s:?}")),
    }
}

fn parse_method(s: &str) -> Result<CorrelationMethod, String> {
    s.parse()
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse()
}
