use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use mteval::bleu::Smoothing;
use mteval::lexicon::{ParaphraseTable, SynonymLexicon};
use mteval::meteor::{MatchResources, MeteorParams};
use mteval::report::build_report;
use mteval::scoring::{write_document_records, write_segment_records, write_system_records};
use mteval::stemmer::SuffixInventory;
use mteval::{Corpus, CorrelationReport, RatingLog, ReportRequest, Rubric, Scorer, TextPipeline};

use crate::args::{
    CorpusArgs, CorrelateArgs, ExportArgs, ExportFormat, ResourceArgs, ScoreArgs, ServeArgs,
    StemArgs, TokenizeArgs,
};
use crate::error::CliError;
use crate::service::{self, AnnotationService};

pub const SEGMENT_SCORES: &str = "scores.tsv";
pub const DOCUMENT_SCORES: &str = "scores.doc.tsv";
pub const SYSTEM_SCORES: &str = "scores.system.tsv";
pub const REPORT_TSV: &str = "correlation.tsv";
pub const REPORT_TEXT: &str = "correlation.txt";

pub fn load_corpus(args: &CorpusArgs) -> Result<Corpus, CliError> {
    let mut corpus = match &args.source {
        Some(source) => Corpus::load(source, &args.references, &args.corpus)?,
        None => Corpus::load_from_manifest(&args.corpus)?,
    };
    for (id, path) in &args.systems {
        corpus.attach_system(id, path)?;
    }
    Ok(corpus)
}

fn load_stemmer(path: Option<&Path>, min_stem_len: usize) -> Result<SuffixInventory, CliError> {
    let inventory = match path {
        Some(p) => SuffixInventory::load(p).map_err(CliError::io(p))?,
        None => SuffixInventory::default(),
    };
    Ok(inventory.with_min_stem_len(min_stem_len))
}

pub fn build_scorer(args: &ResourceArgs, smoothing: Smoothing) -> Result<Scorer, CliError> {
    let pipeline = TextPipeline {
        fold_case: !args.no_case_fold,
    };
    let synonyms = match &args.synonyms {
        Some(p) => SynonymLexicon::load(p, &pipeline)?,
        None => SynonymLexicon::default(),
    };
    let paraphrases = match &args.paraphrases {
        Some(p) => ParaphraseTable::load(p, &pipeline)?,
        None => ParaphraseTable::default(),
    };
    Ok(Scorer {
        pipeline,
        resources: MatchResources {
            stemmer: load_stemmer(args.suffixes.as_deref(), args.min_stem_len)?,
            synonyms,
            paraphrases,
        },
        meteor: MeteorParams::new(args.alpha, args.beta, args.gamma)?,
        brevity: args.brevity.into(),
        smoothing,
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(CliError::io(&path))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

pub fn score(args: &ScoreArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let scorer = build_scorer(&args.resources, args.smoothing)?;
    let refs = usize::from(args.refs);
    if refs > corpus.reference_count() {
        return Err(CliError::Validation(format!(
            "--refs {refs} but the corpus has {} reference files",
            corpus.reference_count()
        )));
    }
    let scores = corpus
        .systems
        .iter()
        .map(|s| scorer.score_system(&corpus, &s.system_id, &args.configs.0, refs))
        .collect::<Result<Vec<_>, _>>()?;

    create_dir(&args.out)?;
    let mut seg = Vec::new();
    let mut doc = Vec::new();
    let mut sys = Vec::new();
    write_segment_records(&mut seg, &scores).expect("in-memory write");
    write_document_records(&mut doc, &scores).expect("in-memory write");
    write_system_records(&mut sys, &scores).expect("in-memory write");
    write_file(&args.out, SEGMENT_SCORES, &seg)?;
    write_file(&args.out, DOCUMENT_SCORES, &doc)?;
    write_file(&args.out, SYSTEM_SCORES, &sys)?;
    stdout.write_all(&sys).map_err(stdout_err)?;
    Ok(())
}

pub fn correlate(args: &CorrelateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let scorer = build_scorer(&args.resources, args.smoothing)?;
    let log = RatingLog::read(&args.ratings)?;
    let request = ReportRequest {
        configs: args.configs.0.clone(),
        ref_counts: args.refs.0.clone(),
        method: args.method,
        level: args.level,
    };
    let report = build_report(&corpus, &log, &scorer, &request)?;
    let text = report.to_text();
    create_dir(&args.out)?;
    write_file(&args.out, REPORT_TSV, report.to_tsv().as_bytes())?;
    write_file(&args.out, REPORT_TEXT, text.as_bytes())?;
    stdout.write_all(text.as_bytes()).map_err(stdout_err)?;
    Ok(())
}

/// Arguments if any, otherwise stdin lines.
fn inputs(args: &[String]) -> Result<Vec<String>, CliError> {
    if !args.is_empty() {
        return Ok(args.to_vec());
    }
    io::stdin()
        .lock()
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|source| CliError::Io {
            context: "stdin".into(),
            source,
        })
}

pub fn tokenize(args: &TokenizeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pipeline = TextPipeline {
        fold_case: !args.no_case_fold,
    };
    for line in inputs(&args.text)? {
        writeln!(stdout, "{}", pipeline.prepare(&line)).map_err(stdout_err)?;
    }
    Ok(())
}

pub fn stem(args: &StemArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let stemmer = load_stemmer(args.suffixes.as_deref(), args.min_stem_len)?;
    let pipeline = TextPipeline::default();
    for line in inputs(&args.words)? {
        let tokens = pipeline.prepare(&line);
        let stems: Vec<&str> = tokens.iter().map(|t| stemmer.stem(t)).collect();
        writeln!(stdout, "{}", stems.join(" ")).map_err(stdout_err)?;
    }
    Ok(())
}

pub fn export_report(args: &ExportArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.input).map_err(CliError::io(&args.input))?;
    let report = CorrelationReport::from_tsv(&text)?;
    let rendered = match args.format {
        ExportFormat::Text => report.to_text(),
        ExportFormat::Tsv => report.to_tsv(),
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match &args.out {
        Some(path) => fs::write(path, rendered).map_err(CliError::io(path)),
        None => stdout.write_all(rendered.as_bytes()).map_err(stdout_err),
    }
}

pub fn serve(args: &ServeArgs, stderr: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let rubric = match &args.rubric {
        Some(p) => Rubric::parse(&fs::read_to_string(p).map_err(CliError::io(p))?)?,
        None => Rubric::default(),
    };
    let log = RatingLog::open(&args.ratings)?;
    let svc = AnnotationService::new(corpus, rubric, log, &args.judges)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let app = service::router(Arc::new(svc));
    let addr = format!("{}:{}", args.host, args.port);
    let io_err = |source| CliError::Io {
        context: addr.clone(),
        source,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(io_err)?;
        let _ = writeln!(stderr, "listening on http://{addr}");
        axum::serve(listener, app).await.map_err(io_err)
    })
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        context: "stdout".into(),
        source,
    }
}
