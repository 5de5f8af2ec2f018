#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mteval::RatingRecord;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const SYSTEMS: [&str; 3] = ["google", "bing", "ebmt"];
pub const DOCS: usize = 2;
pub const SEGS_PER_DOC: usize = 10;

const VOCAB: [&str; 32] = [
    "राम", "सीता", "घर", "मकान", "गया", "आया", "था", "है", "में", "से", "को", "का", "की", "के",
    "बड़ा", "सुंदर", "मंदिर", "शहर", "पर्यटक", "यात्रा", "देखा", "किया", "नदी", "किनारे", "पुराना",
    "किला", "लोग", "बहुत", "यहाँ", "वहाँ", "और", "।",
];

pub struct Fixture {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub systems: Vec<(String, PathBuf)>,
    pub ratings: PathBuf,
}

impl Fixture {
    /// `--corpus ... --system ... --system ...`
    pub fn corpus_args(&self) -> Vec<String> {
        let mut args = vec!["--corpus".to_string(), self.manifest.display().to_string()];
        for (id, path) in &self.systems {
            args.push("--system".into());
            args.push(format!("{id}={}", path.display()));
        }
        args
    }
}

fn write_lines(path: &Path, lines: &[String]) {
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text).unwrap();
}

fn write_common(dir: &Path, source: &[String], refs: &[Vec<String>]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let manifest = dir.join("manifest.tsv");
    let mut m = String::new();
    for d in 0..DOCS {
        let start = d * SEGS_PER_DOC + 1;
        m.push_str(&format!("doc{}\t{}\t{}\n", d + 1, start, start + SEGS_PER_DOC - 1));
    }
    fs::write(&manifest, m).unwrap();
    write_lines(&dir.join("source.txt"), source);
    for (k, r) in refs.iter().enumerate() {
        write_lines(&dir.join(format!("ref{}.txt", k + 1)), r);
    }
    manifest
}

fn key_of(line: usize) -> (String, u32) {
    (format!("doc{}", line / SEGS_PER_DOC + 1), (line % SEGS_PER_DOC + 1) as u32)
}

fn rating_line(judge: &str, system: &str, line: usize, ratings: Vec<i64>) -> String {
    let (doc_id, seg_id) = key_of(line);
    let record = RatingRecord {
        judge_id: judge.into(),
        system_id: system.into(),
        doc_id,
        seg_id,
        ratings,
        timestamp: 1_700_000_000_000 + line as u64,
    };
    serde_json::to_string(&record).unwrap()
}

/// Noisy corpus: references are variants of one sentence per segment,
/// systems corrupt it at different rates, two judges rate each output with
/// scores that fall as corruption grows.
pub fn noisy(dir: &Path) -> Fixture {
    let mut rng = StdRng::seed_from_u64(20_13);
    let n = DOCS * SEGS_PER_DOC;
    let pick = |rng: &mut StdRng| VOCAB[rng.gen_range(0..VOCAB.len())].to_string();
    let bases: Vec<Vec<String>> = (0..n)
        .map(|_| (0..rng.gen_range(6..10)).map(|_| pick(&mut rng)).collect())
        .collect();
    let source: Vec<String> = (0..n).map(|i| format!("source sentence {}", i + 1)).collect();
    let refs: Vec<Vec<String>> = (0..4)
        .map(|k| {
            bases
                .iter()
                .map(|b| {
                    let mut v = b.clone();
                    if k > 0 {
                        let j = rng.gen_range(0..v.len());
                        v[j] = pick(&mut rng);
                    }
                    v.join(" ")
                })
                .collect()
        })
        .collect();
    let manifest = write_common(dir, &source, &refs);

    let mut systems = Vec::new();
    let mut log = Vec::new();
    for (s, name) in SYSTEMS.iter().enumerate() {
        let rate = 0.15 + 0.15 * s as f64;
        let mut hyps = Vec::new();
        for (line, base) in bases.iter().enumerate() {
            let mut errors = 0i64;
            let hyp: Vec<String> = base
                .iter()
                .filter_map(|w| {
                    if rng.gen_bool(rate) {
                        errors += 1;
                        if rng.gen_bool(0.3) {
                            return None;
                        }
                        return Some(pick(&mut rng));
                    }
                    Some(w.clone())
                })
                .collect();
            let hyp = if hyp.is_empty() { vec![pick(&mut rng)] } else { hyp };
            hyps.push(hyp.join(" "));
            for judge in ["j1", "j2"] {
                let ratings = (0..10)
                    .map(|_| (4 - errors + rng.gen_range(-1..=1)).clamp(0, 4))
                    .collect();
                log.push(rating_line(judge, name, line, ratings));
            }
        }
        let path = dir.join(format!("{name}.txt"));
        write_lines(&path, &hyps);
        systems.push((name.to_string(), path));
    }
    let ratings = dir.join("ratings.jsonl");
    write_lines(&ratings, &log);
    Fixture {
        dir: dir.to_path_buf(),
        manifest,
        systems,
        ratings,
    }
}

/// Every hypothesis either equals all four (identical) references or shares
/// no token with them, at the same length; equal outputs are rated all 4s,
/// disjoint ones all 0s. Each metric is then an affine function of the
/// human score.
pub fn affine(dir: &Path) -> Fixture {
    let n = DOCS * SEGS_PER_DOC;
    let sentence = |line: usize, tag: &str| -> String {
        (0..5).map(|k| format!("{}{tag}{line}", VOCAB[k])).collect::<Vec<_>>().join(" ")
    };
    let source: Vec<String> = (0..n).map(|i| format!("source {i}")).collect();
    let refs: Vec<Vec<String>> = (0..4).map(|_| (0..n).map(|i| sentence(i, "क")).collect()).collect();
    let manifest = write_common(dir, &source, &refs);
    let mut systems = Vec::new();
    let mut log = Vec::new();
    for (s, name) in SYSTEMS.iter().enumerate() {
        let mut hyps = Vec::new();
        for line in 0..n {
            let good = (line + s) % 3 != 0;
            hyps.push(if good { sentence(line, "क") } else { sentence(line, "ख") });
            let v = if good { 4 } else { 0 };
            log.push(rating_line("j1", name, line, vec![v; 10]));
        }
        let path = dir.join(format!("{name}.txt"));
        write_lines(&path, &hyps);
        systems.push((name.to_string(), path));
    }
    let ratings = dir.join("ratings.jsonl");
    write_lines(&ratings, &log);
    Fixture {
        dir: dir.to_path_buf(),
        manifest,
        systems,
        ratings,
    }
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn mteval<S: AsRef<str>>(args: &[S]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_mteval"))
        .args(args.iter().map(AsRef::as_ref))
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}
