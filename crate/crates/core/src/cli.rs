//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on I/O
//! errors. Every successful run writes `run_manifest.json` next to its
//! outputs.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics;
use crate::corpus::{self, DictionaryFilter, FilterSide};
use crate::corrupter::{CorruptionConfig, CorruptionRecord, Corrupter};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::matcher::{self, MatchOptions, MatchedSentence};
use crate::metrics::{self, EvalInstance};
use crate::objective::{self, LogProbRecord, LossConfig};
use crate::seed;
use crate::splitter::{self, DupMode, Part, SplitConfig};

pub const THREADS_ENV: &str = "TERMSPAN_THREADS";
pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "termspan",
    version,
    about = "Terminology matching, terminology-aware splits, span corruption and term-level evaluation"
)]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    /// Global seed from which every random stream is derived.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Match a term dictionary against a parallel corpus and write matched JSONL.
    Match(MatchArgs),
    /// Split a matched corpus into train/valid/test with balanced term lengths.
    Split(SplitArgs),
    /// Write span-corrupted targets for every sentence of a matched corpus.
    Corrupt(CorruptArgs),
    /// Corpus statistics, top terms and the term n-gram histogram.
    Stats(StatsArgs),
    /// Score hypotheses with term usage rate and LSM-2.
    Eval(EvalArgs),
    /// Joint loss from per-position log-probabilities.
    Loss(LossArgs),
    /// Keep only test sentences unseen in train, valid and earlier test lines.
    UniqueTest(UniqueArgs),
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    min_chars: Option<usize>,
    #[arg(long)]
    max_ngram: Option<usize>,
    #[arg(long, value_enum)]
    filter_side: Option<FilterSide>,
    #[arg(long)]
    max_tokens: Option<usize>,
    #[arg(long)]
    casefold: bool,
    #[arg(long)]
    multi_pass: bool,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    matched: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    heldout_size: Option<usize>,
    #[arg(long, value_enum)]
    dup_mode: Option<DupMode>,
}

#[derive(Debug, Args)]
struct CorruptArgs {
    #[arg(long)]
    matched: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Random-replacement vocabulary, one token per line. Defaults to the
    /// target-side tokens of the input.
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    geometric_p: Option<f64>,
    #[arg(long)]
    min_span: Option<usize>,
    #[arg(long)]
    max_span: Option<usize>,
    #[arg(long)]
    mask_token: Option<String>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    matched: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Term-annotated references (matched JSONL).
    #[arg(long)]
    matched: PathBuf,
    /// Hypotheses, one per line, aligned with the references.
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Also write per_sentence.tsv.
    #[arg(long)]
    per_sentence: bool,
}

#[derive(Debug, Args)]
struct LossArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
    /// Include token-normalized losses.
    #[arg(long)]
    per_token: bool,
}

#[derive(Debug, Args)]
struct UniqueArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusOptions {
    pub max_tokens: usize,
    pub dictionary: DictionaryFilter,
    pub matching: MatchOptions,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            max_tokens: 80,
            dictionary: DictionaryFilter::default(),
            matching: MatchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    pub per_sentence: bool,
    pub top_k: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            per_sentence: false,
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossOptions {
    pub gamma: f64,
    pub per_token: bool,
}

impl Default for LossOptions {
    fn default() -> Self {
        LossOptions {
            gamma: LossConfig::default().gamma,
            per_token: false,
        }
    }
}

/// Everything a run can be configured with. Unset fields take the defaults
/// of the individual modules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub corpus: CorpusOptions,
    pub split: SplitSection,
    pub corrupt: CorruptSection,
    pub loss: LossOptions,
    pub metrics: MetricOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            corpus: CorpusOptions::default(),
            split: SplitSection::default(),
            corrupt: CorruptSection::default(),
            loss: LossOptions::default(),
            metrics: MetricOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub heldout_size: usize,
    pub dup_mode: DupMode,
}

impl Default for SplitSection {
    fn default() -> Self {
        let d = SplitConfig::default();
        SplitSection {
            heldout_size: d.heldout_size,
            dup_mode: d.dup_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptSection {
    pub geometric_p: f64,
    pub min_span: usize,
    pub max_span: usize,
    pub ratio: f64,
    pub mask_token: String,
    pub replace_probs: crate::corrupter::ReplaceProbs,
    pub reserved: Vec<String>,
}

impl Default for CorruptSection {
    fn default() -> Self {
        let d = CorruptionConfig::default();
        CorruptSection {
            geometric_p: d.geometric_p,
            min_span: d.min_span,
            max_span: d.max_span,
            ratio: d.ratio,
            mask_token: d.mask_token,
            replace_probs: d.replace_probs,
            reserved: d.reserved,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            heldout_size: self.split.heldout_size,
            seed: self.seed,
            dup_mode: self.split.dup_mode,
        }
    }

    pub fn corruption_config(&self, vocabulary: Vec<String>) -> CorruptionConfig {
        CorruptionConfig {
            geometric_p: self.corrupt.geometric_p,
            max_span: self.corrupt.max_span,
            min_span: self.corrupt.min_span,
            ratio: self.corrupt.ratio,
            mask_token: self.corrupt.mask_token.clone(),
            replace_probs: self.corrupt.replace_probs,
            vocabulary,
            reserved: self.corrupt.reserved.clone(),
            seed: self.seed,
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            gamma: self.loss.gamma,
        }
    }
}

#[derive(Debug, Serialize)]
struct InputDigest {
    role: &'static str,
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a PipelineConfig,
    inputs: Vec<InputDigest>,
    /// Relative to the manifest's directory.
    outputs: Vec<String>,
}

fn digest(role: &'static str, path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputDigest {
        role,
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn write_manifest(
    dir: &Path,
    command: &'static str,
    cfg: &PipelineConfig,
    inputs: &[(&'static str, &Path)],
    outputs: &[&Path],
) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        config: cfg,
        inputs: inputs
            .iter()
            .map(|(role, p)| digest(role, p))
            .collect::<Result<_>>()?,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    jsonl::write_json(&dir.join(MANIFEST_NAME), &manifest)
}

fn parent_dir(path: &Path) -> Result<PathBuf> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Match(a) => run_match(a, cfg),
        Command::Split(a) => run_split(a, cfg),
        Command::Corrupt(a) => run_corrupt(a, cfg),
        Command::Stats(a) => run_stats(a, cfg),
        Command::Eval(a) => run_eval(a, cfg),
        Command::Loss(a) => run_loss(a, cfg),
        Command::UniqueTest(a) => run_unique(a, cfg),
    })
}

fn run_match(a: MatchArgs, mut cfg: PipelineConfig) -> Result<()> {
    let c = &mut cfg.corpus;
    if let Some(v) = a.min_chars {
        c.dictionary.min_chars = v;
    }
    if let Some(v) = a.max_ngram {
        c.dictionary.max_ngram = v;
    }
    if let Some(v) = a.filter_side {
        c.dictionary.side = v;
    }
    if let Some(v) = a.max_tokens {
        c.max_tokens = v;
    }
    c.matching.casefold |= a.casefold;
    c.matching.multi_pass |= a.multi_pass;

    let pairs = corpus::load_corpus(&a.src, &a.tgt)?;
    let pairs = corpus::filter_corpus_by_length(&pairs, c.max_tokens);
    let dict = corpus::filter_dictionary(&corpus::load_dictionary(&a.dict)?, &c.dictionary);
    let mc = matcher::build_matched_corpus(&pairs, &dict, c.matching);

    let dir = parent_dir(&a.out)?;
    matcher::save_matched(&a.out, &mc.sentences)?;
    eprintln!(
        "matched {} of {} sentence pairs with {} dictionary entries",
        mc.len(),
        pairs.len(),
        dict.len()
    );
    write_manifest(
        &dir,
        "match",
        &cfg,
        &[("src", &a.src), ("tgt", &a.tgt), ("dict", &a.dict)],
        &[&a.out],
    )
}

fn run_split(a: SplitArgs, mut cfg: PipelineConfig) -> Result<()> {
    if let Some(v) = a.heldout_size {
        cfg.split.heldout_size = v;
    }
    if let Some(v) = a.dup_mode {
        cfg.split.dup_mode = v;
    }
    let mc = matcher::load_matched(&a.matched)?;
    let split_cfg = cfg.split_config();
    let result = splitter::split(&mc, &split_cfg)?;

    ensure_dir(&a.out_dir)?;
    let mut outputs = Vec::new();
    for part in Part::ALL {
        let sentences = result.part(part);
        let name = part.name();
        let src = a.out_dir.join(format!("{name}.src"));
        let tgt = a.out_dir.join(format!("{name}.tgt"));
        let js = a.out_dir.join(format!("{name}.jsonl"));
        corpus::write_lines(&src, sentences.iter().map(|s| &s.pair.source))?;
        corpus::write_lines(&tgt, sentences.iter().map(|s| &s.pair.target))?;
        matcher::save_matched(&js, sentences)?;
        outputs.extend([src, tgt, js]);
    }
    let report = a.out_dir.join("split_report.json");
    jsonl::write_json(&report, &result.report(&split_cfg))?;
    outputs.push(report);

    let sizes = result.sizes();
    eprintln!(
        "split {} sentences into {}/{}/{}",
        mc.len(),
        sizes.train,
        sizes.valid,
        sizes.test
    );
    let outs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&a.out_dir, "split", &cfg, &[("matched", &a.matched)], &outs)
}

fn run_corrupt(a: CorruptArgs, mut cfg: PipelineConfig) -> Result<()> {
    let c = &mut cfg.corrupt;
    if let Some(v) = a.ratio {
        c.ratio = v;
    }
    if let Some(v) = a.geometric_p {
        c.geometric_p = v;
    }
    if let Some(v) = a.min_span {
        c.min_span = v;
    }
    if let Some(v) = a.max_span {
        c.max_span = v;
    }
    if let Some(v) = a.mask_token {
        c.mask_token = v;
    }

    let mc = matcher::load_matched(&a.matched)?;
    let vocabulary: Vec<String> = match &a.vocab {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect(),
        None => mc
            .sentences
            .iter()
            .flat_map(|s| s.target().tokens())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let corrupter = Corrupter::new(cfg.corruption_config(vocabulary))?;
    let records: Vec<CorruptionRecord> = mc
        .sentences
        .par_iter()
        .map(|s| {
            let mut rng = seed::stream(cfg.seed, "corrupter", s.id());
            corrupter
                .corrupt(s.target(), &mut rng)
                .map(|c| CorruptionRecord::new(s.id(), &c))
        })
        .collect::<Result<_>>()?;

    let dir = parent_dir(&a.out)?;
    jsonl::write(&a.out, &records)?;
    let mut inputs = vec![("matched", a.matched.as_path())];
    if let Some(v) = &a.vocab {
        inputs.push(("vocab", v.as_path()));
    }
    write_manifest(&dir, "corrupt", &cfg, &inputs, &[&a.out])
}

fn run_stats(a: StatsArgs, mut cfg: PipelineConfig) -> Result<()> {
    if let Some(k) = a.top_k {
        cfg.metrics.top_k = k;
    }
    let mc = matcher::load_matched(&a.matched)?;
    let stats = analytics::corpus_stats(&mc)?;
    let top = analytics::top_terms(&mc, cfg.metrics.top_k)?;
    let hist = analytics::ngram_histogram(&mc);
    if hist.total() != stats.n_terms {
        return Err(Error::Validation(
            "histogram total disagrees with the term count".into(),
        ));
    }

    ensure_dir(&a.out_dir)?;
    let stats_path = a.out_dir.join("stats.json");
    let top_path = a.out_dir.join("top_terms.tsv");
    let hist_path = a.out_dir.join("ngram_hist.csv");
    jsonl::write_json(&stats_path, &stats)?;
    write_text(&top_path, &analytics::top_terms_tsv(&top))?;
    write_text(&hist_path, &hist.to_csv())?;
    write_manifest(
        &a.out_dir,
        "stats",
        &cfg,
        &[("matched", &a.matched)],
        &[&stats_path, &top_path, &hist_path],
    )
}

#[derive(Serialize)]
struct MetricsDocument {
    n_sentences: usize,
    term_usage: metrics::TermUsageReport,
    lsm2: metrics::LsmReport,
}

fn run_eval(a: EvalArgs, mut cfg: PipelineConfig) -> Result<()> {
    cfg.metrics.per_sentence |= a.per_sentence;
    let mc = matcher::load_matched(&a.matched)?;
    let hyp_text = fs::read_to_string(&a.hyp).map_err(|e| Error::io(&a.hyp, e))?;
    let hyps: Vec<&str> = hyp_text.lines().collect();
    if hyps.len() != mc.len() {
        return Err(Error::Validation(format!(
            "{} hypotheses for {} references",
            hyps.len(),
            mc.len()
        )));
    }
    let instances: Vec<EvalInstance> = hyps
        .iter()
        .zip(&mc.sentences)
        .map(|(h, r)| EvalInstance::new(h, r.clone()))
        .collect();

    let doc = MetricsDocument {
        n_sentences: instances.len(),
        term_usage: metrics::term_usage(&instances),
        lsm2: metrics::aggregate_lsm2(&instances),
    };
    ensure_dir(&a.out_dir)?;
    let metrics_path = a.out_dir.join("metrics.json");
    jsonl::write_json(&metrics_path, &doc)?;

    // Plain-text copies for external sentence-level scorers.
    let hyp_path = a.out_dir.join("hypothesis.txt");
    let ref_path = a.out_dir.join("reference.txt");
    let hyp_lines: String = instances
        .iter()
        .map(|i| i.hypothesis.join(" ") + "\n")
        .collect();
    write_text(&hyp_path, &hyp_lines)?;
    corpus::write_lines(&ref_path, mc.sentences.iter().map(MatchedSentence::target))?;

    let mut outputs = vec![metrics_path, hyp_path, ref_path];
    if cfg.metrics.per_sentence {
        let path = a.out_dir.join("per_sentence.tsv");
        let mut tsv = String::from("id\tterm\tl\tmatched\tlsm2\n");
        for inst in &instances {
            for o in metrics::term_outcomes(inst) {
                let lsm = o.lsm2.map_or_else(|| "-".to_string(), |s| format!("{s:.6}"));
                tsv.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    o.id, o.term, o.l, o.matched as u8, lsm
                ));
            }
        }
        write_text(&path, &tsv)?;
        outputs.push(path);
    }
    let outs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(
        &a.out_dir,
        "eval",
        &cfg,
        &[("matched", &a.matched), ("hyp", &a.hyp)],
        &outs,
    )
}

fn run_loss(a: LossArgs, mut cfg: PipelineConfig) -> Result<()> {
    if let Some(g) = a.gamma {
        cfg.loss.gamma = g;
    }
    cfg.loss.per_token |= a.per_token;
    let records: Vec<LogProbRecord> = jsonl::read(&a.records)?;
    let mut breakdown = objective::total_loss(&records, &cfg.loss_config())?;
    if !cfg.loss.per_token {
        breakdown.per_token = None;
    }
    let dir = parent_dir(&a.out)?;
    jsonl::write_json(&a.out, &breakdown)?;
    write_manifest(&dir, "loss", &cfg, &[("records", &a.records)], &[&a.out])
}

fn run_unique(a: UniqueArgs, cfg: PipelineConfig) -> Result<()> {
    let train = matcher::load_matched(&a.train)?;
    let valid = matcher::load_matched(&a.valid)?;
    let test = matcher::load_matched(&a.test)?;
    let unique = splitter::unique_subset(&test.sentences, &train.sentences, &valid.sentences);
    eprintln!("kept {} of {} test sentences", unique.len(), test.len());
    let dir = parent_dir(&a.out)?;
    matcher::save_matched(&a.out, &unique)?;
    write_manifest(
        &dir,
        "unique-test",
        &cfg,
        &[("train", &a.train), ("valid", &a.valid), ("test", &a.test)],
        &[&a.out],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_module_defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.split.heldout_size, 3000);
        assert_eq!(cfg.corrupt.geometric_p, 0.2);
        assert_eq!(cfg.corrupt.max_span, 10);
        assert_eq!(cfg.corrupt.ratio, 0.5);
        assert_eq!(cfg.loss.gamma, 0.5);
        assert_eq!(cfg.corpus.max_tokens, 80);
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = PipelineConfig::from_toml("seed = 7\n[loss]\ngamma = 1.5\n[split]\ndup_mode = \"paper\"\n")
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.loss.gamma, 1.5);
        assert_eq!(cfg.split.dup_mode, DupMode::Paper);
        assert_eq!(cfg.split.heldout_size, 3000);
        assert_eq!(cfg.loss_config().gamma, 1.5);
    }

    #[test]
    fn unknown_toml_section_is_rejected() {
        assert!(PipelineConfig::from_toml("[nope]\nx = 1\n").is_err());
        assert!(PipelineConfig::from_toml("[split]\nheldout = 5\n").is_err());
        assert!(PipelineConfig::from_toml("[corrupt.replace_probs]\nmask = 0.8\nrandom = 0.1\nkeep = 0.1\n").is_ok());
        assert!(PipelineConfig::from_toml("[corpus.dictionary]\nmin_char = 3\n").is_err());
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(run(["termspan", "--help"]), 0);
        assert_eq!(run(["termspan", "match", "--bogus"]), 1);
        assert_eq!(run(["termspan"]), 1);
    }
}
