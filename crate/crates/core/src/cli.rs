//! Command-line surface: argument parsing, configuration resolution and the
//! report-producing commands.
//!
//! Every command returns its output instead of printing it, so the binary is
//! a thin wrapper and tests can compare reports byte for byte.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotation::{
    emit_corpus, load_corpus_str, parse_sequence_file, AnnotatedSegment, FunctionSequence, Genre, ParseMode,
};
use crate::harness::{
    run_continuation, run_recognition, AnnotationMode, BackendConfig, BackendKind, ContinuationRun, MockMode,
    PromptTemplate, RecognitionRun,
};
use crate::homogenization::{
    analyze_episodes_with, frequency_profile, sample_windows, EpisodeSet, SampleOptions, SimilarityKind,
};
use crate::metrics::recognition_table;
use crate::paradigm::{
    builtin_paradigm, builtin_paradigms, classify, matches, mine, paradigm_table, parse_fraction, parse_pattern,
    support, MineOptions, ParadigmError, ParadigmRow, DEFAULT_MAX_ALT,
};
use crate::taxonomy::{all_functions, export_registry_jsonl, legacy_functions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ANALYTIC: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Analytic(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Analytic(_) => EXIT_ANALYTIC,
            CliError::Backend(_) => EXIT_BACKEND,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "proppkit", version, about = "Narrative function analysis for web fiction")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report format (env NARR_FORMAT).
    #[arg(long = "output-format", short = 'o', global = true, value_enum)]
    pub output_format: Option<OutputFormat>,
    /// Seed for sampling and backends (env NARR_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One inline-annotated passage per line.
    Inline,
    /// One hyphen sequence per line.
    Seq,
    /// Line-delimited JSON corpus records.
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse annotated passages or sequence files.
    Parse {
        input: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        strict: bool,
        /// Genre assigned to inline passages.
        #[arg(long, default_value = "Fantasy")]
        genre: String,
    },
    /// Function frequency profile with the common/rare partition.
    Stats {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Sample windows before counting.
        #[arg(long)]
        windows: bool,
        #[arg(long, default_value_t = 2000)]
        chars: usize,
        #[arg(long, default_value_t = 5)]
        groups: usize,
        #[arg(long, default_value_t = 4)]
        per_group: usize,
    },
    /// Match sequences against a pattern or the built-in paradigms.
    Match {
        sequences: PathBuf,
        /// Pattern text such as "(A)->(Q)->{O/S}" or a built-in label.
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Induce a paradigm from sequences of one plot type.
    Mine {
        sequences: PathBuf,
        #[arg(long, default_value = "0.6")]
        support: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ALT)]
        max_alt: usize,
        /// Plot label shown in the report.
        #[arg(long)]
        label: Option<String>,
    },
    /// Score function recognition against a gold corpus.
    Eval {
        corpus: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        preds: Option<usize>,
        /// Exit nonzero when any prediction failed.
        #[arg(long)]
        fail_on_error: bool,
    },
    /// Homogenization of continuation episodes.
    Homog {
        /// Episode sequences; omit when generating from --preface.
        sequences: Option<PathBuf>,
        /// Corpus whose first segment is continued.
        #[arg(long, conflicts_with = "sequences")]
        preface: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        /// Sequence file per episode instead of a recognition pass.
        #[arg(long, num_args = 1..)]
        sidecar: Vec<PathBuf>,
        /// Use the LCS ratio instead of edit-distance similarity.
        #[arg(long)]
        lcs: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Print the function registry.
    Registry {
        /// The original 31-function list.
        #[arg(long)]
        legacy: bool,
        /// Raw JSONL export without a report header.
        #[arg(long)]
        jsonl: bool,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct BackendArgs {
    /// mock, replay or http.
    #[arg(long)]
    pub backend: Option<String>,
    /// echo, noisy:<p>, timeout or unavailable.
    #[arg(long)]
    pub mock_mode: Option<String>,
    /// Replay fixture file.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Endpoint URL (env NARR_API_URL).
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Model name (env NARR_MODEL).
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    #[arg(long)]
    pub max_parallel: Option<usize>,
    /// Prompt template file.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// JSON pointer to the response text.
    #[arg(long)]
    pub response_path: Option<String>,
}

/// Keys accepted in the configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub backend: Option<String>,
    pub mock_mode: Option<String>,
    pub replay: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_parallel: Option<usize>,
    pub template: Option<PathBuf>,
    pub response_path: Option<String>,
    pub rounds: Option<usize>,
    pub preds: Option<usize>,
    pub params: Option<toml::Table>,
}

/// Fully resolved settings, echoed into every report header.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub format: OutputFormat,
    pub seed: u64,
    pub backend: String,
    pub mock_mode: String,
    pub replay: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key_set: bool,
    pub timeout_secs: u64,
    pub max_parallel: usize,
    pub template: Option<PathBuf>,
    pub response_path: Option<String>,
    pub rounds: usize,
    pub preds: usize,
    pub params: Map<String, Value>,
    #[serde(skip)]
    api_key: Option<String>,
}

fn pick<T>(flag: Option<T>, env: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(env).or(file)
}

impl EffectiveConfig {
    /// Resolves flags over environment over file.
    pub fn resolve(cli: &Cli, env: &HashMap<String, String>) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => {
                let text = read_text(path)?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let env_get = |k: &str| env.get(k).filter(|v| !v.is_empty()).cloned();
        let env_format = env_get("NARR_FORMAT")
            .map(|v| OutputFormat::from_str(&v, true).map_err(|_| CliError::Input(format!("NARR_FORMAT: unknown format {v:?}"))))
            .transpose()?;
        let env_seed = env_get("NARR_SEED")
            .map(|v| v.parse::<u64>().map_err(|_| CliError::Input(format!("NARR_SEED: not an integer: {v:?}"))))
            .transpose()?;
        let b = match &cli.command {
            Command::Eval { backend, .. } | Command::Homog { backend, .. } => backend.clone(),
            _ => BackendArgs::default(),
        };
        let (rounds, preds) = match &cli.command {
            Command::Eval { rounds, preds, .. } => (*rounds, *preds),
            _ => (None, None),
        };
        let params = match file.params {
            Some(table) => match serde_json::to_value(table).map_err(|e| CliError::Input(e.to_string()))? {
                Value::Object(map) => map,
                _ => Map::new(),
            },
            None => Map::new(),
        };
        Ok(EffectiveConfig {
            format: pick(cli.output_format, env_format, file.format).unwrap_or(OutputFormat::Text),
            seed: pick(cli.seed, env_seed, file.seed).unwrap_or(0),
            backend: pick(b.backend, None, file.backend).unwrap_or_else(|| "mock".into()),
            mock_mode: pick(b.mock_mode, None, file.mock_mode).unwrap_or_else(|| "echo".into()),
            replay: pick(b.replay, None, file.replay),
            endpoint: pick(b.endpoint, env_get("NARR_API_URL"), file.endpoint),
            model: pick(b.model, env_get("NARR_MODEL"), file.model),
            api_key_set: env_get("NARR_API_KEY").is_some() || file.api_key.is_some(),
            timeout_secs: pick(b.timeout_secs, None, file.timeout_secs).unwrap_or(60),
            max_parallel: pick(b.max_parallel, None, file.max_parallel).unwrap_or(4),
            template: pick(b.template, None, file.template),
            response_path: pick(b.response_path, None, file.response_path),
            rounds: pick(rounds, None, file.rounds).unwrap_or(10),
            preds: pick(preds, None, file.preds).unwrap_or(5),
            params,
            api_key: env_get("NARR_API_KEY").or(file.api_key),
        })
    }

    pub fn backend_config(&self) -> Result<BackendConfig, CliError> {
        let kind: BackendKind = self.backend.parse().map_err(CliError::Input)?;
        let mock_mode: MockMode = self.mock_mode.parse().map_err(CliError::Input)?;
        let cfg = BackendConfig {
            kind,
            endpoint: self.endpoint.clone(),
            model_name: self.model.clone(),
            timeout: Duration::from_secs(self.timeout_secs),
            max_parallel: self.max_parallel,
            replay_path: self.replay.clone(),
            mock_mode,
            api_key: self.api_key.clone(),
            response_path: self.response_path.clone(),
            params: self.params.clone(),
        };
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

struct Report {
    format: OutputFormat,
    header: Value,
    inputs: Vec<(String, String)>,
    body: String,
    json: Value,
    warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl Report {
    fn new(cfg: &EffectiveConfig, command: &str) -> Self {
        Report {
            format: cfg.format,
            header: json!({
                "tool": format!("proppkit {}", env!("CARGO_PKG_VERSION")),
                "command": command,
                "config": cfg,
            }),
            inputs: Vec::new(),
            body: String::new(),
            json: Value::Null,
            warnings: Vec::new(),
        }
    }

    /// Reads an input file and records its digest.
    fn input(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push((path.display().to_string(), sha256_hex(&bytes)));
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
    }

    fn render(self) -> Outcome {
        let stdout = match self.format {
            OutputFormat::Json => {
                let mut provenance = self.header;
                provenance["inputs"] = self
                    .inputs
                    .iter()
                    .map(|(p, d)| json!({ "path": p, "sha256": d }))
                    .collect();
                let doc = json!({ "provenance": provenance, "result": self.json });
                serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
            }
            OutputFormat::Text | OutputFormat::Csv => {
                let mut out = format!("# {}\n", self.header["tool"].as_str().unwrap_or_default());
                out.push_str(&format!("# command: {}\n", self.header["command"].as_str().unwrap_or_default()));
                out.push_str(&format!("# config: {}\n", self.header["config"]));
                for (p, d) in &self.inputs {
                    out.push_str(&format!("# input: {p} sha256:{d}\n"));
                }
                out.push_str(&self.body);
                out
            }
        };
        Outcome {
            stdout,
            stderr: self.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
            code: EXIT_OK,
        }
    }
}

fn guess_format(path: &Path) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => InputFormat::Jsonl,
        Some("seq") => InputFormat::Seq,
        _ => InputFormat::Inline,
    }
}

fn load_segments(text: &str, format: InputFormat, mode: ParseMode, genre: Genre) -> Result<Vec<AnnotatedSegment>, CliError> {
    match format {
        InputFormat::Jsonl => load_corpus_str(text, mode).map_err(|e| CliError::Input(e.to_string())),
        InputFormat::Inline => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                AnnotatedSegment::from_inline(format!("line:{}", i + 1), genre, line, mode)
                    .map_err(|e| CliError::Input(format!("line {}: {e}", i + 1)))
            })
            .collect(),
        InputFormat::Seq => Err(CliError::Input("sequence files carry no passages".into())),
    }
}

fn load_sequences(text: &str) -> Result<Vec<FunctionSequence>, CliError> {
    parse_sequence_file(text).map_err(|e| CliError::Input(e.to_string()))
}

fn source(seq: &FunctionSequence, i: usize) -> String {
    seq.source_id.clone().unwrap_or_else(|| format!("#{}", i + 1))
}

fn json_of<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, env: &HashMap<String, String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                _ => Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_INPUT,
                },
            };
        }
    };
    match execute(&cli, env) {
        Ok(out) => out,
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.code(),
        },
    }
}

pub fn execute(cli: &Cli, env: &HashMap<String, String>) -> Result<Outcome, CliError> {
    let cfg = EffectiveConfig::resolve(cli, env)?;
    if cfg.format == OutputFormat::Csv && !matches!(cli.command, Command::Stats { .. }) {
        return Err(CliError::Input("csv output is only available for stats".into()));
    }
    match &cli.command {
        Command::Parse { input, format, strict, genre } => cmd_parse(&cfg, input, *format, *strict, genre),
        Command::Stats {
            corpus,
            format,
            windows,
            chars,
            groups,
            per_group,
        } => {
            let sampling = windows.then_some(SampleOptions {
                groups: *groups,
                novels_per_group: *per_group,
                chars: *chars,
                seed: cfg.seed,
            });
            cmd_stats(&cfg, corpus, *format, sampling)
        }
        Command::Match { sequences, pattern } => cmd_match(&cfg, sequences, pattern.as_deref()),
        Command::Mine {
            sequences,
            support,
            max_alt,
            label,
        } => cmd_mine(&cfg, sequences, support, *max_alt, label.as_deref()),
        Command::Eval {
            corpus, fail_on_error, ..
        } => cmd_eval(&cfg, corpus, *fail_on_error),
        Command::Homog {
            sequences,
            preface,
            episodes,
            sidecar,
            lcs,
            ..
        } => {
            let kind = if *lcs { SimilarityKind::LcsRatio } else { SimilarityKind::EditDistance };
            cmd_homog(&cfg, sequences.as_deref(), preface.as_deref(), *episodes, sidecar, kind)
        }
        Command::Registry { legacy, jsonl } => cmd_registry(&cfg, *legacy, *jsonl),
    }
}

pub fn cmd_parse(
    cfg: &EffectiveConfig,
    input: &Path,
    format: Option<InputFormat>,
    strict: bool,
    genre: &str,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "parse");
    let text = report.input(input)?;
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let genre: Genre = genre.parse().map_err(|g| CliError::Input(format!("unknown genre {g:?}")))?;
    match format.unwrap_or_else(|| guess_format(input)) {
        InputFormat::Seq => {
            let seqs = load_sequences(&text)?;
            for (i, s) in seqs.iter().enumerate() {
                report.body.push_str(&format!("{}\t{}\t{}\n", source(s, i), s.len(), s));
            }
            report.body.push_str(&format!("sequences: {}\n", seqs.len()));
            report.json = json!({ "sequences": seqs.iter().map(|s| json!({
                "source": s.source_id, "length": s.len(), "sequence": s.to_string(),
            })).collect::<Vec<_>>() });
        }
        f => {
            let segments = load_segments(&text, f, mode, genre)?;
            let total: usize = segments.iter().map(|s| s.annotations.len()).sum();
            for s in &segments {
                report.body.push_str(&format!(
                    "{}\t{}\t{} chars\t{} annotations\t{}\n",
                    s.id,
                    s.genre,
                    s.char_len(),
                    s.annotations.len(),
                    s.sequence()
                ));
            }
            report.body.push_str(&format!("segments: {}, annotations: {total}\n", segments.len()));
            let records: Vec<Value> = emit_corpus(&segments)
                .lines()
                .map(|l| serde_json::from_str(l).expect("emitted record is JSON"))
                .collect();
            report.json = json!({ "segments": records, "annotations": total });
        }
    }
    Ok(report.render())
}

pub fn cmd_stats(
    cfg: &EffectiveConfig,
    corpus: &Path,
    format: Option<InputFormat>,
    sampling: Option<SampleOptions>,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "stats");
    let text = report.input(corpus)?;
    let format = format.unwrap_or_else(|| guess_format(corpus));
    let seqs = match format {
        InputFormat::Seq => {
            if sampling.is_some() {
                return Err(CliError::Input("--windows needs a passage corpus".into()));
            }
            load_sequences(&text)?
        }
        f => {
            let mut segments = load_segments(&text, f, ParseMode::Lenient, Genre::Fantasy)?;
            if let Some(opts) = sampling {
                segments = sample_windows(&segments, opts).map_err(|e| CliError::Analytic(e.to_string()))?;
                report
                    .body
                    .push_str(&format!("windows: {} of up to {} chars\n", segments.len(), opts.chars));
            }
            segments.iter().map(AnnotatedSegment::sequence).collect()
        }
    };
    if seqs.iter().all(FunctionSequence::is_empty) {
        report.warnings.push("corpus contains no annotations".into());
    }
    let profile = frequency_profile(&seqs);
    match cfg.format {
        OutputFormat::Csv => {
            report.body = profile.to_csv();
        }
        _ => report.body.push_str(&profile.to_text()),
    }
    report.json = json_of(&profile);
    Ok(report.render())
}

fn resolve_pattern(text: &str) -> Result<crate::paradigm::ParadigmPattern, CliError> {
    if let Some(p) = builtin_paradigm(text) {
        return Ok(p);
    }
    parse_pattern(text).map_err(|e| CliError::Input(format!("pattern {text:?}: {e}")))
}

pub fn cmd_match(cfg: &EffectiveConfig, sequences: &Path, pattern: Option<&str>) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "match");
    let text = report.input(sequences)?;
    let seqs = load_sequences(&text)?;
    if seqs.is_empty() {
        return Err(CliError::Input(format!("{}: no sequences", sequences.display())));
    }
    let analytic = |e: ParadigmError| CliError::Analytic(e.to_string());
    match pattern {
        Some(p) => {
            let pattern = resolve_pattern(p)?;
            let mut verdicts = Vec::new();
            for (i, s) in seqs.iter().enumerate() {
                let m = matches(s, &pattern).map_err(analytic)?;
                report.body.push_str(&format!(
                    "{}\t{}\t{}\n",
                    source(s, i),
                    if m.matched { "match" } else { "-" },
                    s
                ));
                verdicts.push(json!({ "source": source(s, i), "sequence": s.to_string(), "result": m }));
            }
            let sup = support(&seqs, &pattern).map_err(analytic)?;
            report.body.push_str(&format!("pattern: {pattern}\nsupport: {sup}\n"));
            report.json = json!({ "pattern": pattern, "support": sup, "sequences": verdicts });
        }
        None => {
            let all = builtin_paradigms();
            let mut verdicts = Vec::new();
            for (i, s) in seqs.iter().enumerate() {
                let labels = classify(s, &all).map_err(analytic)?;
                report
                    .body
                    .push_str(&format!("{}\t{}\t{}\n", source(s, i), s, labels.join(",")));
                verdicts.push(json!({ "source": source(s, i), "sequence": s.to_string(), "labels": labels }));
            }
            let mut rows = Vec::new();
            let mut sups = Vec::new();
            for p in all {
                let sup = support(&seqs, &p).map_err(analytic)?;
                sups.push(json!({ "pattern": p, "support": sup }));
                rows.push(ParadigmRow {
                    plot: p.name(),
                    note: sup.to_string(),
                    pattern: p,
                });
            }
            report.body.push('\n');
            report.body.push_str(&paradigm_table(&rows, "Support"));
            report.json = json!({ "sequences": verdicts, "paradigms": sups });
        }
    }
    Ok(report.render())
}

pub fn cmd_mine(
    cfg: &EffectiveConfig,
    sequences: &Path,
    min_support: &str,
    max_alt: usize,
    label: Option<&str>,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "mine");
    let text = report.input(sequences)?;
    let seqs = load_sequences(&text)?;
    let min_support = parse_fraction(min_support).map_err(|e| CliError::Input(e.to_string()))?;
    let mined = mine(&seqs, MineOptions { min_support, max_alt }).map_err(|e| match e {
        ParadigmError::InvalidParameter(_) => CliError::Input(e.to_string()),
        ParadigmError::EmptyCorpus => CliError::Input(e.to_string()),
        _ => CliError::Analytic(e.to_string()),
    })?;
    let plot = label.map(str::to_string).unwrap_or_else(|| {
        sequences
            .file_stem()
            .map_or_else(|| "mined".into(), |s| s.to_string_lossy().into_owned())
    });
    report.body.push_str(&paradigm_table(
        &[ParadigmRow {
            plot,
            pattern: mined.pattern.clone(),
            note: mined.support.to_string(),
        }],
        "Support",
    ));
    report.body.push_str(&format!("\nanchor-conforming sequences: {}\n", mined.anchor_conforming));
    report.body.push_str("interior candidates (symbol, occurrences, median position, ordered):\n");
    for c in &mined.candidates {
        report.body.push_str(&format!(
            "  {}\t{}\t{:.3}\t{}\n",
            c.symbol,
            c.occurrences,
            crate::paradigm::fraction_to_f64(c.median_position),
            if c.ordered { "yes" } else { "no" }
        ));
    }
    report.json = json_of(&mined);
    Ok(report.render())
}

fn template(cfg: &EffectiveConfig, report: &mut Report, default: PromptTemplate) -> Result<PromptTemplate, CliError> {
    match &cfg.template {
        Some(path) => {
            let text = report.input(path)?;
            PromptTemplate::parse(path.display().to_string(), &text).map_err(|e| CliError::Input(e.to_string()))
        }
        None => Ok(default),
    }
}

fn harness_error(e: crate::harness::HarnessError) -> CliError {
    use crate::harness::HarnessError as H;
    match e {
        H::BackendUnreachable(_) => CliError::Backend(e.to_string()),
        H::Config(_) | H::Template(_) | H::MissingSidecar { .. } | H::Sidecar { .. } | H::ReplayMiss(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Analytic(other.to_string()),
    }
}

pub fn cmd_eval(cfg: &EffectiveConfig, corpus: &Path, fail_on_error: bool) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "eval");
    let text = report.input(corpus)?;
    let segments = load_segments(&text, guess_format(corpus), ParseMode::Lenient, Genre::Fantasy)?;
    if let Some(p) = &cfg.replay {
        report.input(p)?;
    }
    let backend = cfg.backend_config()?;
    let mut run = RecognitionRun::new(segments);
    run.rounds = cfg.rounds;
    run.preds_per_round = cfg.preds;
    run.seed = cfg.seed;
    run.template = template(cfg, &mut report, PromptTemplate::recognition())?;
    let out = run_recognition(&backend, &run).map_err(harness_error)?;
    let total = cfg.rounds * cfg.preds;
    report.body.push_str(&format!("template: {}\n", out.template.id));
    report.body.push_str(&format!(
        "rounds: {} x {} predictions, gold instances: {}\n\n",
        cfg.rounds,
        cfg.preds,
        run.segments.iter().map(|s| s.annotations.len()).sum::<usize>()
    ));
    report.body.push_str(&recognition_table(&[(out.backend.clone(), &out.report)]));
    report.body.push_str(&format!(
        "\nfailed predictions: {}/{total}\n",
        out.ledger.failed_predictions
    ));
    for e in &out.ledger.entries {
        report.body.push_str(&format!(
            "  round {} prediction {} segment {}: {}\n",
            e.round, e.prediction, e.segment, e.error
        ));
    }
    report.json = json_of(&out);
    let failed = out.ledger.failed_predictions;
    if failed > 0 {
        report.warnings.push(format!("{failed} of {total} predictions failed"));
    }
    let mut outcome = report.render();
    if fail_on_error && failed > 0 {
        outcome.code = EXIT_BACKEND;
    }
    Ok(outcome)
}

pub fn cmd_homog(
    cfg: &EffectiveConfig,
    sequences: Option<&Path>,
    preface: Option<&Path>,
    n_episodes: usize,
    sidecars: &[PathBuf],
    kind: SimilarityKind,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(cfg, "homog");
    let (episodes, texts) = match (sequences, preface) {
        (Some(path), _) => {
            let text = report.input(path)?;
            (load_sequences(&text)?, None)
        }
        (None, Some(path)) => {
            let text = report.input(path)?;
            let segment = load_segments(&text, guess_format(path), ParseMode::Lenient, Genre::Fantasy)?
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Input(format!("{}: no preface segment", path.display())))?;
            if let Some(p) = &cfg.replay {
                report.input(p)?;
            }
            for s in sidecars {
                report.input(s).map_err(|_| CliError::Input(format!("missing sidecar {}", s.display())))?;
            }
            let backend = cfg.backend_config()?;
            let mut run = ContinuationRun::new(segment);
            run.n_episodes = n_episodes;
            run.seed = cfg.seed;
            run.template = template(cfg, &mut report, PromptTemplate::continuation())?;
            if !sidecars.is_empty() {
                run.annotation_mode = AnnotationMode::File(sidecars.to_vec());
            }
            let out = run_continuation(&backend, &run).map_err(harness_error)?;
            (out.sequences, Some(out.episodes))
        }
        (None, None) => return Err(CliError::Input("give a sequence file or --preface".into())),
    };
    let set = EpisodeSet::new(episodes.clone()).map_err(|e| CliError::Input(e.to_string()))?;
    let analysis = analyze_episodes_with(&set, kind).map_err(|e| CliError::Analytic(e.to_string()))?;
    for (i, s) in episodes.iter().enumerate() {
        report.body.push_str(&format!("Ep.{}\t{}\n", i + 1, s));
    }
    report.body.push_str(&analysis.to_text());
    report.json = json!({
        "episodes": episodes.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "texts": texts,
        "report": analysis,
    });
    Ok(report.render())
}

pub fn cmd_registry(cfg: &EffectiveConfig, legacy: bool, jsonl: bool) -> Result<Outcome, CliError> {
    if jsonl {
        return Ok(Outcome {
            stdout: export_registry_jsonl(legacy),
            ..Outcome::default()
        });
    }
    let mut report = Report::new(cfg, "registry");
    if legacy {
        for f in legacy_functions() {
            report
                .body
                .push_str(&format!("{}\t{}\t{}\n", f.symbol, f.name, f.description));
        }
        report.json = json_of(&legacy_functions());
    } else {
        for f in all_functions() {
            report.body.push_str(&format!(
                "{}\t{}\t{:?}\t{}\n",
                f.symbol.token(),
                f.name,
                f.status,
                f.description
            ));
        }
        report.json = json_of(&all_functions());
    }
    Ok(report.render())
}
