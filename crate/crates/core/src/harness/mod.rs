//! Recognition and continuation experiments against pluggable backends.

pub mod backend;
pub mod output;
pub mod prompt;

use std::path::PathBuf;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::annotation::{parse_inline, parse_sequence_file, AnnotatedSegment, FunctionSequence, ParseMode};
use crate::metrics::{aggregate, gold_instances, score_instances, EvaluationReport, MetricsError, Prediction, SplitAssignment};

pub use backend::{
    request_digest, Backend, BackendError, ChatMessage, ChatRequest, HttpBackend, MockBackend, MockMode, ReplayBackend,
    ReplayRecord,
};
pub use output::{extract_symbols, parse_model_output};
pub use prompt::PromptTemplate;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("no replay fixture for request {0}")]
    ReplayMiss(String),
    #[error("episode {episode}: missing sidecar sequence file")]
    MissingSidecar { episode: usize },
    #[error("sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error("episode {episode}: {error}")]
    Episode { episode: usize, error: BackendError },
    #[error("template: {0}")]
    Template(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Replay,
    Http,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "replay" => Ok(BackendKind::Replay),
            "http" => Ok(BackendKind::Http),
            other => Err(format!("unknown backend {other:?} (mock, replay, http)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub timeout: Duration,
    pub max_parallel: usize,
    pub replay_path: Option<PathBuf>,
    pub mock_mode: MockMode,
    pub api_key: Option<String>,
    pub response_path: Option<String>,
    /// Decoding parameters forwarded in every request.
    pub params: Map<String, Value>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            endpoint: None,
            model_name: None,
            timeout: Duration::from_secs(60),
            max_parallel: 4,
            replay_path: None,
            mock_mode: MockMode::Echo,
            api_key: None,
            response_path: None,
            params: Map::new(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.max_parallel == 0 {
            return Err(HarnessError::Config("max_parallel must be at least 1".into()));
        }
        match self.kind {
            BackendKind::Http if self.endpoint.is_none() || self.model_name.is_none() => {
                Err(HarnessError::Config("http backend needs an endpoint and a model name".into()))
            }
            BackendKind::Replay if self.replay_path.is_none() => {
                Err(HarnessError::Config("replay backend needs a replay file".into()))
            }
            _ => Ok(()),
        }
    }

    /// Instantiates the backend; `gold` feeds the mock's echo mode.
    pub fn build(&self, gold: &[AnnotatedSegment]) -> Result<Box<dyn Backend>, HarnessError> {
        self.validate()?;
        Ok(match self.kind {
            BackendKind::Mock => Box::new(MockBackend::new(self.mock_mode.clone(), gold)),
            BackendKind::Replay => {
                let path = self.replay_path.as_ref().expect("validated");
                Box::new(ReplayBackend::load(path).map_err(HarnessError::Config)?)
            }
            BackendKind::Http => {
                let mut http = HttpBackend::new(
                    self.endpoint.clone().expect("validated"),
                    self.model_name.clone().expect("validated"),
                    self.api_key.clone(),
                    self.timeout,
                );
                if let Some(p) = &self.response_path {
                    http.response_path = p.clone();
                }
                Box::new(http)
            }
        })
    }

    pub fn request(&self, template: &PromptTemplate, text: &str, seed: u64) -> ChatRequest {
        ChatRequest {
            model: self.model_name.clone(),
            messages: template.render(text),
            seed: Some(seed),
            params: self.params.clone(),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, HarnessError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.max_parallel)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct RecognitionRun {
    pub segments: Vec<AnnotatedSegment>,
    pub rounds: usize,
    pub preds_per_round: usize,
    pub template: PromptTemplate,
    pub seed: u64,
    pub splits: SplitAssignment,
}

impl RecognitionRun {
    pub fn new(segments: Vec<AnnotatedSegment>) -> Self {
        RecognitionRun {
            segments,
            rounds: 10,
            preds_per_round: 5,
            template: PromptTemplate::recognition(),
            seed: 0,
            splits: SplitAssignment::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub round: usize,
    pub prediction: usize,
    pub segment: String,
    pub error: String,
}

/// Predictions with at least one failed call, and what failed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ErrorLedger {
    pub failed_predictions: usize,
    pub entries: Vec<LedgerEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecognitionOutcome {
    pub report: EvaluationReport,
    pub ledger: ErrorLedger,
    pub successful_predictions: usize,
    pub backend: String,
    pub template: PromptTemplate,
}

/// Runs `tasks` with at most `max_parallel` in flight, keeping input order.
fn collect_calls(
    cfg: &BackendConfig,
    backend: &dyn Backend,
    calls: &[(&ChatRequest, u32)],
) -> Result<Vec<Result<String, BackendError>>, HarnessError> {
    let results: Vec<_> = cfg
        .pool()?
        .install(|| calls.par_iter().map(|(req, sample)| backend.complete(req, *sample)).collect());
    if let Some(Err(BackendError::ReplayMiss(d))) = results.iter().find(|r| matches!(r, Err(BackendError::ReplayMiss(_)))) {
        return Err(HarnessError::ReplayMiss(d.clone()));
    }
    if !results.is_empty() && results.iter().all(|r| matches!(r, Err(BackendError::Unreachable(_)))) {
        let Some(Err(e)) = results.first() else { unreachable!() };
        return Err(HarnessError::BackendUnreachable(e.to_string()));
    }
    Ok(results)
}

pub fn run_recognition(cfg: &BackendConfig, run: &RecognitionRun) -> Result<RecognitionOutcome, HarnessError> {
    let backend = cfg.build(&run.segments)?;
    run_recognition_with(cfg, backend.as_ref(), run)
}

/// Scores `rounds × preds_per_round` predictions, each one call per segment.
pub fn run_recognition_with(
    cfg: &BackendConfig,
    backend: &dyn Backend,
    run: &RecognitionRun,
) -> Result<RecognitionOutcome, HarnessError> {
    if run.rounds == 0 || run.preds_per_round == 0 {
        return Err(HarnessError::Config("rounds and preds_per_round must be at least 1".into()));
    }
    if run.segments.is_empty() {
        return Err(HarnessError::Config("no segments to evaluate".into()));
    }
    let requests: Vec<ChatRequest> = run
        .segments
        .iter()
        .map(|s| cfg.request(&run.template, &s.clean_text, run.seed))
        .collect();
    let n_preds = run.rounds * run.preds_per_round;
    let calls: Vec<(&ChatRequest, u32)> = (0..n_preds)
        .flat_map(|k| requests.iter().map(move |r| (r, k as u32)))
        .collect();
    let results = collect_calls(cfg, backend, &calls)?;

    let gold_symbols: Vec<_> = run.segments.iter().flat_map(|s| s.annotations.iter().map(|a| a.symbol)).collect();
    let gold = gold_instances(&gold_symbols, &run.splits);
    let mut ledger = ErrorLedger::default();
    let mut rounds = vec![Vec::with_capacity(run.preds_per_round); run.rounds];
    for (k, chunk) in results.chunks(run.segments.len()).enumerate() {
        let (round, prediction) = (k / run.preds_per_round, k % run.preds_per_round);
        let mut failed = false;
        let parts: Vec<Prediction> = chunk
            .iter()
            .zip(&run.segments)
            .map(|(res, seg)| match res {
                Ok(text) => parse_model_output(text, seg.annotations.len()),
                Err(e) => {
                    failed = true;
                    ledger.entries.push(LedgerEntry {
                        round,
                        prediction,
                        segment: seg.id.clone(),
                        error: e.to_string(),
                    });
                    Prediction::absent(seg.annotations.len())
                }
            })
            .collect();
        ledger.failed_predictions += usize::from(failed);
        rounds[round].push(score_instances(&gold, &Prediction::concat(parts))?);
    }
    Ok(RecognitionOutcome {
        report: aggregate(&rounds)?,
        successful_predictions: n_preds - ledger.failed_predictions,
        ledger,
        backend: backend.describe(),
        template: run.template.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotationMode {
    /// A second recognition pass over each generated episode.
    Model,
    /// One sequence file per episode.
    File(Vec<PathBuf>),
}

#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub preface: AnnotatedSegment,
    pub n_episodes: usize,
    pub annotation_mode: AnnotationMode,
    pub template: PromptTemplate,
    pub recognizer: PromptTemplate,
    pub seed: u64,
}

impl ContinuationRun {
    pub fn new(preface: AnnotatedSegment) -> Self {
        ContinuationRun {
            preface,
            n_episodes: 5,
            annotation_mode: AnnotationMode::Model,
            template: PromptTemplate::continuation(),
            recognizer: PromptTemplate::recognition(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuationOutcome {
    pub episodes: Vec<String>,
    pub sequences: Vec<FunctionSequence>,
}

fn episode_results(results: Vec<Result<String, BackendError>>) -> Result<Vec<String>, HarnessError> {
    results
        .into_iter()
        .enumerate()
        .map(|(episode, r)| r.map_err(|error| HarnessError::Episode { episode, error }))
        .collect()
}

pub fn run_continuation(cfg: &BackendConfig, run: &ContinuationRun) -> Result<ContinuationOutcome, HarnessError> {
    let backend = cfg.build(std::slice::from_ref(&run.preface))?;
    run_continuation_with(cfg, backend.as_ref(), run)
}

/// Generates `n_episodes` continuations of the preface (sample = episode
/// index) and obtains one function sequence per episode.
pub fn run_continuation_with(
    cfg: &BackendConfig,
    backend: &dyn Backend,
    run: &ContinuationRun,
) -> Result<ContinuationOutcome, HarnessError> {
    if run.n_episodes == 0 {
        return Err(HarnessError::Config("n_episodes must be at least 1".into()));
    }
    if let AnnotationMode::File(paths) = &run.annotation_mode {
        if paths.len() < run.n_episodes {
            return Err(HarnessError::MissingSidecar { episode: paths.len() });
        }
    }
    let request = cfg.request(&run.template, &run.preface.clean_text, run.seed);
    let calls: Vec<_> = (0..run.n_episodes).map(|i| (&request, i as u32)).collect();
    let episodes = episode_results(collect_calls(cfg, backend, &calls)?)?;

    let sequences = match &run.annotation_mode {
        AnnotationMode::File(paths) => paths[..run.n_episodes]
            .iter()
            .enumerate()
            .map(|(episode, path)| read_sidecar(episode, path))
            .collect::<Result<Vec<_>, _>>()?,
        AnnotationMode::Model => {
            let requests: Vec<ChatRequest> = episodes
                .iter()
                .map(|text| {
                    let (clean, _) = parse_inline(text, ParseMode::Lenient).expect("lenient parsing never fails");
                    cfg.request(&run.recognizer, &clean, run.seed)
                })
                .collect();
            let calls: Vec<_> = requests.iter().enumerate().map(|(i, r)| (r, i as u32)).collect();
            episode_results(collect_calls(cfg, backend, &calls)?)?
                .iter()
                .enumerate()
                .map(|(i, out)| FunctionSequence::new(extract_symbols(out)).with_source(format!("episode:{}", i + 1)))
                .collect()
        }
    };
    Ok(ContinuationOutcome { episodes, sequences })
}

fn read_sidecar(episode: usize, path: &PathBuf) -> Result<FunctionSequence, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            HarnessError::MissingSidecar { episode }
        } else {
            HarnessError::Sidecar {
                path: path.clone(),
                message: e.to_string(),
            }
        }
    })?;
    let seqs = parse_sequence_file(&text).map_err(|e| HarnessError::Sidecar {
        path: path.clone(),
        message: e.to_string(),
    })?;
    seqs.into_iter().next().ok_or(HarnessError::MissingSidecar { episode })
}
