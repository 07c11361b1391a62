//! Model backends: a deterministic mock, a replay store and an HTTP client.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotation::{emit_inline, AnnotatedSegment};
use crate::taxonomy::{FunctionSymbol, FUNCTION_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no replay fixture for request {0}")]
    ReplayMiss(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: impl Into<String>, content: impl Into<String>) -> Self {
        ChatMessage {
            role: role.into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: Option<String>,
    pub messages: Vec<ChatMessage>,
    pub seed: Option<u64>,
    /// Decoding parameters passed through untouched.
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl ChatRequest {
    pub fn user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == "user")
            .map_or("", |m| m.content.as_str())
    }
}

/// SHA-256 of the request as canonical JSON (sorted keys), optionally with
/// the sample index.
pub fn request_digest(req: &ChatRequest, sample: Option<u32>) -> String {
    let value = json!({ "request": req, "sample": sample });
    let canonical = serde_json::to_string(&value).expect("request serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub trait Backend: Send + Sync {
    /// Completes one request; `sample` distinguishes repeated draws.
    fn complete(&self, req: &ChatRequest, sample: u32) -> Result<String, BackendError>;

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub enum MockMode {
    /// Answers with the gold annotation of a known text, echoes anything else.
    Echo,
    /// Like `Echo`, replacing each gold symbol with probability `p`.
    Noisy(f64),
    /// Answers `sample` with `responses[sample % len]`.
    Scripted(Vec<String>),
    Timeout,
    Unavailable,
}

impl std::str::FromStr for MockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "echo" => Ok(MockMode::Echo),
            "timeout" => Ok(MockMode::Timeout),
            "unavailable" => Ok(MockMode::Unavailable),
            other => match other.strip_prefix("noisy:").map(str::parse::<f64>) {
                Some(Ok(p)) if (0.0..=1.0).contains(&p) => Ok(MockMode::Noisy(p)),
                _ => Err(format!("unknown mock mode {other:?} (echo, noisy:<p>, timeout, unavailable)")),
            },
        }
    }
}

pub struct MockBackend {
    mode: MockMode,
    gold: HashMap<String, AnnotatedSegment>,
}

impl MockBackend {
    pub fn new(mode: MockMode, gold: &[AnnotatedSegment]) -> Self {
        MockBackend {
            mode,
            gold: gold.iter().map(|s| (s.clean_text.clone(), s.clone())).collect(),
        }
    }

    fn noisy(&self, seg: &AnnotatedSegment, p: f64, req: &ChatRequest, sample: u32) -> String {
        let digest = Sha256::digest(seg.clean_text.as_bytes());
        let mut key = [0u8; 8];
        key.copy_from_slice(&digest[..8]);
        let seed = req.seed.unwrap_or(0) ^ u64::from_le_bytes(key) ^ u64::from(sample).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = seg.clone();
        for a in &mut out.annotations {
            if rng.random_bool(p) {
                a.symbol = FunctionSymbol::ALL[rng.random_range(0..FUNCTION_COUNT)];
            }
        }
        emit_inline(&out)
    }
}

impl Backend for MockBackend {
    fn complete(&self, req: &ChatRequest, sample: u32) -> Result<String, BackendError> {
        let text = req.user_text();
        match &self.mode {
            MockMode::Timeout => Err(BackendError::Timeout),
            MockMode::Unavailable => Err(BackendError::Unreachable("mock backend unavailable".into())),
            MockMode::Scripted(responses) if responses.is_empty() => {
                Err(BackendError::Malformed("no scripted responses".into()))
            }
            MockMode::Scripted(responses) => Ok(responses[sample as usize % responses.len()].clone()),
            MockMode::Echo => Ok(self.gold.get(text).map_or_else(|| text.to_string(), emit_inline)),
            MockMode::Noisy(p) => Ok(self
                .gold
                .get(text)
                .map_or_else(|| text.to_string(), |seg| self.noisy(seg, *p, req, sample))),
        }
    }

    fn describe(&self) -> String {
        match &self.mode {
            MockMode::Echo => "mock:echo".into(),
            MockMode::Noisy(p) => format!("mock:noisy:{p}"),
            MockMode::Scripted(r) => format!("mock:scripted:{}", r.len()),
            MockMode::Timeout => "mock:timeout".into(),
            MockMode::Unavailable => "mock:unavailable".into(),
        }
    }
}

/// One line of a replay fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub request_digest: String,
    pub response_text: String,
}

impl ReplayRecord {
    pub fn for_request(req: &ChatRequest, sample: Option<u32>, response: impl Into<String>) -> Self {
        ReplayRecord {
            request_digest: request_digest(req, sample),
            response_text: response.into(),
        }
    }
}

/// Serves recorded responses keyed by request digest. A digest that
/// includes the sample index takes precedence over one without.
pub struct ReplayBackend {
    responses: HashMap<String, String>,
    source: String,
}

impl ReplayBackend {
    pub fn from_records(records: impl IntoIterator<Item = ReplayRecord>, source: impl Into<String>) -> Self {
        ReplayBackend {
            responses: records
                .into_iter()
                .map(|r| (r.request_digest, r.response_text))
                .collect(),
            source: source.into(),
        }
    }

    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self, String> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: ReplayRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            records.push(r);
        }
        Ok(Self::from_records(records, source))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn complete(&self, req: &ChatRequest, sample: u32) -> Result<String, BackendError> {
        let specific = request_digest(req, Some(sample));
        if let Some(r) = self.responses.get(&specific) {
            return Ok(r.clone());
        }
        self.responses
            .get(&request_digest(req, None))
            .cloned()
            .ok_or(BackendError::ReplayMiss(specific))
    }

    fn describe(&self) -> String {
        format!("replay:{}", self.source)
    }
}

pub const DEFAULT_RESPONSE_PATH: &str = "/choices/0/message/content";

/// Chat-completion style endpoint reached with one POST per request.
pub struct HttpBackend {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// JSON pointer to the response text.
    pub response_path: String,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            response_path: DEFAULT_RESPONSE_PATH.to_string(),
            agent,
        }
    }

    /// Request body; the seed is offset by the sample index.
    pub fn payload(&self, req: &ChatRequest, sample: u32) -> Value {
        let mut body = req.params.clone();
        body.insert("model".into(), json!(req.model.as_deref().unwrap_or(&self.model)));
        body.insert("messages".into(), json!(req.messages));
        if let Some(seed) = req.seed {
            body.insert("seed".into(), json!(seed.wrapping_add(u64::from(sample))));
        }
        Value::Object(body)
    }
}

fn map_ureq(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::StatusCode(code) => BackendError::Status(code),
        ureq::Error::HostNotFound | ureq::Error::ConnectionFailed | ureq::Error::Io(_) | ureq::Error::BadUri(_) => {
            BackendError::Unreachable(e.to_string())
        }
        ureq::Error::Json(e) => BackendError::Malformed(e.to_string()),
        other => BackendError::Unreachable(other.to_string()),
    }
}

impl Backend for HttpBackend {
    fn complete(&self, req: &ChatRequest, sample: u32) -> Result<String, BackendError> {
        let body = self.payload(req, sample);
        let mut call = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = call.send_json(&body).map_err(map_ureq)?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(BackendError::Status(status));
        }
        let value: Value = resp.body_mut().read_json().map_err(map_ureq)?;
        value
            .pointer(&self.response_path)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed(format!("no string at {}", self.response_path)))
    }

    fn describe(&self) -> String {
        format!("http:{}:{}", self.endpoint, self.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{Genre, ParseMode};

    fn req(text: &str) -> ChatRequest {
        ChatRequest {
            model: None,
            messages: vec![ChatMessage::new("system", "label"), ChatMessage::new("user", text)],
            seed: Some(1),
            params: Map::new(),
        }
    }

    #[test]
    fn digest_is_stable_and_sample_sensitive() {
        let r = req("x");
        assert_eq!(request_digest(&r, Some(0)), request_digest(&r.clone(), Some(0)));
        assert_ne!(request_digest(&r, Some(0)), request_digest(&r, Some(1)));
        assert_ne!(request_digest(&r, Some(0)), request_digest(&r, None));
        assert_eq!(request_digest(&r, None).len(), 64);
    }

    #[test]
    fn mock_modes() {
        let seg = AnnotatedSegment::from_inline("s", Genre::Fantasy, "走了(K)。", ParseMode::Strict).unwrap();
        let echo = MockBackend::new(MockMode::Echo, std::slice::from_ref(&seg));
        assert_eq!(echo.complete(&req("走了。"), 0).unwrap(), "走了(K)。");
        assert_eq!(echo.complete(&req("other"), 0).unwrap(), "other");
        let noisy = MockBackend::new(MockMode::Noisy(1.0), &[seg]);
        assert_eq!(noisy.complete(&req("走了。"), 3), noisy.complete(&req("走了。"), 3));
        let script = MockBackend::new(MockMode::Scripted(vec!["a".into(), "b".into()]), &[]);
        assert_eq!(script.complete(&req(""), 3).unwrap(), "b");
        assert_eq!(MockBackend::new(MockMode::Timeout, &[]).complete(&req(""), 0), Err(BackendError::Timeout));
        assert_eq!("noisy:0.25".parse::<MockMode>(), Ok(MockMode::Noisy(0.25)));
        assert!("noisy:2".parse::<MockMode>().is_err());
    }

    #[test]
    fn replay_lookup_order() {
        let r = req("x");
        let replay = ReplayBackend::from_records(
            [
                ReplayRecord::for_request(&r, None, "any"),
                ReplayRecord::for_request(&r, Some(2), "second"),
            ],
            "mem",
        );
        assert_eq!(replay.complete(&r, 2).unwrap(), "second");
        assert_eq!(replay.complete(&r, 0).unwrap(), "any");
        assert!(matches!(replay.complete(&req("y"), 0), Err(BackendError::ReplayMiss(_))));
        let line = serde_json::to_string(&ReplayRecord::for_request(&r, Some(0), "z")).unwrap();
        let parsed = ReplayBackend::parse(&line, "file").unwrap();
        assert_eq!(parsed.complete(&r, 0).unwrap(), "z");
        assert!(ReplayBackend::parse("{", "bad").is_err());
    }

    #[test]
    fn http_payload_and_unreachable() {
        let mut r = req("x");
        r.params.insert("temperature".into(), json!(0.7));
        let http = HttpBackend::new("http://127.0.0.1:9/v1/chat", "m", None, Duration::from_millis(500));
        let body = http.payload(&r, 2);
        assert_eq!(body["seed"], 3);
        assert_eq!(body["model"], "m");
        assert_eq!(body["temperature"], 0.7);
        assert_eq!(body["messages"][1]["content"], "x");
        assert!(matches!(
            http.complete(&r, 0),
            Err(BackendError::Unreachable(_) | BackendError::Timeout)
        ));
    }
}
