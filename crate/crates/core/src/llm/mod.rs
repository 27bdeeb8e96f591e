//! The single chokepoint for language-model calls.
//!
//! Every stage talks to a [`ChatBackend`]. Three backends exist: a live
//! chat-completions client ([`HttpBackend`]), a fixture store that replays
//! recorded responses ([`ReplayBackend`]), and a recorder that wraps any
//! other backend and persists what it returns ([`RecordingBackend`]).

mod fixture;
mod http;
mod scripted;
mod structured;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{canonicalize, fixture_key, Fixture, FixtureStore, RecordingBackend, ReplayBackend};
pub use http::HttpBackend;
pub use scripted::{ScriptedBackend, ScriptedResponses, IDENTIFICATION_MARKER};
pub use structured::parse_structured;

/// Environment variable holding the API credential for the live backend.
pub const API_KEY_ENV: &str = "ROSTER_MILP_API_KEY";
/// Environment variable consulted when no endpoint is configured explicitly.
pub const ENDPOINT_ENV: &str = "ROSTER_MILP_ENDPOINT";
/// Appended to a prompt when the first completion could not be parsed.
pub const RETRY_INSTRUCTION: &str = "\n\nRespond with only the JSON object.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    #[serde(default)]
    pub system: Option<String>,
    pub user: String,
    pub temperature: f64,
}

impl ChatRequest {
    /// A deterministic (temperature zero) request.
    pub fn new(model_id: impl Into<String>, system: Option<String>, user: impl Into<String>) -> Self {
        Self { model_id: model_id.into(), system, user: user.into(), temperature: 0.0 }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.user.trim().is_empty() {
            return Err(LlmError::InvalidRequest("user message is empty".into()));
        }
        if self.temperature != 0.0 {
            return Err(LlmError::InvalidRequest(format!("temperature must be 0.0, got {}", self.temperature)));
        }
        Ok(())
    }

    /// Same request with `extra` appended to the user message.
    pub fn with_appended(&self, extra: &str) -> Self {
        let mut next = self.clone();
        next.user.push_str(extra);
        next
    }

    /// Short human-readable identification of the request for diagnostics.
    pub fn digest(&self) -> String {
        let mut lines = self.user.lines();
        let mut head = String::new();
        while let Some(line) = lines.next() {
            let line = line.trim();
            if line == "### Task Name" {
                if let Some(name) = lines.next() {
                    head = format!("task `{}`", name.trim());
                }
                break;
            }
            if head.is_empty() && !line.is_empty() {
                head = line.chars().take(80).collect();
            }
        }
        format!("{} [{}]", head, self.model_id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

impl ChatResponse {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), usage: None }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no fixture for request {digest} (key {key})")]
    FixtureMiss { key: String, digest: String },
    #[error("fixture store error at {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transient { attempts: u32, message: String },
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    MalformedResponse(String),
    #[error("could not extract a JSON object from the model output: {raw:?}")]
    Parse { raw: String },
    #[error("model output rejected after {attempts} attempt(s): {reason}")]
    Rejected { attempts: u32, reason: String, raw: String },
    #[error("configuration error: {0}")]
    Config(String),
}

/// A parsed and accepted completion.
#[derive(Debug, Clone)]
pub struct Structured<T> {
    pub value: T,
    /// Fixture key of the request whose answer was accepted.
    pub key: String,
    pub attempts: u32,
}

/// Asks for a JSON object and runs `accept` on it. If the output cannot be
/// parsed or is rejected, the request is repeated once with
/// [`RETRY_INSTRUCTION`] appended.
pub fn complete_structured<T>(
    backend: &dyn ChatBackend,
    req: &ChatRequest,
    mut accept: impl FnMut(serde_json::Value) -> Result<T, String>,
) -> Result<Structured<T>, LlmError> {
    let retry = req.with_appended(RETRY_INSTRUCTION);
    let mut failure = None;
    for (attempt, request) in [req, &retry].into_iter().enumerate() {
        let attempts = attempt as u32 + 1;
        let response = backend.complete(request)?;
        let outcome =
            parse_structured(&response.text).map_err(|_| "no JSON object found".to_string()).and_then(&mut accept);
        match outcome {
            Ok(value) => return Ok(Structured { value, key: fixture_key(request), attempts }),
            Err(reason) => {
                log::warn!("attempt {attempts} for {} rejected: {reason}", request.digest());
                failure = Some(LlmError::Rejected { attempts, reason, raw: response.text });
            }
        }
    }
    Err(failure.expect("at least one attempt ran"))
}

/// Anything that can answer a chat request.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(req)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    Record,
    Replay,
}

impl fmt::Display for BackendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendMode::Live => "live",
            BackendMode::Record => "record",
            BackendMode::Replay => "replay",
        })
    }
}

impl std::str::FromStr for BackendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BackendMode::Live),
            "record" => Ok(BackendMode::Record),
            "replay" => Ok(BackendMode::Replay),
            other => Err(format!("unknown backend mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub mode: BackendMode,
    pub endpoint: Option<String>,
    pub model_id: String,
    pub fixture_dir: Option<PathBuf>,
}

impl GatewayConfig {
    pub fn replay(model_id: impl Into<String>, fixture_dir: impl Into<PathBuf>) -> Self {
        Self {
            mode: BackendMode::Replay,
            endpoint: None,
            model_id: model_id.into(),
            fixture_dir: Some(fixture_dir.into()),
        }
    }

    /// Builds the configured backend. Live and record modes need an endpoint
    /// and the credential in [`API_KEY_ENV`]; replay and record modes need a
    /// fixture directory.
    pub fn build(&self) -> Result<Box<dyn ChatBackend>, LlmError> {
        let fixtures = || {
            self.fixture_dir
                .clone()
                .ok_or_else(|| LlmError::Config(format!("{} mode requires a fixture directory", self.mode)))
        };
        match self.mode {
            BackendMode::Replay => {
                let dir = fixtures()?;
                if !dir.is_dir() {
                    return Err(LlmError::Config(format!("fixture directory {} does not exist", dir.display())));
                }
                Ok(Box::new(ReplayBackend::new(FixtureStore::new(dir))))
            }
            BackendMode::Live => Ok(Box::new(self.http()?)),
            BackendMode::Record => {
                let dir = fixtures()?;
                Ok(Box::new(RecordingBackend::new(self.http()?, FixtureStore::new(dir))))
            }
        }
    }

    fn http(&self) -> Result<HttpBackend, LlmError> {
        let endpoint = self
            .endpoint
            .clone()
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .ok_or_else(|| LlmError::Config(format!("no endpoint configured (flag or {ENDPOINT_ENV})")))?;
        let key = std::env::var(API_KEY_ENV).map_err(|_| LlmError::Config(format!("{API_KEY_ENV} is not set")))?;
        HttpBackend::new(endpoint, key)
    }
}
