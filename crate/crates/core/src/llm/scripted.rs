use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError, RETRY_INSTRUCTION};

/// Header line that opens every identification prompt.
pub const IDENTIFICATION_MARKER: &str = "### Task: Identify Relevant Nodes for Each Sentence";

/// Canned answers keyed by prompt kind.
///
/// Values may be given as strings (returned verbatim) or as JSON values
/// (returned pretty-printed).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedResponses {
    #[serde(default, deserialize_with = "text_opt")]
    pub identification: Option<String>,
    #[serde(default, deserialize_with = "text_map")]
    pub tasks: BTreeMap<String, String>,
    /// Served instead of `tasks` on the corrective second attempt.
    #[serde(default, deserialize_with = "text_map")]
    pub retry_tasks: BTreeMap<String, String>,
}

fn as_text(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => serde_json::to_string_pretty(&other).expect("value serializes"),
    }
}

fn text_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(Option::<Value>::deserialize(d)?.map(as_text))
}

fn text_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, String>, D::Error> {
    let raw = BTreeMap::<String, Value>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, as_text(v))).collect())
}

impl ScriptedResponses {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let err = |message: String| LlmError::Fixture { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }
}

/// Deterministic stand-in for a model. It routes on the prompt structure
/// and never looks at anything else.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    responses: ScriptedResponses,
    fixed: Option<String>,
}

impl ScriptedBackend {
    pub fn new(responses: ScriptedResponses) -> Self {
        Self { responses, fixed: None }
    }

    /// Answers every request with the same text.
    pub fn fixed(text: impl Into<String>) -> Self {
        Self { responses: ScriptedResponses::default(), fixed: Some(text.into()) }
    }
}

fn task_name(user: &str) -> Option<&str> {
    let mut lines = user.lines();
    while let Some(line) = lines.next() {
        if line.trim() == "### Task Name" {
            return lines.next().map(str::trim);
        }
    }
    None
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        if let Some(text) = &self.fixed {
            return Ok(ChatResponse::text(text.clone()));
        }
        let miss = || LlmError::FixtureMiss { key: "scripted".into(), digest: req.digest() };
        if req.user.contains(IDENTIFICATION_MARKER) {
            return self.responses.identification.clone().map(ChatResponse::text).ok_or_else(miss);
        }
        let name = task_name(&req.user).ok_or_else(miss)?;
        let retry = req.user.ends_with(RETRY_INSTRUCTION);
        let text = if retry {
            self.responses.retry_tasks.get(name).or_else(|| self.responses.tasks.get(name))
        } else {
            self.responses.tasks.get(name)
        };
        text.cloned().map(ChatResponse::text).ok_or_else(miss)
    }
}
