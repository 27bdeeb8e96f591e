use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError, Usage};

const MAX_ATTEMPTS: u32 = 4;

/// OpenAI-compatible chat-completions client.
pub struct HttpBackend {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(180))
            .build()
            .map_err(|e| LlmError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { endpoint: endpoint.into(), api_key: api_key.into(), client })
    }

    fn body(req: &ChatRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &req.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": req.user}));
        json!({
            "model": req.model_id,
            "temperature": req.temperature,
            "messages": messages,
        })
    }

    fn once(&self, body: &Value) -> Result<ChatResponse, Attempt> {
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Attempt::Retry(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Retry(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(LlmError::Http { status: status.as_u16(), body: text }));
        }
        parse_completion(&text).map_err(Attempt::Fatal)
    }
}

enum Attempt {
    Retry(String),
    Fatal(LlmError),
}

fn parse_completion(text: &str) -> Result<ChatResponse, LlmError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::MalformedResponse("missing choices[0].message.content".into()))?;
    let usage = v.get("usage").map(|u| Usage {
        prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    });
    Ok(ChatResponse { text: content.to_string(), usage })
}

impl ChatBackend for HttpBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        let body = Self::body(req);
        let mut last = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            match self.once(&body) {
                Ok(resp) => return Ok(resp),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    log::warn!("chat request {} failed (attempt {attempt}): {msg}", req.digest());
                    last = msg;
                    if attempt < MAX_ATTEMPTS {
                        std::thread::sleep(Duration::from_millis(500 << attempt));
                    }
                }
            }
        }
        Err(LlmError::Transient { attempts: MAX_ATTEMPTS, message: last })
    }
}
