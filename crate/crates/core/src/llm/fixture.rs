use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError};

/// Normalizes line endings and strips whitespace at the end of each line.
pub fn canonicalize(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut out = String::with_capacity(unified.len());
    for (i, line) in unified.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(line.trim_end_matches([' ', '\t']));
    }
    out
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    model_id: &'a str,
    system: Option<String>,
    user: String,
    temperature: f64,
}

/// Hex SHA-256 of the canonicalized request.
pub fn fixture_key(req: &ChatRequest) -> String {
    let material = KeyMaterial {
        model_id: &req.model_id,
        system: req.system.as_deref().map(canonicalize),
        user: canonicalize(&req.user),
        temperature: req.temperature,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// One recorded exchange as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub request: ChatRequest,
    pub response: ChatResponse,
}

/// A directory of fixtures, one `<key>.json` file per request.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, req: &ChatRequest) -> Result<Option<ChatResponse>, LlmError> {
        let key = fixture_key(req);
        let path = self.path_for(&key);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(LlmError::Fixture { path: path.display().to_string(), message: e.to_string() }),
        };
        let fixture: Fixture = serde_json::from_str(&text)
            .map_err(|e| LlmError::Fixture { path: path.display().to_string(), message: e.to_string() })?;
        if fixture.key != key {
            return Err(LlmError::Fixture {
                path: path.display().to_string(),
                message: format!("stored key {} does not match file name", fixture.key),
            });
        }
        Ok(Some(fixture.response))
    }

    pub fn save(&self, req: &ChatRequest, response: &ChatResponse) -> Result<PathBuf, LlmError> {
        let key = fixture_key(req);
        let fixture = Fixture {
            key: key.clone(),
            request: ChatRequest {
                model_id: req.model_id.clone(),
                system: req.system.as_deref().map(canonicalize),
                user: canonicalize(&req.user),
                temperature: req.temperature,
            },
            response: response.clone(),
        };
        let path = self.path_for(&key);
        let io_err = |e: std::io::Error| LlmError::Fixture { path: path.display().to_string(), message: e.to_string() };
        std::fs::create_dir_all(&self.dir).map_err(io_err)?;
        let mut text = serde_json::to_string_pretty(&fixture).expect("fixture serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(io_err)?;
        Ok(path)
    }
}

/// Answers only from recorded fixtures. A miss is an error.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    store: FixtureStore,
}

impl ReplayBackend {
    pub fn new(store: FixtureStore) -> Self {
        Self { store }
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        self.store.load(req)?.ok_or_else(|| LlmError::FixtureMiss { key: fixture_key(req), digest: req.digest() })
    }
}

/// Forwards to an inner backend and persists every response.
pub struct RecordingBackend<B> {
    inner: B,
    store: FixtureStore,
    write_lock: Mutex<()>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, store: FixtureStore) -> Self {
        Self { inner, store, write_lock: Mutex::new(()) }
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        let response = self.inner.complete(req)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        self.store.save(req, &response)?;
        Ok(response)
    }
}
