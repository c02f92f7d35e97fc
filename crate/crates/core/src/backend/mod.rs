//! Text-completion backends.
//!
//! [`Backend`] is the only thing the chain engine talks to. Two
//! implementations exist: [`RemoteBackend`] (JSON over HTTP with retry) and
//! [`MockBackend`] (scripted, deterministic, for tests and dry runs).

mod mock;
mod remote;
mod transcript;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{MockBackend, MockReply, MockScript};
pub use remote::{redact_url, RemoteBackend, RemoteConfig, RetryPolicy, WireFormat};
pub use transcript::RotatingLog;

pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const DEFAULT_MAX_NEW_TOKENS: u32 = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_new_tokens: u32,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stop: Vec<String>,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, params: &GenerationParams) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            max_new_tokens: params.max_new_tokens,
            temperature: params.temperature,
            stop: params.stop.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.prompt.is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_new_tokens must be positive".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature must be a nonnegative number, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Generation-time settings shared by every request of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub max_new_tokens: u32,
    pub temperature: f64,
    pub stop: Vec<String>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            temperature: DEFAULT_TEMPERATURE,
            stop: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("HTTP {status} from {url}: {body}")]
    Http { status: u16, url: String, body: String },

    #[error("cannot reach {url}: {detail}")]
    Unreachable { url: String, detail: String },

    #[error("transport error talking to {url}: {detail}")]
    Transport { url: String, detail: String },

    #[error("protocol error from {url}: {detail}")]
    Protocol { url: String, detail: String },

    #[error("mock script exhausted after {calls} calls")]
    ScriptExhausted { calls: usize },

    #[error("mock script has no rule matching prompt starting {prompt_head:?}")]
    NoRuleMatched { prompt_head: String },

    #[error("scripted failure (status {status}): {message}")]
    Scripted { status: u16, message: String },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Whether retrying the same request may succeed.
    pub fn is_retriable(&self) -> bool {
        match self {
            BackendError::Http { status, .. } | BackendError::Scripted { status, .. } => {
                matches!(status, 408 | 429 | 500..=599)
            }
            BackendError::Unreachable { .. } | BackendError::Transport { .. } => true,
            _ => false,
        }
    }
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;

    /// Short description for logs; never includes secrets.
    fn describe(&self) -> String;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Where completions come from. Remote descriptors name the environment
/// variable holding the credential, never the credential itself.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendDescriptor {
    Remote(RemoteConfig),
    Mock {
        /// JSON script file; see [`MockScript`].
        script: PathBuf,
    },
}

impl fmt::Debug for BackendDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl BackendDescriptor {
    pub fn describe(&self) -> String {
        match self {
            BackendDescriptor::Remote(cfg) => format!(
                "remote {} ({:?}, auth from {})",
                redact_url(&cfg.endpoint),
                cfg.wire,
                cfg.auth_env.as_deref().unwrap_or("<none>")
            ),
            BackendDescriptor::Mock { script } => format!("mock {}", script.display()),
        }
    }

    /// Resolves relative script paths against `base`.
    pub fn rebase(&mut self, base: &Path) {
        if let BackendDescriptor::Mock { script } = self {
            if script.is_relative() {
                *script = base.join(&*script);
            }
        }
    }

    pub fn connect(&self) -> Result<Arc<dyn Backend>, BackendError> {
        Ok(match self {
            BackendDescriptor::Remote(cfg) => Arc::new(RemoteBackend::new(cfg.clone())?),
            BackendDescriptor::Mock { script } => Arc::new(MockBackend::new(MockScript::load(script)?)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Health {
    Healthy { detail: String },
}

/// Remote: one single-attempt, one-token request. Mock: always healthy.
pub fn health_check(descriptor: &BackendDescriptor) -> Result<Health, BackendError> {
    match descriptor {
        BackendDescriptor::Mock { script } => {
            MockScript::load(script)?;
            Ok(Health::Healthy {
                detail: "mock backend".into(),
            })
        }
        BackendDescriptor::Remote(cfg) => {
            let backend = RemoteBackend::new(cfg.clone())?;
            backend.probe()?;
            Ok(Health::Healthy {
                detail: format!("reachable: {}", redact_url(&cfg.endpoint)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        let params = GenerationParams::default();
        assert_eq!(params.temperature, 1.0);
        assert!(CompletionRequest::new("", &params).validate().is_err());
        assert!(CompletionRequest::new("x", &params).validate().is_ok());
        let mut bad = CompletionRequest::new("x", &params);
        bad.temperature = -1.0;
        assert!(bad.validate().is_err());
        bad.temperature = 0.0;
        bad.max_new_tokens = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn retriable_classes() {
        let http = |status| BackendError::Http { status, url: String::new(), body: String::new() };
        assert!(http(503).is_retriable());
        assert!(http(429).is_retriable());
        assert!(!http(400).is_retriable());
        assert!(!BackendError::Protocol { url: String::new(), detail: String::new() }.is_retriable());
        assert!(!BackendError::ScriptExhausted { calls: 1 }.is_retriable());
    }

    #[test]
    fn mock_descriptor_is_healthy() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        std::fs::write(&path, r#"{"mode": "ordered", "responses": ["joy"]}"#).unwrap();
        let d = BackendDescriptor::Mock { script: path };
        assert!(matches!(health_check(&d), Ok(Health::Healthy { .. })));
    }

    #[test]
    fn descriptor_from_toml() {
        let d: BackendDescriptor = toml::from_str(
            r#"
            kind = "remote"
            endpoint = "http://localhost:9/generate"
            auth_env = "MY_TOKEN"
            "#,
        )
        .unwrap();
        let text = format!("{d:?}");
        assert!(text.contains("MY_TOKEN"));
        let BackendDescriptor::Remote(cfg) = d else { panic!() };
        assert_eq!(cfg.retry.max_attempts, 3);
    }
}
