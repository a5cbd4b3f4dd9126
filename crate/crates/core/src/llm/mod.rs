//! Chat-completion client abstraction.
//!
//! Everything that talks to a language model goes through [`LlmClient`]: one
//! system text, one human text, a temperature, one response string. The
//! HTTP client speaks the OpenAI-compatible chat protocol; the mocks make the
//! full pipeline runnable offline.

mod http;
mod mock;

use std::time::Duration;

pub use http::{HttpChatClient, HttpSettings, API_KEY_ENV};
pub(crate) use http::post_json;
#[cfg(test)]
pub(crate) use http::testing;
pub use mock::{CountingClient, EchoClient, FnClient, RefuseClient};

/// Default sampling temperature for every request.
pub const DEFAULT_TEMPERATURE: f32 = 0.0;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Clone, Debug, PartialEq)]
pub struct ChatRequest {
    pub system: String,
    pub human: String,
    pub temperature: f32,
}

impl ChatRequest {
    pub fn new(system: impl Into<String>, human: impl Into<String>) -> Self {
        Self { system: system.into(), human: human.into(), temperature: DEFAULT_TEMPERATURE }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("service returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    InvalidResponse(String),
    #[error("client misconfigured: {0}")]
    Config(String),
}

impl LlmError {
    /// Transient failures that a later attempt may not hit.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Timeout | LlmError::Transport(_) => true,
            LlmError::Status { status, .. } => *status == 429 || *status >= 500,
            LlmError::InvalidResponse(_) | LlmError::Config(_) => false,
        }
    }
}

/// A chat model. Implementations must be usable from many threads and must
/// not alter the prompts they are given.
pub trait LlmClient: Send + Sync {
    fn model(&self) -> &str;

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

impl<C: LlmClient + ?Sized> LlmClient for &C {
    fn model(&self) -> &str {
        (**self).model()
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send(request)
    }
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn model(&self) -> &str {
        (**self).model()
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retryable_classification() {
        assert!(LlmError::Timeout.is_retryable());
        assert!(LlmError::Status { status: 503, body: String::new() }.is_retryable());
        assert!(!LlmError::Status { status: 401, body: String::new() }.is_retryable());
        assert!(!LlmError::Config("x".into()).is_retryable());
    }

    #[test]
    fn requests_default_to_zero_temperature() {
        assert_eq!(ChatRequest::new("s", "h").temperature, 0.0);
    }
}
