use std::sync::atomic::{AtomicUsize, Ordering};

use super::{ChatRequest, LlmClient, LlmError};
use crate::qa::{context_lines, ABSTENTION};

/// Answers with the first context item of an answer prompt, or abstains
/// when the prompt carries no context.
#[derive(Clone, Copy, Debug, Default)]
pub struct EchoClient;

impl LlmClient for EchoClient {
    fn model(&self) -> &str {
        "mock-echo"
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        Ok(context_lines(&request.human).into_iter().next().unwrap_or_else(|| ABSTENTION.to_owned()))
    }
}

/// Always abstains.
#[derive(Clone, Copy, Debug, Default)]
pub struct RefuseClient;

impl LlmClient for RefuseClient {
    fn model(&self) -> &str {
        "mock-refuse"
    }

    fn send(&self, _request: &ChatRequest) -> Result<String, LlmError> {
        Ok(ABSTENTION.to_owned())
    }
}

/// Counts calls made through the wrapped client.
#[derive(Debug, Default)]
pub struct CountingClient<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C> CountingClient<C> {
    pub fn new(inner: C) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<C: LlmClient> LlmClient for CountingClient<C> {
    fn model(&self) -> &str {
        self.inner.model()
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.send(request)
    }
}

/// Client backed by a closure.
pub struct FnClient<F> {
    model: String,
    f: F,
}

impl<F> FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, LlmError> + Send + Sync,
{
    pub fn new(model: impl Into<String>, f: F) -> Self {
        Self { model: model.into(), f }
    }
}

impl<F> LlmClient for FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, LlmError> + Send + Sync,
{
    fn model(&self) -> &str {
        &self.model
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (self.f)(request)
    }
}
