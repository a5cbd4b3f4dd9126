use serde_json::json;

use super::Embedder;
use crate::error::{Error, Result};
use crate::llm::{post_json, HttpSettings, API_KEY_ENV};

/// Embedder backed by an OpenAI-compatible `/embeddings` endpoint.
pub struct RemoteEmbedder {
    settings: HttpSettings,
    dimension: usize,
    id: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl RemoteEmbedder {
    /// The credential is read from the environment.
    pub fn new(settings: HttpSettings, dimension: usize) -> Self {
        Self::with_api_key(settings, dimension, std::env::var(API_KEY_ENV).ok())
    }

    pub fn with_api_key(settings: HttpSettings, dimension: usize, api_key: Option<String>) -> Self {
        let id = format!("remote:{}", settings.model);
        let agent = settings.agent();
        Self { settings, dimension, id, api_key, agent }
    }
}

impl Embedder for RemoteEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let body = json!({ "model": self.settings.model, "input": text });
        let value = post_json(&self.agent, &self.settings.url("/embeddings"), self.api_key.as_deref(), &body)
            .map_err(|e| Error::Embedder(e.to_string()))?;
        let data = value
            .pointer("/data/0/embedding")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Embedder("response has no data[0].embedding".into()))?;
        let v: Vec<f32> = data
            .iter()
            .map(|x| x.as_f64().map(|f| f as f32))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Embedder("embedding contains non-numbers".into()))?;
        if v.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: v.len() });
        }
        Ok(v)
    }
}
