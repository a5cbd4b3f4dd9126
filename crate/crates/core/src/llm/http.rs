use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatRequest, LlmClient, LlmError, DEFAULT_TIMEOUT};

/// Environment variable holding the bearer token for remote services.
pub const API_KEY_ENV: &str = "WALKRAG_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    /// Base URL, e.g. `http://localhost:8000/v1`.
    pub endpoint: String,
    pub model: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_secs())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_secs)
    }
}

impl HttpSettings {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), model: model.into(), timeout: DEFAULT_TIMEOUT }
    }

    pub(crate) fn url(&self, path: &str) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with(path) {
            base.to_owned()
        } else {
            format!("{base}{path}")
        }
    }

    pub(crate) fn agent(&self) -> ureq::Agent {
        let config = ureq::Agent::config_builder().timeout_global(Some(self.timeout)).http_status_as_error(false).build();
        ureq::Agent::new_with_config(config)
    }
}

pub(crate) fn post_json(agent: &ureq::Agent, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value, LlmError> {
    let mut req = agent.post(url);
    if let Some(key) = api_key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let mut resp = req.send_json(body).map_err(map_transport)?;
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().map_err(map_transport)?;
    if !(200..300).contains(&status) {
        return Err(LlmError::Status { status, body: text });
    }
    serde_json::from_str(&text).map_err(|e| LlmError::InvalidResponse(e.to_string()))
}

fn map_transport(e: ureq::Error) -> LlmError {
    match e {
        ureq::Error::Timeout(_) => LlmError::Timeout,
        ureq::Error::StatusCode(status) => LlmError::Status { status, body: String::new() },
        ureq::Error::BadUri(u) => LlmError::Config(format!("bad endpoint URI `{u}`")),
        other => LlmError::Transport(other.to_string()),
    }
}

/// OpenAI-compatible `/chat/completions` client.
pub struct HttpChatClient {
    settings: HttpSettings,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpChatClient {
    /// Reads the API key from [`API_KEY_ENV`] if set.
    pub fn new(settings: HttpSettings) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_api_key(settings, api_key)
    }

    pub fn with_api_key(settings: HttpSettings, api_key: Option<String>) -> Self {
        let agent = settings.agent();
        Self { settings, api_key, agent }
    }
}

impl LlmClient for HttpChatClient {
    fn model(&self) -> &str {
        &self.settings.model
    }

    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = json!({
            "model": self.settings.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.human},
            ],
        });
        let url = self.settings.url("/chat/completions");
        let value = post_json(&self.agent, &url, self.api_key.as_deref(), &body)?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| LlmError::InvalidResponse("missing choices[0].message.content".into()))
    }
}


#[cfg(test)]
mod tests {
    use super::testing::serve_once;
    use super::*;

    #[test]
    fn chat_round_trip() {
        let (url, server) = serve_once(200, r#"{"choices":[{"message":{"role":"assistant","content":"Sergio Leone"}}]}"#);
        let client = HttpChatClient::with_api_key(HttpSettings::new(url, "llama"), Some("sk-test".into()));
        let out = client.send(&ChatRequest::new("sys", "who wrote it?")).unwrap();
        assert_eq!(out, "Sergio Leone");
        let raw = server.join().unwrap();
        assert!(raw.starts_with("POST /v1/chat/completions"));
        assert!(raw.to_ascii_lowercase().contains("authorization: bearer sk-test"));
        let body: Value = serde_json::from_str(raw.rsplit("\r\n\r\n").next().unwrap()).unwrap();
        assert_eq!(body["model"], "llama");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"][0]["content"], "sys");
        assert_eq!(body["messages"][1]["role"], "user");
    }

    #[test]
    fn server_error_is_retryable() {
        let (url, server) = serve_once(503, r#"{"error":"busy"}"#);
        let client = HttpChatClient::with_api_key(HttpSettings::new(url, "m"), None);
        let err = client.send(&ChatRequest::new("s", "h")).unwrap_err();
        assert!(matches!(err, LlmError::Status { status: 503, .. }));
        assert!(err.is_retryable());
        server.join().unwrap();
    }

    #[test]
    fn malformed_body() {
        let (url, server) = serve_once(200, r#"{"choices":[]}"#);
        let client = HttpChatClient::with_api_key(HttpSettings::new(url, "m"), None);
        assert!(matches!(client.send(&ChatRequest::new("s", "h")), Err(LlmError::InvalidResponse(_))));
        server.join().unwrap();
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let client = HttpChatClient::with_api_key(HttpSettings::new(format!("http://{addr}"), "m"), None);
        let err = client.send(&ChatRequest::new("s", "h")).unwrap_err();
        assert!(err.is_retryable(), "{err:?}");
    }

    #[test]
    fn url_joining() {
        assert_eq!(HttpSettings::new("http://h/v1/", "m").url("/chat/completions"), "http://h/v1/chat/completions");
        assert_eq!(
            HttpSettings::new("http://h/v1/chat/completions", "m").url("/chat/completions"),
            "http://h/v1/chat/completions"
        );
    }
}
