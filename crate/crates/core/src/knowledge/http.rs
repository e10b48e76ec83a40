use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Answer, BackendError, KnowledgeBackend, Query};

#[derive(Serialize)]
struct GenerateRequest<'a> {
    subject: &'a str,
    relation: &'a str,
    decoding: &'a serde_json::Value,
}

#[derive(Deserialize)]
struct GenerateResponse {
    inference: String,
}

/// Client for a model server exposing `POST {base_url}/generate`.
///
/// The request body is `{"subject", "relation", "decoding"}` where
/// `decoding` is passed through untouched; the reply is `{"inference"}`.
/// Connection errors and any status >= 400 are transient failures.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    decoding: serde_json::Value,
}

impl HttpBackend {
    pub fn new(base_url: &str, decoding: serde_json::Value, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(timeout)
            .max_idle_connections_per_host(64)
            .build();
        Self {
            agent,
            endpoint: format!("{}/generate", base_url.trim_end_matches('/')),
            decoding,
        }
    }
}

impl KnowledgeBackend for HttpBackend {
    fn label(&self) -> &str {
        "http"
    }

    fn query(&self, query: &Query) -> Result<Answer, BackendError> {
        let body = GenerateRequest {
            subject: &query.subject,
            relation: &query.surface_id,
            decoding: &self.decoding,
        };
        let resp = match self.agent.post(&self.endpoint).send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => {
                return Err(BackendError::Transient(format!("HTTP {code}")))
            }
            Err(e) => return Err(BackendError::Transient(e.to_string())),
        };
        let parsed: GenerateResponse = resp
            .into_json()
            .map_err(|e| BackendError::Fatal(format!("malformed response: {e}")))?;
        Ok(Answer {
            text: parsed.inference,
            cached: false,
        })
    }
}
