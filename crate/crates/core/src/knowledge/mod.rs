//! Querying a commonsense knowledge model for inferences.
//!
//! A prompt is the subject sentence followed by the relation's surface id.
//! Backends turn a [`Query`] into raw inference text; [`generate`] adds the
//! retry policy and the filter that rejects empty and `none` answers, and
//! [`generate_batch`] runs many queries with bounded concurrency while
//! returning results in request order.

mod cache;
mod http;
mod oracle;
mod relation;

pub use cache::{CacheEntry, CachedBackend, InferenceCache};
pub use http::HttpBackend;
pub use oracle::OracleBackend;
pub use relation::{Relation, RelationSet, RelationSetError};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::normalize;

/// `subject + " " + surface_id`.
pub fn format_prompt(subject: &str, surface_id: &str) -> String {
    let mut p = String::with_capacity(subject.len() + surface_id.len() + 1);
    p.push_str(subject);
    p.push(' ');
    p.push_str(surface_id);
    p
}

/// One request to a knowledge backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub subject_id: u64,
    pub subject: String,
    pub relation: Relation,
    pub surface_id: String,
}

impl Query {
    pub fn new(subject_id: u64, subject: &str, relation: Relation, relations: &RelationSet) -> Self {
        Self {
            subject_id,
            subject: subject.to_string(),
            relation,
            surface_id: relations.surface(relation).to_string(),
        }
    }

    pub fn prompt(&self) -> String {
        format_prompt(&self.subject, &self.surface_id)
    }
}

/// Raw backend output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub text: String,
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    /// Worth retrying: connection failures, HTTP status >= 400.
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend failure: {0}")]
    Fatal(String),
}

pub trait KnowledgeBackend: Send + Sync {
    /// Short label recorded on every inference.
    fn label(&self) -> &str;
    fn query(&self, query: &Query) -> Result<Answer, BackendError>;
}

impl<B: KnowledgeBackend + ?Sized> KnowledgeBackend for Box<B> {
    fn label(&self) -> &str {
        (**self).label()
    }
    fn query(&self, query: &Query) -> Result<Answer, BackendError> {
        (**self).query(query)
    }
}

impl<B: KnowledgeBackend + ?Sized> KnowledgeBackend for std::sync::Arc<B> {
    fn label(&self) -> &str {
        (**self).label()
    }
    fn query(&self, query: &Query) -> Result<Answer, BackendError> {
        (**self).query(query)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inference {
    pub text: String,
    pub relation: Relation,
    pub subject_id: u64,
    pub backend: String,
    pub cached: bool,
}

/// Result of one successful backend round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Inference(Inference),
    /// The answer was empty, `none`, or unusable; the caller should resample.
    Filtered { raw: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("knowledge backend failed for sentence {subject_id} / {relation} after {attempts} attempt(s): {source}")]
pub struct KnowledgeError {
    pub subject_id: u64,
    pub relation: Relation,
    pub attempts: u32,
    pub source: BackendError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`.
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(retry.saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateOptions {
    pub retry: RetryPolicy,
    /// Answers containing this substring are filtered.
    pub sentinel_marker: Option<String>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            retry: RetryPolicy::default(),
            sentinel_marker: Some("<extra_id_".to_string()),
        }
    }
}

/// Normalized inference text, or `None` when the answer must be filtered.
pub fn clean_inference(raw: &str, sentinel_marker: Option<&str>) -> Option<String> {
    let text = normalize(raw);
    if text.is_empty() || text.eq_ignore_ascii_case("none") {
        return None;
    }
    if sentinel_marker.is_some_and(|m| text.contains(m)) {
        return None;
    }
    Some(text)
}

/// Query the backend, retrying transient failures with exponential backoff.
pub fn generate(
    query: &Query,
    backend: &dyn KnowledgeBackend,
    opts: &GenerateOptions,
) -> Result<Generated, KnowledgeError> {
    let attempts = opts.retry.attempts.max(1);
    let mut attempt = 0;
    let answer = loop {
        attempt += 1;
        match backend.query(query) {
            Ok(a) => break a,
            Err(e @ BackendError::Transient(_)) if attempt < attempts => {
                tracing::debug!(subject_id = query.subject_id, attempt, error = %e, "retrying");
                std::thread::sleep(opts.retry.delay(attempt));
            }
            Err(source) => {
                return Err(KnowledgeError {
                    subject_id: query.subject_id,
                    relation: query.relation,
                    attempts: attempt,
                    source,
                })
            }
        }
    };
    Ok(match clean_inference(&answer.text, opts.sentinel_marker.as_deref()) {
        Some(text) => Generated::Inference(Inference {
            text,
            relation: query.relation,
            subject_id: query.subject_id,
            backend: backend.label().to_string(),
            cached: answer.cached,
        }),
        None => Generated::Filtered { raw: answer.text },
    })
}

/// Run all queries with at most `parallelism` in flight. Output position `i`
/// holds the result for `queries[i]`; a failing item does not stop the rest.
pub fn generate_batch(
    queries: &[Query],
    backend: &dyn KnowledgeBackend,
    parallelism: usize,
    opts: &GenerateOptions,
) -> Vec<Result<Generated, KnowledgeError>> {
    let workers = parallelism.max(1).min(queries.len().max(1));
    if workers == 1 {
        return queries.iter().map(|q| generate(q, backend, opts)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Generated, KnowledgeError>>>> =
        queries.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(q) = queries.get(i) else { break };
                let r = generate(q, backend, opts);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .unwrap_or_else(|e| e.into_inner())
                .expect("every slot is filled before the scope ends")
        })
        .collect()
}
