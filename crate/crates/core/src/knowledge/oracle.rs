use super::{Answer, BackendError, KnowledgeBackend, Query};
use crate::concept::{tokenize, BaselineTagger};

/// Deterministic stand-in for the neural model:
/// `"oracle " + surface_id + ": " + up to three concept tokens of the subject`,
/// falling back to the first three tokens when the subject has no concepts.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleBackend;

impl OracleBackend {
    pub fn answer(subject: &str, surface_id: &str) -> String {
        let tokens = tokenize(subject);
        let tagger = BaselineTagger;
        let mut picked: Vec<&str> = tokens
            .iter()
            .enumerate()
            .filter(|(i, t)| tagger.is_concept(t, *i))
            .map(|(_, t)| t.as_str())
            .take(3)
            .collect();
        if picked.is_empty() {
            picked = tokens.iter().take(3).map(String::as_str).collect();
        }
        format!("oracle {surface_id}: {}", picked.join(" "))
    }
}

impl KnowledgeBackend for OracleBackend {
    fn label(&self) -> &str {
        "oracle"
    }

    fn query(&self, query: &Query) -> Result<Answer, BackendError> {
        Ok(Answer {
            text: Self::answer(&query.subject, &query.surface_id),
            cached: false,
        })
    }
}
