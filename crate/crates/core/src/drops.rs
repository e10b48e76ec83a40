use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Why a sentence produced no tuple, or a tuple produced no
/// relation-prediction example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// The backend answered empty/`none` for a relation and for its resample.
    FilteredInference,
    /// The backend kept failing after retries.
    BackendFailure,
    /// Not enough distinct same-relation inferences from other sentences.
    PoolExhausted,
    /// The primary and spare inferences are the same string.
    DuplicateOptions,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::FilteredInference => "filtered_inference",
            DropReason::BackendFailure => "backend_failure",
            DropReason::PoolExhausted => "pool_exhausted",
            DropReason::DuplicateOptions => "duplicate_options",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub sentence_id: u64,
    pub stage: String,
    pub reason: DropReason,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

pub fn histogram<'a>(drops: impl IntoIterator<Item = &'a DropRecord>) -> BTreeMap<String, u64> {
    let mut h = BTreeMap::new();
    for d in drops {
        *h.entry(d.reason.as_str().to_string()).or_insert(0) += 1;
    }
    h
}
