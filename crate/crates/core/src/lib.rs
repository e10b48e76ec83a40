//! Compile raw text and a queryable commonsense knowledge model into two
//! self-supervised training sets: commonsense text infilling (span
//! corruption over `subject relation inference` tuples) and commonsense
//! relation prediction (four-way multiple choice with provenance-controlled
//! distractors).
//!
//! The stages are usable on their own and are chained by [`pipeline`]:
//!
//! 1. [`corpus`] segments, normalizes, deduplicates and samples sentences.
//! 2. [`knowledge`] queries a backend for inferences.
//! 3. [`tuples`] assigns two relations per sentence and builds tuples.
//! 4. [`infill`] corrupts rendered tuples with concept-biased span masking.
//! 5. [`mcq`] builds relation-prediction items from a distractor pool.
//! 6. [`emit`] mixes both streams into sharded JSONL with a manifest.
//! 7. [`validate`] re-checks every invariant on an emitted dataset.

pub mod concept;
pub mod corpus;
pub mod knowledge;
pub mod seed;
pub mod drops;
pub mod infill;
pub mod tuples;
pub mod mcq;
pub mod emit;
pub mod config;
pub mod validate;
pub mod pipeline;
pub mod synth;
