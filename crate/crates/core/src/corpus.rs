//! Raw text ingest: sentence segmentation, normalization, deduplication and
//! seeded subsampling.

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::concept::token_count;
use crate::seed::{run_rng, Stream};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("document {doc_id} is not valid UTF-8: {source}")]
    Utf8 {
        doc_id: String,
        source: std::str::Utf8Error,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// How a corpus file is split into documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentMode {
    /// One document per line.
    #[default]
    Lines,
    /// Documents separated by blank lines.
    Paragraphs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub doc_id: String,
    pub text: String,
    pub source: String,
}

impl RawDocument {
    pub fn from_bytes(
        doc_id: impl Into<String>,
        bytes: &[u8],
        source: impl Into<String>,
    ) -> Result<Self, IngestError> {
        let doc_id = doc_id.into();
        match std::str::from_utf8(bytes) {
            Ok(text) => Ok(Self {
                doc_id,
                text: text.to_string(),
                source: source.into(),
            }),
            Err(source) => Err(IngestError::Utf8 { doc_id, source }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: u64,
    pub text: String,
    pub token_count: usize,
    pub source: String,
}

impl Sentence {
    /// Build from already-normalized text.
    pub fn new(text: impl Into<String>, source: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            sentence_id: sentence_id(&text),
            token_count: token_count(&text),
            text,
            source: source.into(),
        }
    }
}

/// 64-bit FNV-1a of the UTF-8 bytes.
pub fn sentence_id(text: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    text.bytes()
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Collapse whitespace runs to one space, trim, and apply NFC.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Filters applied to segmented sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentOptions {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Sentences containing this substring are dropped (the fixed prefix of
    /// the sentinel format, e.g. `<extra_id_`).
    pub sentinel_marker: Option<String>,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            min_tokens: 5,
            max_tokens: 64,
            sentinel_marker: Some("<extra_id_".to_string()),
        }
    }
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "e.g", "i.e", "inc",
    "ltd", "co", "corp", "no", "fig", "approx", "dept", "est", "gen", "gov", "lt", "col",
    "capt", "sgt", "rev", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec", "u.s", "u.k", "a.m", "p.m", "al",
];

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}' | '\u{bb}')
}

fn is_opening(c: char) -> bool {
    c.is_uppercase()
        || c.is_ascii_digit()
        || matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}' | '\u{ab}')
}

/// The word ending right before byte index `dot`, lowercased, without any
/// leading punctuation.
fn word_before(text: &str, dot: usize) -> String {
    let start = text[..dot].rfind(' ').map_or(0, |i| i + 1);
    text[start..dot]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Split normalized text into sentences: a boundary is `.`, `!` or `?`
/// (plus any closing quotes/brackets) followed by a space and an uppercase
/// or opening character, unless the period ends a known abbreviation or a
/// single-letter initial.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (is_closing(chars[j].1) || matches!(chars[j].1, '.' | '!' | '?')) {
                j += 1;
            }
            let boundary = j + 1 < chars.len()
                && chars[j].1 == ' '
                && is_opening(chars[j + 1].1)
                && !(c == '.' && j == i + 1 && {
                    let w = word_before(text, pos);
                    ABBREVIATIONS.contains(&w.as_str())
                        || (w.chars().count() == 1 && w.chars().all(char::is_alphabetic))
                });
            if boundary {
                let end = chars[j].0;
                out.push(text[start..end].trim());
                start = chars[j + 1].0;
                i = j + 1;
                continue;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

/// Normalize, segment and length-filter one document.
pub fn segment_sentences(doc: &RawDocument, opts: &SegmentOptions) -> Vec<Sentence> {
    let normalized = normalize(&doc.text);
    split_sentences(&normalized)
        .into_iter()
        .filter(|s| {
            opts.sentinel_marker
                .as_deref()
                .is_none_or(|m| !s.contains(m))
        })
        .map(|s| Sentence::new(s, doc.source.clone()))
        .filter(|s| (opts.min_tokens..=opts.max_tokens).contains(&s.token_count))
        .collect()
}

/// Segment many documents in parallel, keeping document order.
pub fn segment_all(docs: &[RawDocument], opts: &SegmentOptions) -> Vec<Sentence> {
    docs.par_iter()
        .map(|d| segment_sentences(d, opts))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Drop repeated sentences (first occurrence wins) and keep a seeded
/// reservoir sample of at most `n`. The result is in input order.
pub fn dedupe_and_sample<I>(sentences: I, n: usize, seed: u64) -> Vec<Sentence>
where
    I: IntoIterator<Item = Sentence>,
{
    assert!(n >= 1, "sample size must be at least 1");
    let mut rng = run_rng(seed, Stream::Sample);
    let mut seen = HashSet::new();
    let mut reservoir: Vec<(usize, Sentence)> = Vec::new();
    let mut distinct = 0usize;
    for s in sentences {
        if !seen.insert(s.sentence_id) {
            continue;
        }
        if distinct < n {
            reservoir.push((distinct, s));
        } else {
            let j = rng.gen_range(0..=distinct);
            if j < n {
                reservoir[j] = (distinct, s);
            }
        }
        distinct += 1;
    }
    reservoir.sort_by_key(|(pos, _)| *pos);
    reservoir.into_iter().map(|(_, s)| s).collect()
}

/// Split a corpus file into documents.
pub fn read_documents(path: &Path, mode: DocumentMode) -> Result<Vec<RawDocument>, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let label = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut docs = Vec::new();
    let mut push = |chunk: &[u8]| -> Result<(), IngestError> {
        if chunk.iter().all(u8::is_ascii_whitespace) {
            return Ok(());
        }
        let doc_id = format!("{label}:{}", docs.len());
        docs.push(RawDocument::from_bytes(doc_id, chunk, label.clone())?);
        Ok(())
    };
    match mode {
        DocumentMode::Lines => {
            for line in bytes.split(|&b| b == b'\n') {
                push(line)?;
            }
        }
        DocumentMode::Paragraphs => {
            let mut para_start = 0;
            let lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
            let mut offset = 0;
            for line in &lines {
                let end = offset + line.len();
                if line.iter().all(u8::is_ascii_whitespace) {
                    push(&bytes[para_start..offset])?;
                    para_start = (end + 1).min(bytes.len());
                }
                offset = (end + 1).min(bytes.len());
            }
            push(&bytes[para_start.min(bytes.len())..])?;
        }
    }
    Ok(docs)
}
