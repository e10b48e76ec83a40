//! Word tokenization and concept (noun / verb) tagging.
//!
//! Span masking is biased toward concept tokens. The [`ConceptTagger`] trait
//! abstracts over where the noun/verb decision comes from: the bundled
//! [`BaselineTagger`] rule set, or an [`ExternalTagger`] child process that
//! speaks a line-delimited JSON protocol so a full POS tagger can be plugged
//! in without linking it.

mod baseline;
mod external;
mod lexicon;

pub use baseline::BaselineTagger;
pub use external::ExternalTagger;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TagError {
    #[error("tagger process i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("tagger protocol error for sentence {sentence_id}: {detail}")]
    Protocol { sentence_id: u64, detail: String },
    #[error("tagger process exited or closed its output")]
    Closed,
}

/// A token as a byte range into the text it was cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn as_str(self, text: &str) -> &str {
        &text[self.start..self.end]
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}' | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{ab}' | '\u{bb}'
        )
}

/// Tokenize into byte ranges: whitespace separates words, and leading or
/// trailing punctuation characters are split off one character per token.
/// Word-internal punctuation (`don't`, `well-known`, `3.5`) stays attached.
pub fn tokenize_offsets(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        split_word(text, start, end, &mut out);
    }
    out
}

fn split_word(text: &str, start: usize, end: usize, out: &mut Vec<Token>) {
    let word = &text[start..end];
    let lead: usize = word
        .chars()
        .take_while(|&c| is_punct(c))
        .map(char::len_utf8)
        .sum();
    if lead == word.len() {
        for (i, c) in word.char_indices() {
            out.push(Token { start: start + i, end: start + i + c.len_utf8() });
        }
        return;
    }
    let trail: usize = word
        .chars()
        .rev()
        .take_while(|&c| is_punct(c))
        .map(char::len_utf8)
        .sum();
    for (i, c) in word[..lead].char_indices() {
        out.push(Token { start: start + i, end: start + i + c.len_utf8() });
    }
    out.push(Token { start: start + lead, end: end - trail });
    let tail_start = end - trail;
    for (i, c) in text[tail_start..end].char_indices() {
        out.push(Token { start: tail_start + i, end: tail_start + i + c.len_utf8() });
    }
}

/// Tokenize into owned strings.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_offsets(text)
        .into_iter()
        .map(|t| t.as_str(text).to_string())
        .collect()
}

/// Number of tokens [`tokenize`] would produce, without allocating them.
pub fn token_count(text: &str) -> usize {
    tokenize_offsets(text).len()
}

/// Re-joins tokens using the whitespace that separated them in `text`.
/// Because normalized text only ever has single spaces, the glue between two
/// tokens is either `""` (punctuation split) or `" "`.
pub fn detokenize(text: &str, tokens: &[Token]) -> String {
    match (tokens.first(), tokens.last()) {
        (Some(first), Some(last)) => text[first.start..last.end].to_string(),
        _ => String::new(),
    }
}

/// A sentence with its tokens and per-token concept flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub sentence_id: u64,
    pub tokens: Vec<String>,
    pub concept_mask: Vec<bool>,
}

impl TokenizedSentence {
    /// Tokenizes `text`; the concept mask starts all-false until tagged.
    pub fn new(sentence_id: u64, text: &str) -> Self {
        let tokens = tokenize(text);
        let concept_mask = vec![false; tokens.len()];
        Self { sentence_id, tokens, concept_mask }
    }
}

/// Source of noun/verb decisions.
pub trait ConceptTagger: Send + Sync {
    /// One flag per token, true for nouns and verbs.
    fn tag(&self, tokens: &[String]) -> Result<Vec<bool>, TagError>;

    /// Fill in `concept_mask` for every sentence in the batch, preserving
    /// order and lengths.
    fn tag_batch(&self, batch: &mut [TokenizedSentence]) -> Result<(), TagError> {
        for s in batch.iter_mut() {
            let mask = self.tag(&s.tokens)?;
            if mask.len() != s.tokens.len() {
                return Err(TagError::Protocol {
                    sentence_id: s.sentence_id,
                    detail: format!("expected {} flags, got {}", s.tokens.len(), mask.len()),
                });
            }
            s.concept_mask = mask;
        }
        Ok(())
    }
}

/// Concept flags for a token list.
pub fn tag_concepts(tokens: &[String], tagger: &dyn ConceptTagger) -> Result<Vec<bool>, TagError> {
    tagger.tag(tokens)
}

/// One line of the gold-annotated tagging fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldSentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub concept: Vec<bool>,
}

/// Precision and recall of a tagger against gold concept annotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggerScore {
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

pub fn score_tagger(
    tagger: &dyn ConceptTagger,
    gold: &[GoldSentence],
) -> Result<TaggerScore, TagError> {
    let (mut tp, mut predicted, mut gold_n) = (0, 0, 0);
    for g in gold {
        let pred = tagger.tag(&g.tokens)?;
        for (&p, &t) in pred.iter().zip(&g.concept) {
            tp += usize::from(p && t);
            predicted += usize::from(p);
            gold_n += usize::from(t);
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    Ok(TaggerScore {
        precision: ratio(tp, predicted),
        recall: ratio(tp, gold_n),
        true_positives: tp,
        predicted,
        gold: gold_n,
    })
}

/// The bundled 200-sentence gold fixture.
pub fn bundled_gold() -> Vec<GoldSentence> {
    include_str!("../../fixtures/concepts_gold.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("bundled fixture is valid"))
        .collect()
}
