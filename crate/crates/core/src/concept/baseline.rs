use std::collections::HashSet;
use std::sync::LazyLock;

use super::lexicon::{ADJECTIVES_ADVERBS, CLOSED_CLASS, NOUNS, VERBS};
use super::{ConceptTagger, TagError, TokenizedSentence};
use rayon::prelude::*;

struct Lexicon {
    closed: HashSet<&'static str>,
    modifiers: HashSet<&'static str>,
    open: HashSet<&'static str>,
}

static LEXICON: LazyLock<Lexicon> = LazyLock::new(|| Lexicon {
    closed: CLOSED_CLASS.iter().copied().collect(),
    modifiers: ADJECTIVES_ADVERBS.iter().copied().collect(),
    open: NOUNS.iter().chain(VERBS).copied().collect(),
});

const NOUN_SUFFIXES: &[&str] = &[
    "tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism", "ist", "hood", "er",
    "or",
];
const VERB_SUFFIXES: &[&str] = &["ing", "ed", "ize", "ise", "ify", "ate", "en"];
const MODIFIER_SUFFIXES: &[&str] = &[
    "ly", "ful", "ous", "ive", "able", "ible", "al", "ic", "less", "ish", "est",
];

/// Deterministic rule-based noun/verb detector.
///
/// Decision order: non-alphabetic tokens and closed-class words are never
/// concepts; a small adjective/adverb list is never a concept; the bundled
/// noun/verb lexicon (including simple inflections) marks concepts;
/// capitalized tokens after the first position count as proper nouns; then
/// suffix patterns decide, and anything left over is treated as a noun.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineTagger;

impl BaselineTagger {
    pub fn new() -> Self {
        Self
    }

    /// The concept decision for one token at `position` in its sentence.
    pub fn is_concept(&self, token: &str, position: usize) -> bool {
        if !token.chars().any(char::is_alphabetic) {
            return false;
        }
        let lower = token.to_lowercase();
        let lex = &*LEXICON;
        if lex.closed.contains(lower.as_str()) {
            return false;
        }
        if lex.modifiers.contains(lower.as_str()) {
            return false;
        }
        if in_open_lexicon(&lower, &lex.open) {
            return true;
        }
        if position > 0 && token.chars().next().is_some_and(char::is_uppercase) {
            return true;
        }
        if lower.len() > 4 && MODIFIER_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
            return false;
        }
        if lower.len() > 4
            && NOUN_SUFFIXES
                .iter()
                .chain(VERB_SUFFIXES)
                .any(|s| lower.ends_with(s))
        {
            return true;
        }
        // unknown open-class word: most of these are nouns
        true
    }
}

fn in_open_lexicon(lower: &str, open: &HashSet<&'static str>) -> bool {
    if open.contains(lower) {
        return true;
    }
    let stems = [
        lower.strip_suffix("ies").map(|s| format!("{s}y")),
        lower.strip_suffix("ied").map(|s| format!("{s}y")),
        lower.strip_suffix("es").map(str::to_string),
        lower.strip_suffix('s').map(str::to_string),
        lower.strip_suffix("ed").map(str::to_string),
        lower.strip_suffix('d').map(str::to_string),
        lower.strip_suffix("ing").map(str::to_string),
        lower.strip_suffix("ing").map(|s| format!("{s}e")),
    ];
    stems.into_iter().flatten().any(|stem| {
        if open.contains(stem.as_str()) {
            return true;
        }
        // doubled final consonant: "stopped", "running"
        let b = stem.as_bytes();
        b.len() > 2 && b[b.len() - 1] == b[b.len() - 2] && open.contains(&stem[..stem.len() - 1])
    })
}

impl ConceptTagger for BaselineTagger {
    fn tag(&self, tokens: &[String]) -> Result<Vec<bool>, TagError> {
        Ok(tokens
            .iter()
            .enumerate()
            .map(|(i, t)| self.is_concept(t, i))
            .collect())
    }

    fn tag_batch(&self, batch: &mut [TokenizedSentence]) -> Result<(), TagError> {
        batch.par_iter_mut().for_each(|s| {
            s.concept_mask = s
                .tokens
                .iter()
                .enumerate()
                .map(|(i, t)| self.is_concept(t, i))
                .collect();
        });
        Ok(())
    }
}
