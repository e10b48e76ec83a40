//! Commonsense text infilling.
//!
//! A tuple is rendered as `subject relation inference` and one of four
//! masking schemes picks which part is corrupted:
//!
//! | scheme        | masked                      | objective         |
//! |---------------|-----------------------------|-------------------|
//! | text          | spans of the subject        | P(s \| s~, r, o)  |
//! | commonsense   | spans of the inference      | P(o \| s, r, o~)  |
//! | bidirectional | spans of both, independently| P(s, o \| s~, r, o~) |
//! | relation      | the relation token          | P(r \| s, r~, o)  |
//!
//! Span starts are drawn with extra weight on concept tokens. Each masked
//! span becomes one sentinel in the input; the target lists every sentinel
//! followed by the tokens it hides and ends with one more sentinel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::{tokenize_offsets, ConceptTagger, TagError, Token};
use crate::knowledge::RelationSet;
use crate::seed::{item_rng, Stream};
use crate::tuples::CommonsenseTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskingScheme {
    TextMasking,
    CommonsenseMasking,
    BidirectionalMasking,
    RelationMasking,
}

impl MaskingScheme {
    pub const ALL: [MaskingScheme; 4] = [
        MaskingScheme::TextMasking,
        MaskingScheme::CommonsenseMasking,
        MaskingScheme::BidirectionalMasking,
        MaskingScheme::RelationMasking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskingScheme::TextMasking => "text_masking",
            MaskingScheme::CommonsenseMasking => "commonsense_masking",
            MaskingScheme::BidirectionalMasking => "bidirectional_masking",
            MaskingScheme::RelationMasking => "relation_masking",
        }
    }

    /// Segments this scheme may place spans in.
    pub fn allows(self, segment: Segment) -> bool {
        match self {
            MaskingScheme::TextMasking => segment == Segment::Subject,
            MaskingScheme::CommonsenseMasking => segment == Segment::Inference,
            MaskingScheme::BidirectionalMasking => segment != Segment::Relation,
            MaskingScheme::RelationMasking => segment == Segment::Relation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Subject,
    Relation,
    Inference,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InfillConfigError {
    #[error("corruption_rate must be in (0, 1), got {0}")]
    Rate(f64),
    #[error("mean_span_length must be >= 1, got {0}")]
    SpanLength(f64),
    #[error("concept_weight must be >= 1, got {0}")]
    ConceptWeight(f64),
    #[error("scheme_weights must be finite, non-negative and not all zero: {0:?}")]
    SchemeWeights([f64; 4]),
    #[error("sentinel_format must contain {{N}} once, a non-empty prefix and suffix, and no whitespace: {0:?}")]
    SentinelFormat(String),
    #[error("corruption_rate {rate} * max_tokens {max_tokens} must be at least 1")]
    Budget { rate: f64, max_tokens: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpanMaskConfig {
    pub corruption_rate: f64,
    pub mean_span_length: f64,
    pub concept_weight: f64,
    /// Text, commonsense, bidirectional, relation.
    pub scheme_weights: [f64; 4],
    pub sentinel_format: String,
}

impl Default for SpanMaskConfig {
    fn default() -> Self {
        Self {
            corruption_rate: 0.15,
            mean_span_length: 3.0,
            concept_weight: 3.0,
            scheme_weights: [1.0; 4],
            sentinel_format: "<extra_id_{N}>".to_string(),
        }
    }
}

impl SpanMaskConfig {
    pub fn validate(&self, max_tokens: usize) -> Result<(), InfillConfigError> {
        let r = self.corruption_rate;
        if !(r > 0.0 && r < 1.0) {
            return Err(InfillConfigError::Rate(r));
        }
        if !(self.mean_span_length >= 1.0 && self.mean_span_length.is_finite()) {
            return Err(InfillConfigError::SpanLength(self.mean_span_length));
        }
        if !(self.concept_weight >= 1.0 && self.concept_weight.is_finite()) {
            return Err(InfillConfigError::ConceptWeight(self.concept_weight));
        }
        let w = self.scheme_weights;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(InfillConfigError::SchemeWeights(w));
        }
        Sentinels::new(&self.sentinel_format)?;
        if r * (max_tokens as f64) < 1.0 {
            return Err(InfillConfigError::Budget { rate: r, max_tokens });
        }
        Ok(())
    }

    pub fn sentinels(&self) -> Result<Sentinels, InfillConfigError> {
        Sentinels::new(&self.sentinel_format)
    }

    pub fn span_params(&self) -> SpanParams {
        SpanParams {
            corruption_rate: self.corruption_rate,
            mean_span_length: self.mean_span_length,
            concept_weight: self.concept_weight,
        }
    }
}

/// Sentinel surface forms built from a `prefix{N}suffix` template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentinels {
    prefix: String,
    suffix: String,
}

impl Sentinels {
    pub fn new(format: &str) -> Result<Self, InfillConfigError> {
        let bad = || InfillConfigError::SentinelFormat(format.to_string());
        let (prefix, suffix) = format.split_once("{N}").ok_or_else(bad)?;
        if prefix.is_empty()
            || suffix.is_empty()
            || suffix.contains("{N}")
            || suffix.starts_with(|c: char| c.is_ascii_digit())
            || format.chars().any(char::is_whitespace)
        {
            return Err(bad());
        }
        Ok(Self {
            prefix: prefix.to_string(),
            suffix: suffix.to_string(),
        })
    }

    pub fn get(&self, i: usize) -> String {
        format!("{}{i}{}", self.prefix, self.suffix)
    }

    /// The fixed prefix shared by all sentinels.
    pub fn marker(&self) -> &str {
        &self.prefix
    }
}

/// A tuple rendered to text, tokenized, with segment boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTuple {
    pub text: String,
    pub tokens: Vec<Token>,
    pub subject_len: usize,
    pub inference_len: usize,
}

impl RenderedTuple {
    pub fn new(subject: &str, relation_surface: &str, inference: &str) -> Self {
        let text = format!("{subject} {relation_surface} {inference}");
        let tokens = tokenize_offsets(&text);
        let subject_len = tokenize_offsets(subject).len();
        let inference_len = tokens.len() - subject_len - 1;
        Self { text, tokens, subject_len, inference_len }
    }

    pub fn relation_index(&self) -> usize {
        self.subject_len
    }

    pub fn segment_lengths(&self) -> [usize; 3] {
        [self.subject_len, 1, self.inference_len]
    }

    pub fn segment_of(&self, index: usize) -> Segment {
        segment_at(self.segment_lengths(), index)
    }
}

fn segment_at(lengths: [usize; 3], index: usize) -> Segment {
    if index < lengths[0] {
        Segment::Subject
    } else if index == lengths[0] {
        Segment::Relation
    } else {
        Segment::Inference
    }
}

fn segment_offset(lengths: [usize; 3], segment: Segment) -> usize {
    match segment {
        Segment::Subject => 0,
        Segment::Relation => lengths[0],
        Segment::Inference => lengths[0] + 1,
    }
}

/// `subject + " " + relation surface + " " + inference`.
pub fn render_tuple(t: &CommonsenseTuple, relations: &RelationSet) -> String {
    format!(
        "{} {} {}",
        t.subject.text,
        relations.surface(t.relation),
        t.inference.text
    )
}

/// Weighted categorical draw over the four schemes.
pub fn choose_scheme<R: Rng + ?Sized>(rng: &mut R, weights: &[f64; 4]) -> MaskingScheme {
    if weights.iter().all(|w| *w == weights[0]) {
        return MaskingScheme::ALL[rng.gen_range(0..4)];
    }
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        last = i;
        if u < *w {
            return MaskingScheme::ALL[i];
        }
        u -= w;
    }
    MaskingScheme::ALL[last]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanParams {
    pub corruption_rate: f64,
    pub mean_span_length: f64,
    pub concept_weight: f64,
}

const PLAN_RETRIES: usize = 10;

/// Masked-token budget for `n` maskable tokens.
pub fn span_budget(n: usize, params: &SpanParams) -> usize {
    if n <= 1 {
        return n;
    }
    let m = ((params.corruption_rate * n as f64).round() as usize).max(1);
    m.min(n - 1)
}

/// Number of spans for a budget of `m` tokens.
pub fn span_count(m: usize, params: &SpanParams) -> usize {
    if m == 0 {
        return 0;
    }
    ((m as f64 / params.mean_span_length).round() as usize).clamp(1, m)
}

/// `m` split into `k` parts whose sizes differ by at most one, larger first.
pub fn balanced_partition(m: usize, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let (base, extra) = (m / k, m % k);
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

fn pick_weighted<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    if weights.iter().all(|w| *w == weights[0]) {
        return rng.gen_range(0..weights.len());
    }
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Plan masked spans over the non-protected positions.
///
/// Returns `(start, length)` pairs sorted by start. Spans never touch a
/// protected position, never overlap and are never adjacent, and unless only
/// one position is maskable at least one maskable position stays visible.
pub fn plan_spans<R: Rng + ?Sized>(
    concept_mask: &[bool],
    protected: &[bool],
    params: &SpanParams,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    debug_assert_eq!(concept_mask.len(), protected.len());
    let len = concept_mask.len();
    let n = protected.iter().filter(|p| !**p).count();
    let m = span_budget(n, params);
    if m == 0 {
        return Vec::new();
    }
    let lengths = balanced_partition(m, span_count(m, params));
    let weight = |p: usize| if concept_mask[p] { params.concept_weight } else { 1.0 };
    let fits = |p: usize, l: usize| p + l <= len && protected[p..p + l].iter().all(|x| !*x);

    'attempt: for _ in 0..PLAN_RETRIES {
        let mut placed: Vec<(usize, usize)> = Vec::with_capacity(lengths.len());
        for &l in &lengths {
            let candidates: Vec<usize> = (0..len)
                .filter(|&p| {
                    fits(p, l) && placed.iter().all(|&(s, sl)| p + l < s || p > s + sl)
                })
                .collect();
            if candidates.is_empty() {
                continue 'attempt;
            }
            let weights: Vec<f64> = candidates.iter().map(|&p| weight(p)).collect();
            placed.push((candidates[pick_weighted(rng, &weights)], l));
        }
        placed.sort_unstable();
        return placed;
    }

    // fallback: one span at the heaviest feasible start, leftmost on ties
    let mut l = if n == 1 { 1 } else { m.min(n - 1) };
    while l > 0 {
        let best = (0..len)
            .filter(|&p| fits(p, l))
            .fold(None::<(usize, f64)>, |best, p| match best {
                Some((_, w)) if w >= weight(p) => best,
                _ => Some((p, weight(p))),
            });
        if let Some((p, _)) = best {
            return vec![(p, l)];
        }
        l -= 1;
    }
    Vec::new()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskedSpan {
    pub segment: Segment,
    pub start: usize,
    pub len: usize,
}

/// Spans travel as `[segment, start, len]` triples.
mod span_list {
    use super::{MaskedSpan, Segment};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(spans: &[MaskedSpan], s: S) -> Result<S::Ok, S::Error> {
        spans
            .iter()
            .map(|x| (x.segment, x.start, x.len))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<MaskedSpan>, D::Error> {
        let raw: Vec<(Segment, usize, usize)> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(segment, start, len)| MaskedSpan { segment, start, len })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfillingExample {
    pub sentence_id: u64,
    pub scheme: MaskingScheme,
    #[serde(rename = "input")]
    pub input_text: String,
    #[serde(rename = "target")]
    pub target_text: String,
    #[serde(rename = "spans", with = "span_list")]
    pub masked_spans: Vec<MaskedSpan>,
    /// Token counts of subject, relation (always 1) and inference.
    pub segment_lengths: [usize; 3],
}

impl InfillingExample {
    pub fn masked_tokens(&self) -> usize {
        self.masked_spans.iter().map(|s| s.len).sum()
    }

    /// Tokens the scheme could have masked.
    pub fn maskable_tokens(&self) -> usize {
        let [s, r, o] = self.segment_lengths;
        match self.scheme {
            MaskingScheme::TextMasking => s,
            MaskingScheme::CommonsenseMasking => o,
            MaskingScheme::BidirectionalMasking => s + o,
            MaskingScheme::RelationMasking => r,
        }
    }

    /// Spans as `(start, len)` over the whole rendered token sequence.
    pub fn global_spans(&self) -> Vec<(usize, usize)> {
        self.masked_spans
            .iter()
            .map(|s| (segment_offset(self.segment_lengths, s.segment) + s.start, s.len))
            .collect()
    }
}

/// Input and target strings for `spans` (global, sorted, disjoint) over a
/// tokenized text. Whitespace around each span is kept as it was, so
/// splicing the spans back is character-exact.
pub fn render_corruption(
    text: &str,
    tokens: &[Token],
    spans: &[(usize, usize)],
    sentinels: &Sentinels,
) -> (String, String) {
    let mut input = String::with_capacity(text.len());
    let mut target = String::new();
    let mut cursor = 0;
    for (i, &(start, len)) in spans.iter().enumerate() {
        let first = tokens[start];
        let last = tokens[start + len - 1];
        let sentinel = sentinels.get(i);
        input.push_str(&text[cursor..first.start]);
        input.push_str(&sentinel);
        cursor = last.end;
        target.push_str(&sentinel);
        target.push(' ');
        target.push_str(&text[first.start..last.end]);
        target.push(' ');
    }
    input.push_str(&text[cursor..]);
    target.push_str(&sentinels.get(spans.len()));
    (input, target)
}

/// A tuple ready for corruption: rendered, with concept flags for the
/// subject and inference tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedTuple {
    pub sentence_id: u64,
    pub rendered: RenderedTuple,
    /// One flag per rendered token; the relation token is never a concept.
    pub concept_mask: Vec<bool>,
}

impl TaggedTuple {
    pub fn from_masks(
        sentence_id: u64,
        rendered: RenderedTuple,
        subject_concepts: &[bool],
        inference_concepts: &[bool],
    ) -> Self {
        assert_eq!(subject_concepts.len(), rendered.subject_len);
        assert_eq!(inference_concepts.len(), rendered.inference_len);
        let mut concept_mask = Vec::with_capacity(rendered.tokens.len());
        concept_mask.extend_from_slice(subject_concepts);
        concept_mask.push(false);
        concept_mask.extend_from_slice(inference_concepts);
        Self { sentence_id, rendered, concept_mask }
    }

    pub fn tag(
        t: &CommonsenseTuple,
        relations: &RelationSet,
        tagger: &dyn ConceptTagger,
    ) -> Result<Self, TagError> {
        let rendered = RenderedTuple::new(
            &t.subject.text,
            relations.surface(t.relation),
            &t.inference.text,
        );
        let words = |range: std::ops::Range<usize>| -> Vec<String> {
            rendered.tokens[range]
                .iter()
                .map(|tok| tok.as_str(&rendered.text).to_string())
                .collect()
        };
        let s = tagger.tag(&words(0..rendered.subject_len))?;
        let o = tagger.tag(&words(rendered.subject_len + 1..rendered.tokens.len()))?;
        Ok(Self::from_masks(t.subject.sentence_id, rendered, &s, &o))
    }
}

fn segment_protection(lengths: [usize; 3], open: Segment) -> Vec<bool> {
    let total = lengths.iter().sum();
    (0..total).map(|i| segment_at(lengths, i) != open).collect()
}

/// Corrupt one tuple under `scheme`.
pub fn corrupt<R: Rng + ?Sized>(
    t: &TaggedTuple,
    scheme: MaskingScheme,
    params: &SpanParams,
    sentinels: &Sentinels,
    rng: &mut R,
) -> InfillingExample {
    let r = &t.rendered;
    let lengths = r.segment_lengths();
    let plan_in = |segment: Segment, rng: &mut R| {
        let protected = segment_protection(lengths, segment);
        plan_spans(&t.concept_mask, &protected, params, rng)
    };
    let mut spans = match scheme {
        MaskingScheme::TextMasking => plan_in(Segment::Subject, rng),
        MaskingScheme::CommonsenseMasking => plan_in(Segment::Inference, rng),
        MaskingScheme::BidirectionalMasking => {
            let mut s = plan_in(Segment::Subject, rng);
            s.extend(plan_in(Segment::Inference, rng));
            s
        }
        MaskingScheme::RelationMasking => vec![(r.relation_index(), 1)],
    };
    spans.sort_unstable();
    let (input_text, target_text) = render_corruption(&r.text, &r.tokens, &spans, sentinels);
    let masked_spans = spans
        .iter()
        .map(|&(start, len)| {
            let segment = r.segment_of(start);
            MaskedSpan {
                segment,
                start: start - segment_offset(lengths, segment),
                len,
            }
        })
        .collect();
    InfillingExample {
        sentence_id: t.sentence_id,
        scheme,
        input_text,
        target_text,
        masked_spans,
        segment_lengths: lengths,
    }
}

/// Scheme choice plus corruption, seeded per sentence.
#[derive(Debug, Clone)]
pub struct InfillingEngine {
    pub config: SpanMaskConfig,
    pub sentinels: Sentinels,
    pub seed: u64,
}

impl InfillingEngine {
    pub fn new(config: SpanMaskConfig, seed: u64) -> Result<Self, InfillConfigError> {
        let sentinels = config.sentinels()?;
        Ok(Self { config, sentinels, seed })
    }

    pub fn example(&self, t: &TaggedTuple) -> InfillingExample {
        let mut rng = item_rng(self.seed, t.sentence_id, Stream::Infilling);
        let scheme = choose_scheme(&mut rng, &self.config.scheme_weights);
        corrupt(t, scheme, &self.config.span_params(), &self.sentinels, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed infilling example for sentence {sentence_id}: {detail}")]
pub struct MalformedExample {
    pub sentence_id: u64,
    pub detail: String,
}

/// Splice the target's span texts back into the input's sentinels.
///
/// `original_lengths` are the subject/relation/inference token counts; the
/// reconstructed text must tokenize to exactly that many tokens.
pub fn reconstruct(
    e: &InfillingExample,
    original_lengths: [usize; 3],
    sentinels: &Sentinels,
) -> Result<String, MalformedExample> {
    let bad = |detail: String| MalformedExample { sentence_id: e.sentence_id, detail };
    let k = e.masked_spans.len();
    let marker = sentinels.marker();
    let in_count = e.input_text.matches(marker).count();
    let tgt_count = e.target_text.matches(marker).count();
    if in_count != k || tgt_count != k + 1 {
        return Err(bad(format!(
            "{k} spans but {in_count} input and {tgt_count} target sentinels"
        )));
    }

    let mut texts = Vec::with_capacity(k);
    let mut rest = e.target_text.as_str();
    for i in 0..k {
        let open = sentinels.get(i) + " ";
        rest = rest
            .strip_prefix(open.as_str())
            .ok_or_else(|| bad(format!("target does not continue with sentinel {i}")))?;
        let close = format!(" {}", sentinels.get(i + 1));
        let at = rest
            .find(close.as_str())
            .ok_or_else(|| bad(format!("target span {i} is not closed")))?;
        let span = &rest[..at];
        if span.is_empty() {
            return Err(bad(format!("target span {i} is empty")));
        }
        texts.push(span);
        rest = &rest[at + 1..];
    }
    if rest != sentinels.get(k) {
        return Err(bad("target does not end with the terminator sentinel".into()));
    }

    let mut out = e.input_text.clone();
    for (i, span) in texts.iter().enumerate() {
        let s = sentinels.get(i);
        if out.matches(s.as_str()).count() != 1 {
            return Err(bad(format!("sentinel {i} must appear exactly once in the input")));
        }
        out = out.replacen(s.as_str(), span, 1);
    }
    let expected: usize = original_lengths.iter().sum();
    let got = tokenize_offsets(&out).len();
    if got != expected {
        return Err(bad(format!("reconstruction has {got} tokens, expected {expected}")));
    }
    Ok(out)
}
