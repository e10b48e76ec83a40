//! Commonsense relation prediction: four-way multiple choice.
//!
//! Each item asks for the inference that matches a sentence and relation.
//! The options are the correct inference, the same sentence's inference for
//! its spare relation, and two inferences for the same relation taken from
//! other sentences.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drops::{DropReason, DropRecord};
use crate::knowledge::Relation;
use crate::seed::{item_rng, Stream};
use crate::tuples::CommonsenseTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Correct,
    SameSentenceDiffRelation,
    DiffSentenceSameRelation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqOption {
    pub text: String,
    pub kind: OptionKind,
    pub source_sentence_id: u64,
    pub source_relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPredictionExample {
    pub sentence_id: u64,
    pub relation: Relation,
    pub context: String,
    pub options: Vec<McqOption>,
    pub answer_index: usize,
}

/// An example plus its rendered text-to-text form; one line of output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsrpRecord {
    #[serde(flatten)]
    pub example: RelationPredictionExample,
    pub input: String,
    pub target: String,
}

pub const LETTERS: [&str; 4] = ["A", "B", "C", "D"];

/// Question text per relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Verbalizer(pub BTreeMap<Relation, String>);

impl Default for Verbalizer {
    fn default() -> Self {
        Self(BTreeMap::from([
            (Relation::Intent, "why did they do this?".to_string()),
            (Relation::Reason, "what is the reason for this?".to_string()),
            (Relation::Effect, "what happens as a result?".to_string()),
            (Relation::Need, "what did they need to do before this?".to_string()),
            (Relation::Want, "what will they want to do next?".to_string()),
            (Relation::React, "how do they feel after this?".to_string()),
        ]))
    }
}

impl Verbalizer {
    /// Defaults with individual relations overridden.
    pub fn with_overrides(overrides: &BTreeMap<Relation, String>) -> Self {
        let mut v = Self::default();
        v.0.extend(overrides.iter().map(|(r, q)| (*r, q.clone())));
        v
    }

    pub fn question(&self, r: Relation) -> &str {
        self.0.get(&r).map_or(r.name(), String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStyle {
    /// The answer letter, `A` to `D`.
    #[default]
    Letter,
    /// The full text of the correct option.
    Text,
}

/// `(input, target)` for a text-to-text model.
pub fn render_mcq(
    e: &RelationPredictionExample,
    verbalizer: &Verbalizer,
    style: TargetStyle,
) -> (String, String) {
    let mut input = format!(
        "question: {} context: {} options:",
        verbalizer.question(e.relation),
        e.context
    );
    for (letter, o) in LETTERS.iter().zip(&e.options) {
        input.push_str(&format!(" ({letter}) {}", o.text));
    }
    let target = match style {
        TargetStyle::Letter => LETTERS[e.answer_index].to_string(),
        TargetStyle::Text => e.options[e.answer_index].text.clone(),
    };
    (input, target)
}

/// Same-relation inferences indexed by relation.
#[derive(Debug, Clone, Default)]
pub struct DistractorPool {
    by_relation: HashMap<Relation, Vec<(u64, String)>>,
}

impl DistractorPool {
    pub fn entries(&self, r: Relation) -> &[(u64, String)] {
        self.by_relation.get(&r).map_or(&[], Vec::as_slice)
    }
}

/// Index every tuple's primary `(relation, inference)` pair.
pub fn build_pool<'a>(tuples: impl IntoIterator<Item = &'a CommonsenseTuple>) -> DistractorPool {
    let mut by_relation: HashMap<Relation, Vec<(u64, String)>> = HashMap::new();
    for t in tuples {
        by_relation
            .entry(t.relation)
            .or_default()
            .push((t.subject.sentence_id, t.inference.text.clone()));
    }
    DistractorPool { by_relation }
}

/// Up to `want` entries drawn uniformly without replacement, skipping
/// entries rejected by `usable`. Lazy Fisher-Yates, so the cost is in the
/// number of draws rather than the bucket size.
fn draw_distinct<'p, R: Rng + ?Sized>(
    entries: &'p [(u64, String)],
    want: usize,
    rng: &mut R,
    mut usable: impl FnMut(&(u64, String), &[&'p (u64, String)]) -> bool,
) -> Vec<&'p (u64, String)> {
    let mut swapped: HashMap<usize, usize> = HashMap::new();
    let mut picked = Vec::with_capacity(want);
    let n = entries.len();
    for i in 0..n {
        if picked.len() == want {
            break;
        }
        let j = rng.gen_range(i..n);
        let at_j = *swapped.get(&j).unwrap_or(&j);
        let at_i = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, at_i);
        let e = &entries[at_j];
        if usable(e, &picked) {
            picked.push(e);
        }
    }
    picked
}

/// Build one item. `fallback` is consulted when `pool` cannot supply two
/// usable different-sentence distractors.
pub fn build_example<R: Rng + ?Sized>(
    t: &CommonsenseTuple,
    pool: &DistractorPool,
    fallback: Option<&DistractorPool>,
    rng: &mut R,
) -> Result<RelationPredictionExample, DropReason> {
    let sid = t.subject.sentence_id;
    let correct = McqOption {
        text: t.inference.text.clone(),
        kind: OptionKind::Correct,
        source_sentence_id: sid,
        source_relation: t.relation,
    };
    let same = McqOption {
        text: t.spare_inference.text.clone(),
        kind: OptionKind::SameSentenceDiffRelation,
        source_sentence_id: sid,
        source_relation: t.spare_relation,
    };
    if correct.text == same.text {
        return Err(DropReason::DuplicateOptions);
    }
    let mut draw = |p: &DistractorPool| {
        draw_distinct(p.entries(t.relation), 2, rng, |(id, text), picked| {
            *id != sid
                && *text != correct.text
                && *text != same.text
                && picked.iter().all(|(pid, ptext)| pid != id && ptext != text)
        })
        .into_iter()
        .cloned()
        .collect::<Vec<_>>()
    };
    let mut others = draw(pool);
    if others.len() < 2 {
        if let Some(global) = fallback {
            others = draw(global);
        }
    }
    if others.len() < 2 {
        return Err(DropReason::PoolExhausted);
    }
    let mut options = vec![correct, same];
    options.extend(others.into_iter().map(|(id, text)| McqOption {
        text,
        kind: OptionKind::DiffSentenceSameRelation,
        source_sentence_id: id,
        source_relation: t.relation,
    }));
    options.shuffle(rng);
    let answer_index = options
        .iter()
        .position(|o| o.kind == OptionKind::Correct)
        .expect("correct option present");
    Ok(RelationPredictionExample {
        sentence_id: sid,
        relation: t.relation,
        context: t.subject.text.clone(),
        options,
        answer_index,
    })
}

/// Why an example fails the provenance rules, if it does.
pub fn audit(e: &RelationPredictionExample) -> Result<(), String> {
    if e.options.len() != 4 {
        return Err(format!("{} options", e.options.len()));
    }
    let count = |k| e.options.iter().filter(|o| o.kind == k).count();
    let sig = (
        count(OptionKind::Correct),
        count(OptionKind::SameSentenceDiffRelation),
        count(OptionKind::DiffSentenceSameRelation),
    );
    if sig != (1, 1, 2) {
        return Err(format!("provenance signature {sig:?}, expected (1, 1, 2)"));
    }
    for o in &e.options {
        let ok = match o.kind {
            OptionKind::Correct => o.source_sentence_id == e.sentence_id && o.source_relation == e.relation,
            OptionKind::SameSentenceDiffRelation => {
                o.source_sentence_id == e.sentence_id && o.source_relation != e.relation
            }
            OptionKind::DiffSentenceSameRelation => {
                o.source_sentence_id != e.sentence_id && o.source_relation == e.relation
            }
        };
        if !ok {
            return Err(format!("option {:?} has inconsistent source", o.kind));
        }
    }
    for (i, a) in e.options.iter().enumerate() {
        if e.options[i + 1..].iter().any(|b| b.text == a.text) {
            return Err(format!("duplicate option text {:?}", a.text));
        }
    }
    if e.answer_index >= 4 || e.options[e.answer_index].kind != OptionKind::Correct {
        return Err(format!("answer_index {} does not point at the correct option", e.answer_index));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct McqBuilder {
    pub seed: u64,
    /// Tuples per distractor-pool shard.
    pub pool_shard_size: usize,
    pub verbalizer: Verbalizer,
    pub target_style: TargetStyle,
}

impl McqBuilder {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            pool_shard_size: 10_000,
            verbalizer: Verbalizer::default(),
            target_style: TargetStyle::Letter,
        }
    }

    /// One outcome per tuple, in input order.
    pub fn build_all(&self, tuples: &[CommonsenseTuple]) -> Vec<Result<CsrpRecord, DropRecord>> {
        let global = build_pool(tuples);
        tuples
            .chunks(self.pool_shard_size.max(1))
            .flat_map(|shard| {
                let pool = build_pool(shard);
                shard
                    .par_iter()
                    .map(|t| self.build_one(t, &pool, &global))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn build_one(
        &self,
        t: &CommonsenseTuple,
        pool: &DistractorPool,
        global: &DistractorPool,
    ) -> Result<CsrpRecord, DropRecord> {
        let mut rng = item_rng(self.seed, t.subject.sentence_id, Stream::Distractors);
        match build_example(t, pool, Some(global), &mut rng) {
            Ok(example) => {
                let (input, target) = render_mcq(&example, &self.verbalizer, self.target_style);
                Ok(CsrpRecord { example, input, target })
            }
            Err(reason) => Err(DropRecord {
                sentence_id: t.subject.sentence_id,
                stage: "csrp".into(),
                reason,
                detail: String::new(),
            }),
        }
    }
}
