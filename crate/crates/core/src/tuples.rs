//! Per-sentence tuple assembly: two distinct relations are sampled, both
//! inferences are fetched, and a coin flip decides which pair is the
//! training tuple and which is kept as the same-sentence distractor.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::drops::{DropReason, DropRecord};
use crate::knowledge::{
    generate_batch, GenerateOptions, Generated, Inference, KnowledgeBackend, KnowledgeError, Query,
    Relation, RelationSet,
};
use crate::seed::{item_rng, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonsenseTuple {
    pub subject: Sentence,
    pub relation: Relation,
    pub inference: Inference,
    pub spare_relation: Relation,
    pub spare_inference: Inference,
}

impl CommonsenseTuple {
    pub fn sentence_id(&self) -> u64 {
        self.subject.sentence_id
    }

    pub fn to_record(&self) -> TupleRecord {
        TupleRecord {
            sentence_id: self.subject.sentence_id,
            subject: self.subject.text.clone(),
            relation: self.relation,
            inference: self.inference.text.clone(),
            spare_relation: self.spare_relation,
            spare_inference: self.spare_inference.text.clone(),
        }
    }
}

/// One line of the tuples file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleRecord {
    pub sentence_id: u64,
    pub subject: String,
    pub relation: Relation,
    pub inference: String,
    pub spare_relation: Relation,
    pub spare_inference: String,
}

impl TupleRecord {
    pub fn into_tuple(self, backend: &str) -> CommonsenseTuple {
        let mut subject = Sentence::new(self.subject, "");
        subject.sentence_id = self.sentence_id;
        let inf = |text, relation| Inference {
            text,
            relation,
            subject_id: self.sentence_id,
            backend: backend.to_string(),
            cached: false,
        };
        CommonsenseTuple {
            inference: inf(self.inference, self.relation),
            spare_inference: inf(self.spare_inference, self.spare_relation),
            relation: self.relation,
            spare_relation: self.spare_relation,
            subject,
        }
    }
}

/// Two distinct relations, uniform without replacement, as a pure function
/// of `(sentence_id, seed)`.
pub fn assign_relations(sentence_id: u64, seed: u64, relations: &RelationSet) -> (Relation, Relation) {
    draw_pair(&mut item_rng(seed, sentence_id, Stream::Relations), relations)
}

fn draw_pair(rng: &mut ChaCha8Rng, relations: &RelationSet) -> (Relation, Relation) {
    let m = relations.members();
    assert!(m.len() >= 2, "relation set needs two members");
    let i = rng.gen_range(0..m.len());
    let mut j = rng.gen_range(0..m.len() - 1);
    if j >= i {
        j += 1;
    }
    (m[i], m[j])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TupleOutcome {
    Tuple(CommonsenseTuple),
    Dropped(DropRecord),
}

/// Sentence-level plan: the two sampled relations and the RNG that
/// continues to drive this sentence's later choices.
struct Plan {
    slots: [Relation; 2],
    primary_slot: usize,
    rng: ChaCha8Rng,
}

enum Slot {
    Ready(Inference),
    Filtered,
    Failed(KnowledgeError),
}

impl From<Result<Generated, KnowledgeError>> for Slot {
    fn from(r: Result<Generated, KnowledgeError>) -> Self {
        match r {
            Ok(Generated::Inference(i)) => Slot::Ready(i),
            Ok(Generated::Filtered { .. }) => Slot::Filtered,
            Err(e) => Slot::Failed(e),
        }
    }
}

pub struct TupleBuilder<'a> {
    pub backend: &'a dyn KnowledgeBackend,
    pub relations: &'a RelationSet,
    pub seed: u64,
    pub parallelism: usize,
    pub options: GenerateOptions,
    /// Sentences processed per backend batch.
    pub chunk_size: usize,
}

impl<'a> TupleBuilder<'a> {
    pub fn new(backend: &'a dyn KnowledgeBackend, relations: &'a RelationSet, seed: u64) -> Self {
        Self {
            backend,
            relations,
            seed,
            parallelism: 1,
            options: GenerateOptions::default(),
            chunk_size: 4096,
        }
    }

    pub fn build_tuple(&self, sentence: &Sentence) -> TupleOutcome {
        self.build_chunk(std::slice::from_ref(sentence))
            .pop()
            .expect("one outcome per sentence")
    }

    /// Outcomes in input order; each sentence yields exactly one outcome.
    pub fn build_all(&self, sentences: &[Sentence]) -> Vec<TupleOutcome> {
        sentences
            .chunks(self.chunk_size.max(1))
            .flat_map(|c| self.build_chunk(c))
            .collect()
    }

    fn query(&self, s: &Sentence, r: Relation) -> Query {
        Query::new(s.sentence_id, &s.text, r, self.relations)
    }

    fn build_chunk(&self, sentences: &[Sentence]) -> Vec<TupleOutcome> {
        let mut plans: Vec<Plan> = sentences
            .iter()
            .map(|s| {
                let mut rng = item_rng(self.seed, s.sentence_id, Stream::Relations);
                let (a, b) = draw_pair(&mut rng, self.relations);
                let primary_slot = usize::from(!rng.gen_bool(0.5));
                Plan { slots: [a, b], primary_slot, rng }
            })
            .collect();

        let queries: Vec<Query> = sentences
            .iter()
            .zip(&plans)
            .flat_map(|(s, p)| p.slots.map(|r| self.query(s, r)))
            .collect();
        let mut slots: Vec<Slot> =
            generate_batch(&queries, self.backend, self.parallelism, &self.options)
                .into_iter()
                .map(Slot::from)
                .collect();

        // one resample per filtered slot, from relations not yet used
        let mut retry_idx = Vec::new();
        let mut retry_queries = Vec::new();
        for (n, (s, plan)) in sentences.iter().zip(plans.iter_mut()).enumerate() {
            let originals = plan.slots;
            for k in 0..2 {
                if !matches!(slots[2 * n + k], Slot::Filtered) {
                    continue;
                }
                if slots.iter().skip(2 * n).take(2).any(|x| matches!(x, Slot::Failed(_))) {
                    continue;
                }
                let other = plan.slots[1 - k];
                let remaining: Vec<Relation> = self
                    .relations
                    .members()
                    .iter()
                    .copied()
                    .filter(|r| !originals.contains(r) && *r != other)
                    .collect();
                if remaining.is_empty() {
                    continue;
                }
                let r = remaining[plan.rng.gen_range(0..remaining.len())];
                plan.slots[k] = r;
                retry_idx.push(2 * n + k);
                retry_queries.push(self.query(s, r));
            }
        }
        if !retry_queries.is_empty() {
            let results = generate_batch(&retry_queries, self.backend, self.parallelism, &self.options);
            for (i, r) in retry_idx.into_iter().zip(results) {
                slots[i] = Slot::from(r);
            }
        }

        let mut slots = slots.into_iter();
        sentences
            .iter()
            .zip(plans)
            .map(|(s, plan)| {
                let a = slots.next().expect("two slots per sentence");
                let b = slots.next().expect("two slots per sentence");
                self.assemble(s, plan, [a, b])
            })
            .collect()
    }

    fn assemble(&self, s: &Sentence, plan: Plan, slots: [Slot; 2]) -> TupleOutcome {
        let drop = |reason, detail: String| {
            tracing::debug!(sentence_id = s.sentence_id, %reason, %detail, "dropping sentence");
            TupleOutcome::Dropped(DropRecord {
                sentence_id: s.sentence_id,
                stage: "tuples".into(),
                reason,
                detail,
            })
        };
        match slots {
            [Slot::Failed(e), _] | [_, Slot::Failed(e)] => drop(DropReason::BackendFailure, e.to_string()),
            [Slot::Filtered, _] | [_, Slot::Filtered] => {
                drop(DropReason::FilteredInference, String::new())
            }
            [Slot::Ready(a), Slot::Ready(b)] => {
                let [ra, rb] = plan.slots;
                let (relation, inference, spare_relation, spare_inference) = if plan.primary_slot == 0 {
                    (ra, a, rb, b)
                } else {
                    (rb, b, ra, a)
                };
                TupleOutcome::Tuple(CommonsenseTuple {
                    subject: s.clone(),
                    relation,
                    inference,
                    spare_relation,
                    spare_inference,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{Answer, BackendError, OracleBackend};
    use std::collections::{BTreeMap, HashMap};

    fn sentences(n: usize) -> Vec<Sentence> {
        (0..n)
            .map(|i| Sentence::new(format!("the farmer number {i} planted corn"), "t"))
            .collect()
    }

    #[test]
    fn two_member_set_always_yields_that_pair() {
        let set = RelationSet::new(vec![Relation::Need, Relation::Want], BTreeMap::new()).unwrap();
        for id in 0..200 {
            let (a, b) = assign_relations(id, 3, &set);
            let mut pair = [a, b];
            pair.sort();
            assert_eq!(pair, [Relation::Need, Relation::Want]);
        }
    }

    #[test]
    fn assignment_is_deterministic() {
        let set = RelationSet::default();
        assert_eq!(assign_relations(42, 7, &set), assign_relations(42, 7, &set));
    }

    #[test]
    fn unordered_pairs_are_uniform() {
        // frequency oracle: 15 unordered pairs, 6000 draws, each within 15% of 400
        let set = RelationSet::default();
        let mut counts: HashMap<(Relation, Relation), usize> = HashMap::new();
        for id in 0..6000u64 {
            let (a, b) = assign_relations(id.wrapping_mul(0x9e37_79b9), 7, &set);
            assert_ne!(a, b);
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        for (pair, c) in counts {
            assert!((340..=460).contains(&c), "{pair:?}: {c}");
        }
    }

    #[test]
    fn oracle_tuples_follow_protocol() {
        let set = RelationSet::default();
        let b = TupleBuilder::new(&OracleBackend, &set, 7);
        let out = b.build_all(&sentences(300));
        assert_eq!(out.len(), 300);
        let mut primary_first = 0;
        for (o, s) in out.iter().zip(sentences(300)) {
            let TupleOutcome::Tuple(t) = o else { panic!("{o:?}") };
            assert_eq!(t.subject, s);
            assert_ne!(t.relation, t.spare_relation);
            assert_eq!(t.inference.relation, t.relation);
            assert_eq!(t.spare_inference.relation, t.spare_relation);
            assert_eq!(t.inference.subject_id, s.sentence_id);
            assert_eq!(t.spare_inference.subject_id, s.sentence_id);
            let (first, _) = assign_relations(s.sentence_id, 7, &set);
            primary_first += usize::from(first == t.relation);
        }
        // coin flip, not "first sampled wins"
        assert!((100..=200).contains(&primary_first), "{primary_first}");
        assert_eq!(out, b.build_all(&sentences(300)));
    }

    /// Says `none` for chosen relations, fails for chosen subjects.
    struct Picky {
        none_for: Vec<Relation>,
        fail_subject: Option<u64>,
    }
    impl KnowledgeBackend for Picky {
        fn label(&self) -> &str {
            "picky"
        }
        fn query(&self, q: &Query) -> Result<Answer, BackendError> {
            if Some(q.subject_id) == self.fail_subject {
                return Err(BackendError::Fatal("down".into()));
            }
            let text = if self.none_for.contains(&q.relation) {
                "none".to_string()
            } else {
                format!("{} for {}", q.surface_id, q.subject_id)
            };
            Ok(Answer { text, cached: false })
        }
    }

    #[test]
    fn filtered_relation_is_resampled_once() {
        let set = RelationSet::default();
        let backend = Picky { none_for: vec![Relation::Need], fail_subject: None };
        let b = TupleBuilder::new(&backend, &set, 11);
        let mut resampled = 0;
        for s in sentences(200) {
            let (x, y) = assign_relations(s.sentence_id, 11, &set);
            let TupleOutcome::Tuple(t) = b.build_tuple(&s) else { panic!() };
            assert!(t.relation != Relation::Need && t.spare_relation != Relation::Need);
            assert_ne!(t.relation, t.spare_relation);
            if x == Relation::Need || y == Relation::Need {
                resampled += 1;
                let kept = if x == Relation::Need { y } else { x };
                assert!(t.relation == kept || t.spare_relation == kept);
            }
        }
        assert!(resampled > 0);
    }

    #[test]
    fn drops_are_accounted() {
        // two-member set: a filtered relation has nothing to resample from
        let set = RelationSet::new(vec![Relation::Need, Relation::Want], BTreeMap::new()).unwrap();
        let input = sentences(50);
        let backend = Picky { none_for: vec![Relation::Want], fail_subject: Some(input[3].sentence_id) };
        let b = TupleBuilder::new(&backend, &set, 1);
        let out = b.build_all(&input);
        assert_eq!(out.len(), input.len());
        for (i, o) in out.iter().enumerate() {
            let TupleOutcome::Dropped(d) = o else { panic!() };
            assert_eq!(d.sentence_id, input[i].sentence_id);
            let expected = if i == 3 { DropReason::BackendFailure } else { DropReason::FilteredInference };
            assert_eq!(d.reason, expected);
        }
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let set = RelationSet::default();
        let mut b = TupleBuilder::new(&OracleBackend, &set, 5);
        let input = sentences(500);
        let serial = b.build_all(&input);
        b.parallelism = 8;
        b.chunk_size = 64;
        assert_eq!(serial, b.build_all(&input));
    }

    #[test]
    fn record_roundtrip() {
        let set = RelationSet::default();
        let TupleOutcome::Tuple(t) = TupleBuilder::new(&OracleBackend, &set, 5).build_tuple(&sentences(1)[0]) else {
            panic!()
        };
        let rec = t.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: TupleRecord = serde_json::from_str(&json).unwrap();
        let t2 = back.into_tuple("oracle");
        assert_eq!(t2.to_record(), rec);
        assert_eq!(t2.subject.sentence_id, t.subject.sentence_id);
        assert_eq!(t2.subject.token_count, t.subject.token_count);
    }
}
