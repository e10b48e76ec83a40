//! Build four-way relation-prediction items with a distractor pool.
//!
//!     cargo run --example relation_prediction

use cskt::corpus::Sentence;
use cskt::knowledge::{OracleBackend, RelationSet};
use cskt::mcq::{audit, McqBuilder, OptionKind};
use cskt::tuples::{TupleBuilder, TupleOutcome};

fn main() {
    let sentences: Vec<Sentence> = cskt::synth::sentences(60, 9)
        .into_iter()
        .map(|s| Sentence::new(s, "synth"))
        .collect();
    let relations = RelationSet::default();
    let tuples: Vec<_> = TupleBuilder::new(&OracleBackend, &relations, 9)
        .build_all(&sentences)
        .into_iter()
        .filter_map(|o| match o {
            TupleOutcome::Tuple(t) => Some(t),
            TupleOutcome::Dropped(_) => None,
        })
        .collect();

    let built = McqBuilder::new(9).build_all(&tuples);
    let ok = built.iter().filter(|r| r.is_ok()).count();
    println!("{ok} items from {} tuples\n", tuples.len());

    let item = built.into_iter().flatten().next().expect("at least one item");
    println!("input:  {}", item.input);
    println!("target: {}", item.target);
    for (i, o) in item.example.options.iter().enumerate() {
        let tag = match o.kind {
            OptionKind::Correct => "correct",
            OptionKind::SameSentenceDiffRelation => "same sentence, other relation",
            OptionKind::DiffSentenceSameRelation => "other sentence, same relation",
        };
        println!("  {i}: {:<32} {tag}", o.text);
    }
    println!("audit: {:?}", audit(&item.example));
}
