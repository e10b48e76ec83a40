//! Assign two relations per sentence and fetch both inferences.
//!
//!     cargo run --example tuples

use cskt::corpus::Sentence;
use cskt::knowledge::{OracleBackend, RelationSet};
use cskt::tuples::{TupleBuilder, TupleOutcome};

fn main() {
    let sentences: Vec<Sentence> = cskt::synth::sentences(5, 3)
        .into_iter()
        .map(|s| Sentence::new(s, "synth"))
        .collect();
    let relations = RelationSet::default();
    let builder = TupleBuilder::new(&OracleBackend, &relations, 42);

    for outcome in builder.build_all(&sentences) {
        match outcome {
            TupleOutcome::Tuple(t) => {
                println!("{}", t.subject.text);
                println!("  primary {:<7} {}", t.relation.name(), t.inference.text);
                println!("  spare   {:<7} {}", t.spare_relation.name(), t.spare_inference.text);
                println!("  record  {}", serde_json::to_string(&t.to_record()).unwrap());
            }
            TupleOutcome::Dropped(d) => println!("dropped {}: {}", d.sentence_id, d.reason),
        }
    }
}
