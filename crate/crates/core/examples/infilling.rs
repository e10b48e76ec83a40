//! Corrupt one tuple under every masking scheme and splice it back.
//!
//!     cargo run --example infilling

use cskt::concept::BaselineTagger;
use cskt::corpus::Sentence;
use cskt::infill::{corrupt, reconstruct, render_tuple, MaskingScheme, SpanMaskConfig, TaggedTuple};
use cskt::knowledge::{OracleBackend, RelationSet};
use cskt::seed::{item_rng, Stream};
use cskt::tuples::{TupleBuilder, TupleOutcome};

fn main() {
    let relations = RelationSet::default();
    let subject = Sentence::new("The young chef cooked a large dinner for the whole family on Sunday.", "inline");
    let TupleOutcome::Tuple(t) = TupleBuilder::new(&OracleBackend, &relations, 1).build_tuple(&subject) else {
        panic!("oracle never drops");
    };
    let tagged = TaggedTuple::tag(&t, &relations, &BaselineTagger).unwrap();

    // a higher rate than the default so the short example shows several spans
    let config = SpanMaskConfig { corruption_rate: 0.3, ..SpanMaskConfig::default() };
    let sentinels = config.sentinels().unwrap();
    println!("tuple:  {}\n", render_tuple(&t, &relations));

    for scheme in MaskingScheme::ALL {
        let mut rng = item_rng(5, t.sentence_id(), Stream::Infilling);
        let e = corrupt(&tagged, scheme, &config.span_params(), &sentinels, &mut rng);
        let back = reconstruct(&e, e.segment_lengths, &sentinels).unwrap();
        println!("{}", scheme.as_str());
        println!("  input:  {}", e.input_text);
        println!("  target: {}", e.target_text);
        println!("  exact reconstruction: {}", back == tagged.rendered.text);
    }
}
