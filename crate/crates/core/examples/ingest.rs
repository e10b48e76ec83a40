//! Segment raw documents into normalized, deduplicated sentences.
//!
//!     cargo run --example ingest

use cskt::corpus::{dedupe_and_sample, segment_all, RawDocument, SegmentOptions};

const TEXT: &str = "Dr. Smith took a nap after lunch. She woke up feeling rested and went \
back to work. The cat chased a mouse across the kitchen floor!\n\
Too short.\n\
She woke up feeling rested and went back to work. Café owners opened their shops early on Monday.";

fn main() {
    let docs: Vec<RawDocument> = TEXT
        .lines()
        .enumerate()
        .map(|(i, line)| RawDocument::from_bytes(format!("inline:{i}"), line.as_bytes(), "inline").unwrap())
        .collect();

    let segmented = segment_all(&docs, &SegmentOptions::default());
    println!("{} sentences after segmentation and length filtering", segmented.len());

    // duplicates collapse onto their first occurrence
    let kept = dedupe_and_sample(segmented, 100, 7);
    for s in &kept {
        println!("{:>20}  {:>2} tokens  {}", s.sentence_id, s.token_count, s.text);
    }
}
