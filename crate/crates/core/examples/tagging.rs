//! Mark nouns and verbs with the rule-and-lexicon tagger and score it
//! against the bundled hand-annotated sentences.
//!
//!     cargo run --example tagging

use cskt::concept::{bundled_gold, score_tagger, tokenize, BaselineTagger, ConceptTagger};

fn main() {
    let tagger = BaselineTagger;
    for text in ["He wants to cook a meal for his friends.", "The old bridge collapsed during the storm."] {
        let tokens = tokenize(text);
        let mask = tagger.tag(&tokens).unwrap();
        let marked: Vec<String> = tokens
            .iter()
            .zip(&mask)
            .map(|(t, c)| if *c { format!("[{t}]") } else { t.clone() })
            .collect();
        println!("{}", marked.join(" "));
    }

    let gold = bundled_gold();
    let score = score_tagger(&tagger, &gold).unwrap();
    println!(
        "\n{} gold sentences: precision {:.3}, recall {:.3}",
        gold.len(),
        score.precision,
        score.recall
    );
}
