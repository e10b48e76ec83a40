//! Seeded synthetic corpora for tests, examples and benchmarks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &[
    "Alex", "Sam", "Jordan", "Taylor", "Morgan", "Casey", "Riley", "Jamie", "Avery", "Quinn",
    "Robin", "Drew", "Parker", "Reese", "Skyler", "Rowan", "Emery", "Hayden", "Logan", "Blake",
    "The teacher", "My neighbor", "The old farmer", "Her brother", "The new student",
    "A young doctor", "The chef", "His sister",
];

const ACTIONS: &[&str] = &[
    "bought", "cooked", "painted", "repaired", "borrowed", "cleaned", "carried", "found",
    "sold", "washed", "built", "ordered", "lost", "opened", "wrapped", "delivered", "moved",
    "returned", "measured", "planted",
];

const OBJECTS: &[&str] = &[
    "a bicycle", "the kitchen table", "a birthday cake", "the garden fence", "an old guitar",
    "the front door", "a wooden chair", "some fresh bread", "the broken window",
    "a small boat", "the family car", "a warm blanket", "the school bus", "a new phone",
    "the blue jacket", "a heavy box", "the library book", "a paper map", "the coffee machine",
    "a tomato plant",
];

const TAILS: &[&str] = &[
    "before the storm arrived", "after work on Friday", "for the summer festival",
    "with help from a friend", "during the long weekend", "because the store closed early",
    "in the morning", "at the end of the day", "for their grandmother", "near the river",
    "without asking anyone", "while the kids slept", "to surprise the team",
    "under the bright lights", "at the market downtown",
];

/// `n` distinct sentences of roughly 8 to 20 tokens.
pub fn sentences(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).expect("non-empty");
        let mut s = format!(
            "{} {} {} {}",
            pick(&mut rng, NAMES),
            pick(&mut rng, ACTIONS),
            pick(&mut rng, OBJECTS),
            pick(&mut rng, TAILS)
        );
        if rng.gen_bool(0.4) {
            s.push_str(&format!(" and then {} {}", pick(&mut rng, ACTIONS), pick(&mut rng, OBJECTS)));
        }
        s.push('.');
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Line-mode corpus text holding `n` distinct sentences, two to a line.
pub fn corpus_text(n: usize, seed: u64) -> String {
    let mut text = String::new();
    for pair in sentences(n, seed).chunks(2) {
        text.push_str(&pair.join(" "));
        text.push('\n');
    }
    text
}
