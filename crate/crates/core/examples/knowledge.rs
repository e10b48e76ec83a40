//! Query a knowledge backend through the retrying client and a JSONL cache.
//!
//! Uses the deterministic oracle by default. Pass a model server URL to
//! query `POST {url}/generate` instead:
//!
//!     cargo run --example knowledge -- http://localhost:8000

use std::time::Duration;

use cskt::knowledge::{
    format_prompt, generate, CachedBackend, GenerateOptions, Generated, HttpBackend, InferenceCache,
    KnowledgeBackend, OracleBackend, Query, Relation, RelationSet,
};

fn main() {
    let backend: Box<dyn KnowledgeBackend> = match std::env::args().nth(1) {
        Some(url) => Box::new(HttpBackend::new(&url, serde_json::json!({"beams": 5}), Duration::from_secs(10))),
        None => Box::new(OracleBackend),
    };
    let dir = tempfile::tempdir().unwrap();
    let cache = InferenceCache::open(dir.path().join("cache.jsonl")).unwrap();
    let backend = CachedBackend::new(backend, cache);

    let relations = RelationSet::default();
    let subject = "He takes a nap after lunch.";
    println!("prompt: {}", format_prompt(subject, relations.surface(Relation::Effect)));

    for round in ["first", "second"] {
        for r in [Relation::Need, Relation::Effect, Relation::React] {
            let q = Query::new(1, subject, r, &relations);
            match generate(&q, &backend, &GenerateOptions::default()) {
                Ok(Generated::Inference(i)) => {
                    println!("{round:>6} {:<8} cached={:<5} {}", q.surface_id, i.cached, i.text)
                }
                Ok(Generated::Filtered { raw }) => println!("{round:>6} {:<8} filtered {raw:?}", q.surface_id),
                Err(e) => println!("{round:>6} {:<8} error: {e}", q.surface_id),
            }
        }
    }
    println!("{} cache entries", backend.cache().len());
}
