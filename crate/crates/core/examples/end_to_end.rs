//! The whole pipeline on a synthetic corpus: sentences, tuples, shards,
//! manifest, then validation.
//!
//!     cargo run --release --example end_to_end -- 5000

use cskt::config::PipelineConfig;
use cskt::pipeline;
use cskt::validate::ValidateOptions;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2_000);
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, cskt::synth::corpus_text(n, 7)).unwrap();

    let mut cfg = PipelineConfig::from_toml(&format!(
        r#"
        n = {n}
        seed = 7
        out_dir = "{}"
        [corpus]
        paths = ["{}"]
        [emit]
        mode = "multitask"
        shard_size = 1000
        "#,
        dir.path().join("out").display(),
        corpus.display()
    ))
    .unwrap();
    cfg.apply_env();

    let start = std::time::Instant::now();
    let manifest = pipeline::cmd_run(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} examples in {} shards, {:.0} sentences/s",
        manifest.total_examples,
        manifest.shards.len(),
        n as f64 / secs
    );
    println!("{}", serde_json::to_string_pretty(&manifest.stats).unwrap());

    let report = pipeline::cmd_validate(&cfg.out_dir, &ValidateOptions::default()).unwrap();
    println!("validation: {} violations", report.violations.len());
}
