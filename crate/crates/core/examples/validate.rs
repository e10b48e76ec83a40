//! Corrupt one line of an emitted dataset and watch the validator
//! name it.
//!
//!     cargo run --example validate

use std::fs;

use cskt::config::PipelineConfig;
use cskt::pipeline;
use cskt::validate::{validate_dataset, ValidateOptions};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    fs::write(&corpus, cskt::synth::corpus_text(200, 1)).unwrap();
    let cfg = PipelineConfig {
        n: 200,
        out_dir: dir.path().join("out"),
        corpus: cskt::config::CorpusConfig { paths: vec![corpus], ..Default::default() },
        ..PipelineConfig::default()
    };
    let manifest = pipeline::cmd_run(&cfg).unwrap();
    let clean = validate_dataset(&cfg.out_dir, &ValidateOptions::default()).unwrap();
    println!("clean dataset: {} violations", clean.violations.len());

    let shard = cfg.out_dir.join(&manifest.shards[0].file);
    let text = fs::read_to_string(&shard).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let i = lines.iter().position(|l| l.contains(r#""task":"csti""#)).unwrap();
    lines[i] = lines[i].replacen("<extra_id_0> ", "<extra_id_0> something else ", 1);
    fs::write(&shard, lines.join("\n") + "\n").unwrap();

    let report = validate_dataset(&cfg.out_dir, &ValidateOptions::default()).unwrap();
    for v in &report.violations {
        println!("{v}");
    }
}
