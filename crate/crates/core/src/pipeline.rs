//! Stage orchestration over the intermediate files in `out_dir`.
//!
//! ```text
//! corpus files -> sentences.jsonl -> tuples.jsonl (+ tuple_drops.jsonl)
//!              -> part-*.jsonl + manifest.json (+ csrp_drops.jsonl)
//! ```
//!
//! Each `cmd_*` reads its input artifact and writes its output artifact, so
//! any stage can be rerun on its own.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::concept::{BaselineTagger, ConceptTagger, ExternalTagger, TagError, TokenizedSentence};
use crate::config::{BackendSpec, ConfigError, PipelineConfig, TaggerSpec};
use crate::corpus::{dedupe_and_sample, read_documents, segment_all, IngestError, Sentence};
use crate::drops::{DropReason, DropRecord};
use crate::emit::{self, mix, DatasetManifest, DatasetRecord, DatasetStats, EmitError};
use crate::infill::{InfillingEngine, RenderedTuple, TaggedTuple};
use crate::knowledge::{
    CachedBackend, GenerateOptions, HttpBackend, InferenceCache, KnowledgeBackend, OracleBackend,
};
use crate::mcq::{McqBuilder, Verbalizer};
use crate::tuples::{CommonsenseTuple, TupleBuilder, TupleOutcome, TupleRecord};
use crate::validate::{validate_dataset, ValidateError, ValidateOptions, ValidationReport};

pub const SENTENCES_FILE: &str = "sentences.jsonl";
pub const TUPLES_FILE: &str = "tuples.jsonl";
pub const TUPLE_DROPS_FILE: &str = "tuple_drops.jsonl";
pub const CSRP_DROPS_FILE: &str = "csrp_drops.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {detail}")]
    Format { path: PathBuf, line: usize, detail: String },
    #[error("knowledge backend: {0}")]
    Backend(String),
    #[error("concept tagger: {0}")]
    Tagger(#[from] TagError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error("validation failed with {0} violation(s)")]
    ValidationFailed(usize),
}

impl PipelineError {
    /// 2 config, 3 backend or tagger, 4 validation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Backend(_) | PipelineError::Tagger(_) => 3,
            PipelineError::ValidationFailed(_) => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Ingest(_) => "ingest",
            PipelineError::Io { .. } | PipelineError::Format { .. } => "io",
            PipelineError::Backend(_) => "backend",
            PipelineError::Tagger(_) => "tagger",
            PipelineError::Emit(_) => "emit",
            PipelineError::Validate(_) => "validate",
            PipelineError::ValidationFailed(_) => "validation_failed",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Write one JSON value per line.
pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<usize, PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut n = 0;
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| io_err(path)(e.into()))?;
        out.write_all(b"\n").map_err(io_err(path))?;
        n += 1;
    }
    out.flush().map_err(io_err(path))?;
    Ok(n)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| PipelineError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Segment, normalize, deduplicate and sample the configured corpus.
pub fn ingest(cfg: &PipelineConfig) -> Result<Vec<Sentence>, PipelineError> {
    let mut docs = Vec::new();
    for path in &cfg.corpus.paths {
        docs.extend(read_documents(path, cfg.corpus.mode)?);
    }
    let sentences = segment_all(&docs, &cfg.segment_options());
    let total = sentences.len();
    let kept = dedupe_and_sample(sentences, cfg.n, cfg.seed);
    tracing::info!(documents = docs.len(), segmented = total, kept = kept.len(), "ingest");
    Ok(kept)
}

pub fn build_backend(spec: &BackendSpec) -> Result<Box<dyn KnowledgeBackend>, PipelineError> {
    Ok(match spec {
        BackendSpec::Oracle {} => Box::new(OracleBackend),
        BackendSpec::Http { base_url, decoding, timeout_ms, .. } => Box::new(HttpBackend::new(
            base_url,
            decoding.clone(),
            Duration::from_millis(*timeout_ms),
        )),
        BackendSpec::Cached { path, inner } => {
            let cache = InferenceCache::open(path).map_err(io_err(path))?;
            if cache.skipped_lines() > 0 {
                tracing::warn!(path = %path.display(), skipped = cache.skipped_lines(), "corrupt cache lines ignored");
            }
            Box::new(CachedBackend::new(build_backend(inner)?, cache))
        }
    })
}

pub fn build_tagger(spec: &TaggerSpec) -> Result<Box<dyn ConceptTagger>, PipelineError> {
    Ok(match spec {
        TaggerSpec::Baseline {} => Box::new(BaselineTagger),
        TaggerSpec::External { command, batch_size } => {
            Box::new(ExternalTagger::spawn(command)?.with_batch_size(*batch_size))
        }
    })
}

fn generate_options(cfg: &PipelineConfig) -> Result<GenerateOptions, PipelineError> {
    let sentinels = cfg
        .masking
        .sentinels()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(GenerateOptions {
        sentinel_marker: Some(sentinels.marker().to_string()),
        ..GenerateOptions::default()
    })
}

/// Tuples and drop records, both in sentence order.
pub fn infer(
    cfg: &PipelineConfig,
    sentences: &[Sentence],
    backend: &dyn KnowledgeBackend,
) -> Result<(Vec<CommonsenseTuple>, Vec<DropRecord>), PipelineError> {
    let relations = cfg.relation_set()?;
    let mut builder = TupleBuilder::new(backend, &relations, cfg.seed);
    builder.parallelism = cfg.backend.parallelism().unwrap_or_else(rayon::current_num_threads);
    builder.options = generate_options(cfg)?;
    let mut tuples = Vec::with_capacity(sentences.len());
    let mut drops = Vec::new();
    for outcome in builder.build_all(sentences) {
        match outcome {
            TupleOutcome::Tuple(t) => tuples.push(t),
            TupleOutcome::Dropped(d) => drops.push(d),
        }
    }
    let failures = drops.iter().filter(|d| d.reason == DropReason::BackendFailure).count();
    tracing::info!(tuples = tuples.len(), dropped = drops.len(), backend_failures = failures, "infer");
    if !sentences.is_empty() && failures == sentences.len() {
        let detail = drops.first().map_or(String::new(), |d| d.detail.clone());
        return Err(PipelineError::Backend(format!(
            "every query failed, first error: {detail}"
        )));
    }
    Ok((tuples, drops))
}

/// Concept flags for the subject and inference of every tuple.
pub fn tag_tuples(
    cfg: &PipelineConfig,
    tuples: &[CommonsenseTuple],
    tagger: &dyn ConceptTagger,
) -> Result<Vec<TaggedTuple>, PipelineError> {
    let relations = cfg.relation_set()?;
    let mut batch: Vec<TokenizedSentence> = tuples
        .par_iter()
        .flat_map_iter(|t| {
            let id = t.sentence_id();
            [TokenizedSentence::new(id, &t.subject.text), TokenizedSentence::new(id, &t.inference.text)]
        })
        .collect();
    tagger.tag_batch(&mut batch)?;
    Ok(tuples
        .par_iter()
        .zip(batch.par_chunks(2))
        .map(|(t, pair)| {
            let rendered = RenderedTuple::new(&t.subject.text, relations.surface(t.relation), &t.inference.text);
            TaggedTuple::from_masks(t.sentence_id(), rendered, &pair[0].concept_mask, &pair[1].concept_mask)
        })
        .collect())
}

/// Both example streams, mixed, plus the CSRP drop records.
pub fn build_records(
    cfg: &PipelineConfig,
    tuples: &[CommonsenseTuple],
    tagger: &dyn ConceptTagger,
) -> Result<(Vec<DatasetRecord>, Vec<DropRecord>), PipelineError> {
    let engine = InfillingEngine::new(cfg.masking.clone(), cfg.seed)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let tagged = tag_tuples(cfg, tuples, tagger)?;
    let csti: Vec<DatasetRecord> = tagged
        .par_iter()
        .map(|t| DatasetRecord::Csti(engine.example(t)))
        .collect();

    let mcq = McqBuilder {
        seed: cfg.seed,
        pool_shard_size: cfg.mcq.pool_shard_size,
        verbalizer: Verbalizer::with_overrides(&cfg.mcq.questions),
        target_style: cfg.mcq.target,
    };
    let mut csrp = Vec::with_capacity(tuples.len());
    let mut drops = Vec::new();
    for r in mcq.build_all(tuples) {
        match r {
            Ok(rec) => csrp.push(DatasetRecord::Csrp(rec)),
            Err(d) => drops.push(d),
        }
    }
    tracing::info!(csti = csti.len(), csrp = csrp.len(), dropped = drops.len(), "build");
    Ok((mix(csti, csrp, cfg.emit.mode, cfg.emit.ratio, cfg.seed), drops))
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

/// Corpus to `sentences.jsonl` (or `out`). Returns the sentence count.
pub fn cmd_ingest(cfg: &PipelineConfig, out: Option<&Path>) -> Result<usize, PipelineError> {
    let sentences = ingest(cfg)?;
    let path = out.map_or_else(|| out_path(cfg, SENTENCES_FILE), Path::to_path_buf);
    write_jsonl(&path, &sentences)
}

/// Sentences to `tuples.jsonl` plus `tuple_drops.jsonl` beside it.
pub fn cmd_infer(cfg: &PipelineConfig, input: Option<&Path>, out: Option<&Path>) -> Result<usize, PipelineError> {
    let input = input.map_or_else(|| out_path(cfg, SENTENCES_FILE), Path::to_path_buf);
    let out = out.map_or_else(|| out_path(cfg, TUPLES_FILE), Path::to_path_buf);
    let sentences: Vec<Sentence> = read_jsonl(&input)?;
    let backend = build_backend(&cfg.backend)?;
    let (tuples, drops) = infer(cfg, &sentences, backend.as_ref())?;
    let records: Vec<TupleRecord> = tuples.iter().map(CommonsenseTuple::to_record).collect();
    write_jsonl(&out, &records)?;
    write_jsonl(&sibling(&out, TUPLE_DROPS_FILE), &drops)?;
    Ok(records.len())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from(name), |p| p.join(name))
}

/// Tuples to shards and manifest in `out` (default `out_dir`).
pub fn cmd_build(cfg: &PipelineConfig, input: Option<&Path>, out: Option<&Path>) -> Result<DatasetManifest, PipelineError> {
    let input = input.map_or_else(|| out_path(cfg, TUPLES_FILE), Path::to_path_buf);
    let out_dir = out.map_or_else(|| cfg.out_dir.clone(), Path::to_path_buf);
    let records: Vec<TupleRecord> = read_jsonl(&input)?;
    let tuples: Vec<CommonsenseTuple> = records.into_iter().map(|r| r.into_tuple("")).collect();
    let drops_path = sibling(&input, TUPLE_DROPS_FILE);
    let mut drops: Vec<DropRecord> = if drops_path.exists() { read_jsonl(&drops_path)? } else { Vec::new() };

    let tagger = build_tagger(&cfg.tagger)?;
    let (stream, csrp_drops) = build_records(cfg, &tuples, tagger.as_ref())?;
    write_jsonl(&out_dir.join(CSRP_DROPS_FILE), &csrp_drops)?;
    drops.extend(csrp_drops);
    Ok(emit::write_shards(stream, cfg.emit.shard_size, &out_dir, cfg.snapshot(), &drops)?)
}

/// Stats recomputed from the shards of the dataset in `out_dir`.
pub fn cmd_stats(out_dir: &Path) -> Result<DatasetStats, PipelineError> {
    let manifest = DatasetManifest::load(out_dir)?;
    let mut drops = Vec::new();
    for name in [TUPLE_DROPS_FILE, CSRP_DROPS_FILE] {
        let p = out_dir.join(name);
        if p.exists() {
            drops.extend(read_jsonl::<DropRecord>(&p)?);
        }
    }
    Ok(emit::compute_stats(out_dir, &manifest, &drops)?)
}

/// Validate and log each violation; the caller decides the exit status.
pub fn cmd_validate(out_dir: &Path, opts: &ValidateOptions) -> Result<ValidationReport, PipelineError> {
    let report = validate_dataset(out_dir, opts)?;
    for v in &report.violations {
        tracing::debug!("{v}");
    }
    Ok(report)
}

/// Every stage in sequence, through the intermediate files.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<DatasetManifest, PipelineError> {
    cmd_ingest(cfg, None)?;
    cmd_infer(cfg, None, None)?;
    cmd_build(cfg, None, None)
}
