//! Re-check an emitted dataset against the invariants of every stage.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::emit::{
    self, hex, DatasetManifest, DatasetRecord, EmissionMode, StatsAccumulator, INCOMPLETE_MARKER,
};
use crate::infill::{
    balanced_partition, reconstruct, render_corruption, span_budget, span_count, InfillingExample,
    MaskingScheme, RenderedTuple, Segment, Sentinels, SpanParams,
};
use crate::knowledge::RelationSet;
use crate::mcq::{self, render_mcq, CsrpRecord, OptionKind, TargetStyle, Verbalizer};
use crate::pipeline::TUPLES_FILE;
use crate::seed::splitmix64;
use crate::tuples::{CommonsenseTuple, TupleRecord};

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    /// Fraction of CSTI examples whose text is re-derived from the tuples.
    /// Structural checks always cover every example.
    pub csti_sample_rate: f64,
    pub check_hashes: bool,
    /// Tuples file; defaults to `tuples.jsonl` in the dataset directory.
    pub tuples: Option<PathBuf>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { csti_sample_rate: 1.0, check_hashes: true, tuples: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Shard file, or the artifact the problem was found in.
    pub file: String,
    /// 1-based line, 0 when the violation is not tied to a line.
    pub line: usize,
    pub sentence_id: Option<u64>,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if self.line > 0 {
            write!(f, ":{}", self.line)?;
        }
        if let Some(id) = self.sentence_id {
            write!(f, " sentence {id}")?;
        }
        write!(f, " [{}] {}", self.rule, self.detail)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub csti_examples: u64,
    pub csti_rederived: u64,
    pub csrp_examples: u64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error(transparent)]
    Emit(#[from] emit::EmitError),
    #[error("manifest config: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

struct Context {
    relations: RelationSet,
    sentinels: Sentinels,
    params: SpanParams,
    verbalizer: Verbalizer,
    target_style: TargetStyle,
    tuples: HashMap<u64, CommonsenseTuple>,
    sample_rate: f64,
}

fn sampled(sentence_id: u64, rate: f64) -> bool {
    rate >= 1.0 || (splitmix64(sentence_id) as f64 / u64::MAX as f64) < rate
}

/// Validate the dataset in `out_dir`. `Err` means the dataset could not be
/// read at all; invariant failures are reported as violations.
pub fn validate_dataset(out_dir: &Path, opts: &ValidateOptions) -> Result<ValidationReport, ValidateError> {
    let manifest = DatasetManifest::load(out_dir)?;
    let config = PipelineConfig::from_snapshot(&manifest.config)?;
    let mut report = ValidationReport::default();
    let flag = |file: &str, line, sentence_id, rule, detail: String| Violation {
        file: file.to_string(),
        line,
        sentence_id,
        rule,
        detail,
    };

    if out_dir.join(INCOMPLETE_MARKER).exists() {
        report.violations.push(flag(INCOMPLETE_MARKER, 0, None, "complete", "partial-output marker present".into()));
    }

    let tuples_path = opts.tuples.clone().unwrap_or_else(|| out_dir.join(TUPLES_FILE));
    let tuples = load_tuples(&tuples_path)?;
    let ctx = Context {
        relations: config.relation_set()?,
        sentinels: config.masking.sentinels().map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?,
        params: config.masking.span_params(),
        verbalizer: Verbalizer::with_overrides(&config.mcq.questions),
        target_style: config.mcq.target,
        tuples,
        sample_rate: opts.csti_sample_rate,
    };

    let shard_total: u64 = manifest.shards.iter().map(|s| s.examples).sum();
    if shard_total != manifest.total_examples {
        report.violations.push(flag(
            emit::MANIFEST_FILE,
            0,
            None,
            "conservation",
            format!("shard counts sum to {shard_total}, manifest says {}", manifest.total_examples),
        ));
    }

    let mut stats = StatsAccumulator::default();
    let mut csti_seen: HashSet<u64> = HashSet::new();
    let mut csrp_seen: HashSet<u64> = HashSet::new();
    let mut seen_csrp_before_csti = false;
    let mut seen_csti_before_csrp = false;
    let mut dataset_hash = Sha256::new();
    for shard in &manifest.shards {
        let path = out_dir.join(&shard.file);
        let f = File::open(&path).map_err(|source| ValidateError::Io { path: path.clone(), source })?;
        let mut lines = 0u64;
        let mut shard_hash = Sha256::new();
        for (i, line) in BufReader::new(f).split(b'\n').enumerate() {
            let mut line = line.map_err(|source| ValidateError::Io { path: path.clone(), source })?;
            let lineno = i + 1;
            lines += 1;
            line.push(b'\n');
            shard_hash.update(&line);
            dataset_hash.update(&line);
            let record: DatasetRecord = match serde_json::from_slice(&line) {
                Ok(r) => r,
                Err(e) => {
                    report.violations.push(flag(&shard.file, lineno, None, "parse", e.to_string()));
                    continue;
                }
            };
            stats.add(&record);
            let sid = record.sentence_id();
            let problems = match &record {
                DatasetRecord::Csti(e) => {
                    report.csti_examples += 1;
                    seen_csti_before_csrp |= !csrp_seen.is_empty();
                    if !csti_seen.insert(sid) {
                        vec![("conservation", "duplicate CSTI example".to_string())]
                    } else {
                        let deep = sampled(sid, ctx.sample_rate);
                        report.csti_rederived += u64::from(deep);
                        check_csti(e, &ctx, deep)
                    }
                }
                DatasetRecord::Csrp(e) => {
                    report.csrp_examples += 1;
                    seen_csrp_before_csti |= !csti_seen.is_empty();
                    if !csrp_seen.insert(sid) {
                        vec![("conservation", "duplicate CSRP example".to_string())]
                    } else {
                        check_csrp(e, &ctx)
                    }
                }
            };
            report
                .violations
                .extend(problems.into_iter().map(|(rule, d)| flag(&shard.file, lineno, Some(sid), rule, d)));
        }
        if lines != shard.examples {
            report.violations.push(flag(
                &shard.file,
                0,
                None,
                "conservation",
                format!("{lines} lines, manifest says {}", shard.examples),
            ));
        }
        if opts.check_hashes {
            let got = hex(&shard_hash.finalize());
            if got != shard.sha256 {
                report.violations.push(flag(&shard.file, 0, None, "hash", format!("sha256 {got}, manifest says {}", shard.sha256)));
            }
        }
    }
    if opts.check_hashes {
        let got = hex(&dataset_hash.finalize());
        if got != manifest.dataset_sha256 {
            report.violations.push(flag(emit::MANIFEST_FILE, 0, None, "hash", format!("dataset sha256 {got}, manifest says {}", manifest.dataset_sha256)));
        }
    }

    // every tuple yields exactly one CSTI example
    let mut missing: Vec<u64> = ctx.tuples.keys().filter(|id| !csti_seen.contains(id)).copied().collect();
    missing.sort_unstable();
    for id in missing.iter().take(20) {
        report.violations.push(flag(TUPLES_FILE, 0, Some(*id), "conservation", "tuple has no CSTI example".into()));
    }
    let order_broken = match config.emit.mode {
        EmissionMode::Multitask => false,
        EmissionMode::CstiThenCsrp => seen_csti_before_csrp,
        EmissionMode::CsrpThenCsti => seen_csrp_before_csti,
    };
    if order_broken {
        report.violations.push(flag(emit::MANIFEST_FILE, 0, None, "emission_order", format!("{:?} streams are interleaved", config.emit.mode)));
    }

    let mut recomputed = stats.finish(std::iter::empty());
    recomputed.drop_reasons = manifest.stats.drop_reasons.clone();
    if recomputed != manifest.stats {
        report.violations.push(flag(emit::MANIFEST_FILE, 0, None, "stats", "stats block does not match the shards".into()));
    }
    Ok(report)
}

fn load_tuples(path: &Path) -> Result<HashMap<u64, CommonsenseTuple>, ValidateError> {
    let io = |source| ValidateError::Io { path: path.to_path_buf(), source };
    let f = File::open(path).map_err(io)?;
    let mut out = HashMap::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io)?;
        let rec: TupleRecord = serde_json::from_str(&line).map_err(|e| {
            ValidateError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)),
            }
        })?;
        let t = rec.into_tuple("");
        out.insert(t.sentence_id(), t);
    }
    Ok(out)
}

fn allowed_segments(scheme: MaskingScheme) -> &'static [Segment] {
    match scheme {
        MaskingScheme::TextMasking => &[Segment::Subject],
        MaskingScheme::CommonsenseMasking => &[Segment::Inference],
        MaskingScheme::BidirectionalMasking => &[Segment::Subject, Segment::Inference],
        MaskingScheme::RelationMasking => &[Segment::Relation],
    }
}

fn segment_index(s: Segment) -> usize {
    match s {
        Segment::Subject => 0,
        Segment::Relation => 1,
        Segment::Inference => 2,
    }
}

type Problems = Vec<(&'static str, String)>;

fn check_csti(e: &InfillingExample, ctx: &Context, deep: bool) -> Problems {
    let mut p: Problems = Vec::new();
    let Some(t) = ctx.tuples.get(&e.sentence_id) else {
        return vec![("provenance", "no tuple with this sentence_id".into())];
    };
    let rendered = RenderedTuple::new(&t.subject.text, ctx.relations.surface(t.relation), &t.inference.text);
    let lengths = rendered.segment_lengths();
    if e.segment_lengths != lengths {
        p.push(("segments", format!("segment_lengths {:?}, tuple has {:?}", e.segment_lengths, lengths)));
        return p;
    }

    // span geometry
    let mut prev_end: Option<usize> = None;
    let mut per_segment: [Vec<usize>; 3] = Default::default();
    for s in &e.masked_spans {
        let seg_len = lengths[segment_index(s.segment)];
        if s.len == 0 || s.start + s.len > seg_len {
            p.push(("spans", format!("span {:?} outside its segment of {seg_len} tokens", (s.start, s.len))));
            return p;
        }
        if !allowed_segments(e.scheme).contains(&s.segment) {
            p.push(("scheme", format!("{} masks the {:?} segment", e.scheme.as_str(), s.segment)));
        }
        per_segment[segment_index(s.segment)].push(s.len);
    }
    for (start, len) in e.global_spans() {
        if let Some(end) = prev_end {
            if start <= end {
                p.push(("spans", format!("span at {start} overlaps or touches the previous one")));
            }
        }
        prev_end = Some(start + len);
    }
    for &seg in allowed_segments(e.scheme) {
        let n = lengths[segment_index(seg)];
        let lens = &per_segment[segment_index(seg)];
        let masked: usize = lens.iter().sum();
        if e.scheme == MaskingScheme::RelationMasking {
            if lens.as_slice() != [1] {
                p.push(("budget", "relation masking must mask exactly the relation token".into()));
            }
            continue;
        }
        let m = span_budget(n, &ctx.params);
        if n > 1 && masked >= n {
            p.push(("budget", format!("{seg:?} segment fully masked")));
        }
        if masked == 0 && m > 0 {
            p.push(("budget", format!("{seg:?} segment has no masked tokens")));
        }
        if masked > m {
            p.push(("budget", format!("{masked} masked tokens in {seg:?}, budget {m}")));
        }
        if lens.len() > 1 {
            let mut sorted = lens.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            if masked != m || sorted != balanced_partition(m, span_count(m, &ctx.params)) {
                p.push(("budget", format!("span lengths {lens:?} are not the planned partition of {m}")));
            }
        }
    }
    if !p.is_empty() {
        return p;
    }

    match reconstruct(e, lengths, &ctx.sentinels) {
        Err(err) => p.push(("round_trip", err.detail)),
        Ok(text) if deep && text != rendered.text => {
            p.push(("round_trip", "reconstruction differs from the rendered tuple".into()))
        }
        Ok(_) => {}
    }
    if deep {
        let (input, target) = render_corruption(&rendered.text, &rendered.tokens, &e.global_spans(), &ctx.sentinels);
        if input != e.input_text {
            p.push(("render", "input does not match the spans".into()));
        }
        if target != e.target_text {
            p.push(("render", "target does not match the spans".into()));
        }
    }
    p
}

fn check_csrp(r: &CsrpRecord, ctx: &Context) -> Problems {
    let e = &r.example;
    let mut p: Problems = Vec::new();
    if let Err(d) = mcq::audit(e) {
        p.push(("provenance", d));
        return p;
    }
    let (input, target) = render_mcq(e, &ctx.verbalizer, ctx.target_style);
    if input != r.input {
        p.push(("render", "input does not match the example".into()));
    }
    if target != r.target {
        p.push(("render", format!("target {:?}, expected {target:?}", r.target)));
    }
    let Some(t) = ctx.tuples.get(&e.sentence_id) else {
        p.push(("provenance", "no tuple with this sentence_id".into()));
        return p;
    };
    if e.context != t.subject.text || e.relation != t.relation {
        p.push(("provenance", "context or relation differs from the tuple".into()));
    }
    for o in &e.options {
        let ok = match o.kind {
            OptionKind::Correct => o.text == t.inference.text,
            OptionKind::SameSentenceDiffRelation => {
                o.text == t.spare_inference.text && o.source_relation == t.spare_relation
            }
            OptionKind::DiffSentenceSameRelation => ctx
                .tuples
                .get(&o.source_sentence_id)
                .is_some_and(|s| s.relation == e.relation && s.inference.text == o.text),
        };
        if !ok {
            p.push(("provenance", format!("{:?} option {:?} does not match its source tuple", o.kind, o.text)));
        }
    }
    p
}
