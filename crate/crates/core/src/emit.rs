//! Mixing, sharded JSONL output, manifest and realized statistics.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::drops::{self, DropRecord};
use crate::infill::{InfillingExample, MaskingScheme};
use crate::mcq::{self, CsrpRecord, LETTERS};
use crate::seed::{run_rng, Stream};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const INCOMPLETE_MARKER: &str = ".INCOMPLETE";
/// Examples per interleaving block under [`EmissionMode::Multitask`].
pub const MIX_BLOCK: usize = 40;

/// One output line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum DatasetRecord {
    Csti(InfillingExample),
    Csrp(CsrpRecord),
}

impl DatasetRecord {
    pub fn sentence_id(&self) -> u64 {
        match self {
            DatasetRecord::Csti(e) => e.sentence_id,
            DatasetRecord::Csrp(e) => e.example.sentence_id,
        }
    }

    pub fn is_csti(&self) -> bool {
        matches!(self, DatasetRecord::Csti(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionMode {
    #[default]
    Multitask,
    CstiThenCsrp,
    CsrpThenCsti,
}

/// CSTI:CSRP proportion for multitask mixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio(pub u32, pub u32);

impl Default for Ratio {
    fn default() -> Self {
        Ratio(1, 1)
    }
}

impl Ratio {
    pub fn is_valid(self) -> bool {
        self.0 > 0 && self.1 > 0
    }

    /// CSTI examples in the first `blocks` blocks, by cumulative rounding.
    fn first_share(self, blocks: usize) -> usize {
        let total = (blocks * MIX_BLOCK) as u128;
        let (a, b) = (self.0 as u128, self.1 as u128);
        ((2 * total * a + a + b) / (2 * (a + b))) as usize
    }
}

/// Combine the two streams. Multitask fills fixed-size blocks at `ratio`
/// and shuffles inside each block; once one side runs out the rest of the
/// other follows in order.
pub fn mix<T>(csti: Vec<T>, csrp: Vec<T>, mode: EmissionMode, ratio: Ratio, seed: u64) -> Vec<T> {
    assert!(ratio.is_valid(), "ratio terms must be positive");
    let (mut a, mut b) = (csti, csrp);
    match mode {
        EmissionMode::CstiThenCsrp => {
            a.append(&mut b);
            a
        }
        EmissionMode::CsrpThenCsti => {
            b.append(&mut a);
            b
        }
        EmissionMode::Multitask => {
            if a.is_empty() || b.is_empty() {
                tracing::warn!(
                    csti = a.len(),
                    csrp = b.len(),
                    "one stream is empty, multitask output is the other stream alone"
                );
                a.append(&mut b);
                return a;
            }
            let mut rng = run_rng(seed, Stream::Mixing);
            let mut out = Vec::with_capacity(a.len() + b.len());
            let (mut a, mut b) = (a.into_iter().peekable(), b.into_iter().peekable());
            let mut block_index = 0;
            while a.peek().is_some() && b.peek().is_some() {
                let want_a = ratio.first_share(block_index + 1) - ratio.first_share(block_index);
                let mut block: Vec<T> = a.by_ref().take(want_a).collect();
                block.extend(b.by_ref().take(MIX_BLOCK - block.len()));
                if block.len() < MIX_BLOCK {
                    block.extend(a.by_ref().take(MIX_BLOCK - block.len()));
                }
                block.shuffle(&mut rng);
                out.append(&mut block);
                block_index += 1;
            }
            out.extend(a);
            out.extend(b);
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceAudit {
    pub passed: bool,
    pub checked: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub csti_examples: u64,
    pub csrp_examples: u64,
    pub scheme_counts: BTreeMap<MaskingScheme, u64>,
    pub masked_tokens: u64,
    pub maskable_tokens: u64,
    /// Masked over maskable tokens across all CSTI examples.
    pub corruption_rate: f64,
    pub corruption_rate_by_scheme: BTreeMap<MaskingScheme, f64>,
    pub answer_histogram: BTreeMap<String, u64>,
    pub provenance_audit: ProvenanceAudit,
    pub drop_reasons: BTreeMap<String, u64>,
}

/// Running totals for [`DatasetStats`].
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    csti: u64,
    csrp: u64,
    per_scheme: BTreeMap<MaskingScheme, (u64, u64, u64)>,
    answers: [u64; 4],
    audit_failures: u64,
}

impl StatsAccumulator {
    pub fn add(&mut self, r: &DatasetRecord) {
        match r {
            DatasetRecord::Csti(e) => {
                self.csti += 1;
                let s = self.per_scheme.entry(e.scheme).or_default();
                s.0 += 1;
                s.1 += e.masked_tokens() as u64;
                s.2 += e.maskable_tokens() as u64;
            }
            DatasetRecord::Csrp(e) => {
                self.csrp += 1;
                match mcq::audit(&e.example) {
                    Ok(()) => self.answers[e.example.answer_index] += 1,
                    Err(_) => self.audit_failures += 1,
                }
            }
        }
    }

    pub fn finish<'a>(&self, drops: impl IntoIterator<Item = &'a DropRecord>) -> DatasetStats {
        let ratio = |m: u64, n: u64| if n == 0 { 0.0 } else { m as f64 / n as f64 };
        let masked = self.per_scheme.values().map(|s| s.1).sum();
        let maskable = self.per_scheme.values().map(|s| s.2).sum();
        DatasetStats {
            csti_examples: self.csti,
            csrp_examples: self.csrp,
            scheme_counts: MaskingScheme::ALL
                .iter()
                .map(|s| (*s, self.per_scheme.get(s).map_or(0, |v| v.0)))
                .collect(),
            masked_tokens: masked,
            maskable_tokens: maskable,
            corruption_rate: ratio(masked, maskable),
            corruption_rate_by_scheme: self
                .per_scheme
                .iter()
                .map(|(s, v)| (*s, ratio(v.1, v.2)))
                .collect(),
            answer_histogram: LETTERS
                .iter()
                .zip(self.answers)
                .map(|(l, c)| (l.to_string(), c))
                .collect(),
            provenance_audit: ProvenanceAudit {
                passed: self.audit_failures == 0,
                checked: self.csrp,
                failures: self.audit_failures,
            },
            drop_reasons: drops::histogram(drops),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub examples: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Resolved pipeline configuration.
    pub config: serde_json::Value,
    pub shards: Vec<ShardEntry>,
    pub total_examples: u64,
    /// Hash of all shard bytes in order.
    pub dataset_sha256: String,
    pub stats: DatasetStats,
}

impl DatasetManifest {
    pub fn load(out_dir: &Path) -> Result<Self, EmitError> {
        let path = out_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|source| EmitError::Io { path: path.clone(), source })?;
        serde_json::from_str(&text).map_err(|e| EmitError::Format { path, detail: e.to_string() })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
    #[error("shard_size must be positive")]
    ShardSize,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> EmitError + '_ {
    move |source| EmitError::Io { path: path.to_path_buf(), source }
}

pub fn shard_name(index: usize) -> String {
    format!("part-{index:05}.jsonl")
}

fn is_shard_name(name: &str) -> bool {
    name.strip_prefix("part-")
        .and_then(|r| r.strip_suffix(".jsonl"))
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct ShardWriter {
    path: PathBuf,
    file: String,
    out: BufWriter<File>,
    hash: Sha256,
    examples: u64,
}

impl ShardWriter {
    fn create(out_dir: &Path, index: usize) -> Result<Self, EmitError> {
        let file = shard_name(index);
        let path = out_dir.join(&file);
        let out = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        Ok(Self { path, file, out, hash: Sha256::new(), examples: 0 })
    }

    fn write_line(&mut self, line: &[u8]) -> Result<(), EmitError> {
        self.out.write_all(line).map_err(io_err(&self.path))?;
        self.hash.update(line);
        self.examples += 1;
        Ok(())
    }

    fn finish(self) -> Result<(ShardEntry, [u8; 32]), EmitError> {
        let path = self.path;
        self.out.into_inner().map_err(|e| io_err(&path)(e.into_error()))?.sync_all().map_err(io_err(&path))?;
        let digest: [u8; 32] = self.hash.finalize().into();
        Ok((ShardEntry { file: self.file, examples: self.examples, sha256: hex(&digest) }, digest))
    }
}

/// Write `records` as `part-NNNNN.jsonl` shards of at most `shard_size`
/// lines, then `manifest.json`. A `.INCOMPLETE` marker exists for the
/// duration of the write and is left behind if it fails. Shards from an
/// earlier run in the same directory are removed first.
pub fn write_shards<I>(
    records: I,
    shard_size: usize,
    out_dir: &Path,
    config: serde_json::Value,
    drops: &[DropRecord],
) -> Result<DatasetManifest, EmitError>
where
    I: IntoIterator<Item = DatasetRecord>,
{
    if shard_size == 0 {
        return Err(EmitError::ShardSize);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let marker = out_dir.join(INCOMPLETE_MARKER);
    fs::write(&marker, b"").map_err(io_err(&marker))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(io_err(&manifest_path))?;
    }
    for entry in fs::read_dir(out_dir).map_err(io_err(out_dir))? {
        let entry = entry.map_err(io_err(out_dir))?;
        if entry.file_name().to_str().is_some_and(is_shard_name) {
            fs::remove_file(entry.path()).map_err(io_err(&entry.path()))?;
        }
    }

    let mut stats = StatsAccumulator::default();
    let mut shards = Vec::new();
    let mut dataset_hash = Sha256::new();
    let mut current: Option<ShardWriter> = None;
    let mut line = Vec::with_capacity(512);
    for record in records {
        if current.as_ref().is_some_and(|w| w.examples as usize == shard_size) {
            let (entry, _) = current.take().expect("checked").finish()?;
            shards.push(entry);
        }
        if current.is_none() {
            current = Some(ShardWriter::create(out_dir, shards.len())?);
        }
        stats.add(&record);
        line.clear();
        serde_json::to_writer(&mut line, &record).expect("records serialize");
        line.push(b'\n');
        dataset_hash.update(&line);
        current.as_mut().expect("opened").write_line(&line)?;
    }
    if let Some(w) = current {
        shards.push(w.finish()?.0);
    }

    let manifest = DatasetManifest {
        config,
        total_examples: shards.iter().map(|s| s.examples).sum(),
        shards,
        dataset_sha256: hex(&dataset_hash.finalize()),
        stats: stats.finish(drops),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    fs::write(&manifest_path, bytes).map_err(io_err(&manifest_path))?;
    fs::remove_file(&marker).map_err(io_err(&marker))?;
    Ok(manifest)
}

/// Records of one shard file, parsed line by line.
pub fn read_shard(path: &Path) -> Result<Vec<DatasetRecord>, EmitError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let r = serde_json::from_str(&line).map_err(|e| EmitError::Format {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", i + 1),
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Recompute the stats block from the shards listed in a manifest.
pub fn compute_stats(out_dir: &Path, manifest: &DatasetManifest, drops: &[DropRecord]) -> Result<DatasetStats, EmitError> {
    let mut acc = StatsAccumulator::default();
    for s in &manifest.shards {
        for r in read_shard(&out_dir.join(&s.file))? {
            acc.add(&r);
        }
    }
    Ok(acc.finish(drops))
}

/// SHA-256 of a file, hex encoded.
pub fn file_sha256(path: &Path) -> Result<String, EmitError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex(&Sha256::digest(&bytes)))
}
