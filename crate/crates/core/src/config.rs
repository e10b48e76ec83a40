//! Declarative pipeline configuration, TOML or JSON.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentMode, SegmentOptions};
use crate::emit::{EmissionMode, Ratio};
use crate::infill::SpanMaskConfig;
use crate::knowledge::{Relation, RelationSet};
use crate::mcq::TargetStyle;

pub const CACHE_ENV: &str = "CSKT_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    /// Sentences kept after deduplication.
    pub n: usize,
    pub seed: u64,
    pub relations: RelationsConfig,
    pub backend: BackendSpec,
    pub tagger: TaggerSpec,
    pub masking: SpanMaskConfig,
    pub mcq: McqConfig,
    pub emit: EmitConfig,
    /// Where every artifact goes. Left out of the manifest snapshot.
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusConfig::default(),
            n: 10_000_000,
            seed: 0,
            relations: RelationsConfig::default(),
            backend: BackendSpec::Oracle {},
            tagger: TaggerSpec::Baseline {},
            masking: SpanMaskConfig::default(),
            mcq: McqConfig::default(),
            emit: EmitConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub paths: Vec<PathBuf>,
    pub mode: DocumentMode,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let s = SegmentOptions::default();
        Self {
            paths: Vec::new(),
            mode: DocumentMode::Lines,
            min_tokens: s.min_tokens,
            max_tokens: s.max_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelationsConfig {
    pub members: Vec<Relation>,
    /// Surface tokens replacing the defaults (`xIntent`, ...).
    pub surface_ids: BTreeMap<Relation, String>,
}

impl Default for RelationsConfig {
    fn default() -> Self {
        Self {
            members: Relation::ALL.to_vec(),
            surface_ids: Relation::ALL
                .iter()
                .map(|r| (*r, r.default_surface_id().to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    Oracle {},
    Http {
        base_url: String,
        #[serde(default = "default_parallelism")]
        parallelism: usize,
        /// Passed through to the server untouched.
        #[serde(default = "empty_object")]
        decoding: serde_json::Value,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
    Cached {
        path: PathBuf,
        inner: Box<BackendSpec>,
    },
}

fn default_parallelism() -> usize {
    8
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl BackendSpec {
    /// Concurrent requests the backend should see.
    pub fn parallelism(&self) -> Option<usize> {
        match self {
            BackendSpec::Oracle {} => None,
            BackendSpec::Http { parallelism, .. } => Some(*parallelism),
            BackendSpec::Cached { inner, .. } => inner.parallelism(),
        }
    }

    /// Point the cache at `path`, adding a cache layer if there is none.
    pub fn with_cache_path(self, path: PathBuf) -> Self {
        match self {
            BackendSpec::Cached { inner, .. } => BackendSpec::Cached { path, inner },
            other => BackendSpec::Cached { path, inner: Box::new(other) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaggerSpec {
    Baseline {},
    External {
        command: Vec<String>,
        #[serde(default = "default_tagger_batch")]
        batch_size: usize,
    },
}

fn default_tagger_batch() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McqConfig {
    /// Tuples per distractor-pool shard.
    pub pool_shard_size: usize,
    pub target: TargetStyle,
    /// Question text overrides per relation.
    pub questions: BTreeMap<Relation, String>,
}

impl Default for McqConfig {
    fn default() -> Self {
        Self {
            pool_shard_size: 10_000,
            target: TargetStyle::Letter,
            questions: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitConfig {
    pub mode: EmissionMode,
    pub ratio: Ratio,
    pub shard_size: usize,
}

impl Default for EmitConfig {
    fn default() -> Self {
        Self {
            mode: EmissionMode::Multitask,
            ratio: Ratio(1, 1),
            shard_size: 100_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    /// Parse `path` (`.json` as JSON, anything else as TOML) and validate.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        };
        cfg.map_err(|e| match e {
            ConfigError::Parse { detail, .. } => ConfigError::Parse { path: path.to_path_buf(), detail },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::new(),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::new(),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply the cache path from the environment, if set.
    pub fn apply_env(&mut self) {
        if let Some(path) = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()) {
            let backend = std::mem::replace(&mut self.backend, BackendSpec::Oracle {});
            self.backend = backend.with_cache_path(PathBuf::from(path));
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let c = &self.corpus;
        if c.min_tokens == 0 || c.min_tokens > c.max_tokens {
            return bad(format!(
                "corpus token bounds {}..={} are empty or start at zero",
                c.min_tokens, c.max_tokens
            ));
        }
        self.relation_set()?;
        self.masking
            .validate(c.max_tokens)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.mcq.pool_shard_size == 0 {
            return bad("mcq.pool_shard_size must be positive".into());
        }
        if !self.emit.ratio.is_valid() {
            return bad(format!("emit.ratio {:?} must have positive terms", self.emit.ratio));
        }
        if self.emit.shard_size == 0 {
            return bad("emit.shard_size must be positive".into());
        }
        validate_backend(&self.backend)?;
        if let TaggerSpec::External { command, batch_size } = &self.tagger {
            if command.is_empty() || *batch_size == 0 {
                return bad("tagger.command must be non-empty and batch_size positive".into());
            }
        }
        Ok(())
    }

    pub fn relation_set(&self) -> Result<RelationSet, ConfigError> {
        RelationSet::new(self.relations.members.clone(), self.relations.surface_ids.clone())
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn segment_options(&self) -> SegmentOptions {
        SegmentOptions {
            min_tokens: self.corpus.min_tokens,
            max_tokens: self.corpus.max_tokens,
            sentinel_marker: self.masking.sentinels().ok().map(|s| s.marker().to_string()),
        }
    }

    /// The resolved configuration as embedded in the manifest.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out_dir");
        }
        v
    }

    /// Rebuild from a manifest snapshot.
    pub fn from_snapshot(v: &serde_json::Value) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_value(v.clone()).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("manifest.json"),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn validate_backend(b: &BackendSpec) -> Result<(), ConfigError> {
    match b {
        BackendSpec::Oracle {} => Ok(()),
        BackendSpec::Http { base_url, parallelism, .. } => {
            if base_url.is_empty() || *parallelism == 0 {
                Err(ConfigError::Invalid(
                    "backend.base_url must be set and parallelism positive".into(),
                ))
            } else {
                Ok(())
            }
        }
        BackendSpec::Cached { inner, .. } => {
            if matches!(**inner, BackendSpec::Cached { .. }) {
                return Err(ConfigError::Invalid("nested cache layers".into()));
            }
            validate_backend(inner)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let c = PipelineConfig::from_toml("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.n, 10_000_000);
        assert_eq!(c.relations.members.len(), 6);
    }

    #[test]
    fn full_toml() {
        let c = PipelineConfig::from_toml(
            r#"
            n = 100
            seed = 7
            out_dir = "o"
            [corpus]
            paths = ["a.txt"]
            mode = "paragraphs"
            [relations]
            members = ["need", "want"]
            [backend]
            kind = "cached"
            path = "cache.jsonl"
            [backend.inner]
            kind = "http"
            base_url = "http://localhost:1"
            decoding = { beams = 5 }
            [tagger]
            kind = "external"
            command = ["python3", "tag.py"]
            [masking]
            corruption_rate = 0.2
            [emit]
            mode = "csti_then_csrp"
            ratio = [2, 1]
            "#,
        )
        .unwrap();
        assert_eq!(c.corpus.mode, DocumentMode::Paragraphs);
        assert_eq!(c.backend.parallelism(), Some(8));
        assert_eq!(c.emit.ratio, Ratio(2, 1));
        assert_eq!(c.masking.corruption_rate, 0.2);
        assert_eq!(c.relation_set().unwrap().len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "nn = 1",
            "[masking]\nrate = 0.1",
            "[backend]\nkind = \"oracle\"\nurl = \"x\"",
            "[backend]\nkind = \"http\"\nbase_url = \"x\"\nretries = 2",
            "[emit]\nshards = 3",
        ] {
            assert!(
                matches!(PipelineConfig::from_toml(text), Err(ConfigError::Parse { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "n = 0",
            "[masking]\nscheme_weights = [0.0, 0.0, 0.0, 0.0]",
            "[masking]\ncorruption_rate = 1.5",
            "[relations]\nmembers = [\"need\"]",
            "[emit]\nratio = [0, 1]",
            "[corpus]\nmin_tokens = 10\nmax_tokens = 5",
        ] {
            assert!(
                matches!(PipelineConfig::from_toml(text), Err(ConfigError::Invalid(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn json_alternative_and_snapshot_round_trip() {
        let c = PipelineConfig::from_json(r#"{"n": 5, "seed": 3, "backend": {"kind": "oracle"}}"#).unwrap();
        assert_eq!(c.n, 5);
        let snap = c.snapshot();
        assert!(snap.get("out_dir").is_none());
        assert_eq!(snap["masking"]["corruption_rate"], 0.15);
        let back = PipelineConfig::from_snapshot(&snap).unwrap();
        assert_eq!(back.seed, 3);
        assert_eq!(back.masking, c.masking);
    }

    #[test]
    fn cache_override_wraps_or_replaces() {
        let b = BackendSpec::Oracle {}.with_cache_path("a".into());
        assert_eq!(b, BackendSpec::Cached { path: "a".into(), inner: Box::new(BackendSpec::Oracle {}) });
        let b = b.with_cache_path("b".into());
        assert_eq!(b, BackendSpec::Cached { path: "b".into(), inner: Box::new(BackendSpec::Oracle {}) });
    }
}
