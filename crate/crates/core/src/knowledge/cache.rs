use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{clean_inference, Answer, BackendError, KnowledgeBackend, Query};

/// One cache line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub sentence_id: u64,
    pub relation: String,
    pub inference: String,
    pub backend: String,
}

/// Append-only JSONL store of inferences keyed by `(sentence_id, surface_id)`.
///
/// Reads are concurrent; appends are serialized and flushed line by line.
/// Unparseable lines found when opening are skipped with a warning.
pub struct InferenceCache {
    path: PathBuf,
    map: RwLock<HashMap<(u64, String), String>>,
    writer: Mutex<BufWriter<File>>,
    skipped: usize,
}

impl InferenceCache {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut map = HashMap::new();
        let mut skipped = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(&line) {
                    Ok(e) => {
                        // first answer wins
                        map.entry((e.sentence_id, e.relation)).or_insert(e.inference);
                    }
                    Err(err) => {
                        skipped += 1;
                        tracing::warn!(path = %path.display(), line = n + 1, %err, "skipping corrupt cache line");
                    }
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            map: RwLock::new(map),
            writer: Mutex::new(BufWriter::new(file)),
            skipped,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Corrupt lines ignored when the file was opened.
    pub fn skipped_lines(&self) -> usize {
        self.skipped
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self, sentence_id: u64, surface_id: &str) -> Option<String> {
        self.map
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&(sentence_id, surface_id.to_string()))
            .cloned()
    }

    /// Record an inference unless the key is already present.
    pub fn store(&self, entry: CacheEntry) -> std::io::Result<()> {
        let key = (entry.sentence_id, entry.relation.clone());
        {
            let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
            if map.contains_key(&key) {
                return Ok(());
            }
            map.insert(key, entry.inference.clone());
        }
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        serde_json::to_writer(&mut *w, &entry)?;
        w.write_all(b"\n")?;
        w.flush()
    }
}

/// Cache-first wrapper around another backend. Only answers that survive
/// the inference filter are stored.
pub struct CachedBackend<B> {
    inner: B,
    cache: InferenceCache,
    label: String,
}

impl<B: KnowledgeBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: InferenceCache) -> Self {
        let label = inner.label().to_string();
        Self { inner, cache, label }
    }

    pub fn cache(&self) -> &InferenceCache {
        &self.cache
    }
}

impl<B: KnowledgeBackend> KnowledgeBackend for CachedBackend<B> {
    fn label(&self) -> &str {
        &self.label
    }

    fn query(&self, query: &Query) -> Result<Answer, BackendError> {
        if let Some(text) = self.cache.lookup(query.subject_id, &query.surface_id) {
            return Ok(Answer { text, cached: true });
        }
        let answer = self.inner.query(query)?;
        if clean_inference(&answer.text, None).is_some() {
            let entry = CacheEntry {
                sentence_id: query.subject_id,
                relation: query.surface_id.clone(),
                inference: answer.text.clone(),
                backend: self.label.clone(),
            };
            if let Err(e) = self.cache.store(entry) {
                tracing::warn!(path = %self.cache.path().display(), error = %e, "cache append failed");
            }
        }
        Ok(answer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{OracleBackend, Relation, RelationSet};
    use proptest::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn entry(id: u64, rel: &str, text: &str) -> CacheEntry {
        CacheEntry {
            sentence_id: id,
            relation: rel.into(),
            inference: text.into(),
            backend: "test".into(),
        }
    }

    #[test]
    fn store_then_lookup_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let cache = InferenceCache::open(&path).unwrap();
        assert_eq!(cache.lookup(1, "xNeed"), None);
        cache.store(entry(1, "xNeed", "to buy food")).unwrap();
        cache.store(entry(1, "xNeed", "something else")).unwrap();
        assert_eq!(cache.lookup(1, "xNeed").as_deref(), Some("to buy food"));
        assert_eq!(cache.lookup(1, "xWant"), None);
        drop(cache);
        let reopened = InferenceCache::open(&path).unwrap();
        assert_eq!(reopened.lookup(1, "xNeed").as_deref(), Some("to buy food"));
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
    }

    #[test]
    fn corrupt_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let good = serde_json::to_string(&entry(3, "xWant", "to rest")).unwrap();
        std::fs::write(&path, format!("{{not json\n{good}\n\n{{\"sentence_id\": 1}}\n")).unwrap();
        let cache = InferenceCache::open(&path).unwrap();
        assert_eq!(cache.skipped_lines(), 2);
        assert_eq!(cache.lookup(3, "xWant").as_deref(), Some("to rest"));
    }

    struct Counting<B>(B, AtomicUsize);
    impl<B: KnowledgeBackend> KnowledgeBackend for Counting<B> {
        fn label(&self) -> &str {
            self.0.label()
        }
        fn query(&self, q: &Query) -> Result<Answer, BackendError> {
            self.1.fetch_add(1, Ordering::SeqCst);
            self.0.query(q)
        }
    }

    #[test]
    fn cached_backend_hits_inner_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = InferenceCache::open(dir.path().join("c.jsonl")).unwrap();
        let backend = CachedBackend::new(Counting(OracleBackend, AtomicUsize::new(0)), cache);
        let q = Query::new(9, "she walked the dog home", Relation::Want, &RelationSet::default());
        let a = backend.query(&q).unwrap();
        let b = backend.query(&q).unwrap();
        assert_eq!(a.text, b.text);
        assert!(!a.cached && b.cached);
        assert_eq!(backend.inner.1.load(Ordering::SeqCst), 1);
    }

    proptest! {
        #[test]
        fn cache_is_transparent(subjects in proptest::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,6}", 1..20)) {
            let dir = tempfile::tempdir().unwrap();
            let cache = InferenceCache::open(dir.path().join("c.jsonl")).unwrap();
            let cached = CachedBackend::new(OracleBackend, cache);
            let set = RelationSet::default();
            for (i, s) in subjects.iter().enumerate() {
                let q = Query::new(i as u64, s, Relation::ALL[i % 6], &set);
                let direct = OracleBackend.query(&q).unwrap().text;
                prop_assert_eq!(&cached.query(&q).unwrap().text, &direct);
                prop_assert_eq!(&cached.query(&q).unwrap().text, &direct);
            }
        }
    }
}
