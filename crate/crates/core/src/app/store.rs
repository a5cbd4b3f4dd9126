//! Artifact directory layout, atomic writes and the invocation lock.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::EmbeddingIndex;
use crate::error::{Error, Result};
use crate::graph::{parse_snapshot, to_snapshot};
use crate::pipeline::KnowledgeBase;
use crate::verbalizer::VerbalizationCache;
use crate::walker::{parse_corpus, write_corpus};

pub const CONFIG_FILE: &str = "run_config.json";
pub const GRAPH_FILE: &str = "graph.kg";
pub const CORPUS_FILE: &str = "corpus.tsv";
pub const VERBALIZATIONS_FILE: &str = "verbalizations.tsv";
pub const INDEX_FILE: &str = "index.bin";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANSWERS_FILE: &str = "answers.jsonl";
pub const EVAL_RECORDS_FILE: &str = "eval_records.jsonl";
pub const EVAL_REPORT_FILE: &str = "eval_report.jsonl";
pub const EVAL_TIMING_FILE: &str = "eval_timing.json";
const LOCK_FILE: &str = ".walkrag.lock";

/// Exclusive use of an artifact directory for the life of the value.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so
/// readers see either the old or the new content.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Checksums of the knowledge-base files, written after them. A crash
/// between renames leaves a mismatch that loading reports.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    fingerprint: String,
    files: BTreeMap<String, String>,
}

pub fn save_kb(dir: &Path, kb: &KnowledgeBase) -> Result<()> {
    let files: [(&str, Vec<u8>); 4] = [
        (INDEX_FILE, kb.index.to_bytes()),
        (VERBALIZATIONS_FILE, kb.verbalizations.write().into_bytes()),
        (CORPUS_FILE, write_corpus(&kb.corpus).into_bytes()),
        (GRAPH_FILE, to_snapshot(&kb.graph).into_bytes()),
    ];
    let manifest = Manifest {
        fingerprint: kb.corpus.fingerprint.0.clone(),
        files: files.iter().map(|(n, b)| ((*n).to_owned(), digest(b))).collect(),
    };
    for (name, bytes) in &files {
        write_atomic(dir, name, bytes)?;
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(dir, MANIFEST_FILE, json.as_bytes())
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    fs::read(&path).map_err(|e| Error::Artifact { path, message: format!("{e}; run a build first") })
}

fn artifact_err(dir: &Path, name: &str, e: Error) -> Error {
    Error::Artifact { path: dir.join(name), message: e.to_string() }
}

pub fn load_kb(dir: &Path, undirected: bool) -> Result<KnowledgeBase> {
    let manifest: Manifest = serde_json::from_slice(&read(dir, MANIFEST_FILE)?)
        .map_err(|e| artifact_err(dir, MANIFEST_FILE, e.into()))?;
    let mut raw = BTreeMap::new();
    for name in [INDEX_FILE, VERBALIZATIONS_FILE, CORPUS_FILE, GRAPH_FILE] {
        let bytes = read(dir, name)?;
        if manifest.files.get(name) != Some(&digest(&bytes)) {
            return Err(Error::Artifact {
                path: dir.join(name),
                message: "checksum does not match the manifest (interrupted write?); run a full build".into(),
            });
        }
        raw.insert(name, bytes);
    }
    let text = |name: &str| {
        String::from_utf8(raw[name].clone())
            .map_err(|_| Error::Artifact { path: dir.join(name), message: "not UTF-8".into() })
    };
    let graph = parse_snapshot(&text(GRAPH_FILE)?).map_err(|e| artifact_err(dir, GRAPH_FILE, e))?;
    let corpus = parse_corpus(&text(CORPUS_FILE)?).map_err(|e| artifact_err(dir, CORPUS_FILE, e))?;
    let verbalizations =
        VerbalizationCache::parse(&text(VERBALIZATIONS_FILE)?).map_err(|e| artifact_err(dir, VERBALIZATIONS_FILE, e))?;
    let index = EmbeddingIndex::from_bytes(&raw[INDEX_FILE]).map_err(|e| artifact_err(dir, INDEX_FILE, e))?;
    let found = graph.fingerprint();
    if corpus.fingerprint != found || manifest.fingerprint != found.0 {
        return Err(Error::StaleCorpus { expected: corpus.fingerprint.0.clone(), found: found.0 });
    }
    Ok(KnowledgeBase { graph, corpus, verbalizations, index, undirected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let lock = DirLock::acquire(dir.path()).unwrap();
        assert!(matches!(DirLock::acquire(dir.path()), Err(Error::Locked(_))));
        drop(lock);
        DirLock::acquire(dir.path()).unwrap();
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "f", b"one").unwrap();
        write_atomic(dir.path(), "f", b"two").unwrap();
        assert_eq!(fs::read(dir.path().join("f")).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
