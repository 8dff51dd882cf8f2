//! Work directory layout, atomic writes and per-stage run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::MissingArtifact;

pub const CORPUS: &str = "corpus.jsonl";
pub const STORE: &str = "store.xemb";
pub const DIRECT_PAIRS: &str = "pairs.direct.jsonl";
pub const PAIRS: &str = "pairs.jsonl";
pub const COMPONENTS: &str = "components.jsonl";
pub const CUT_EDGES: &str = "cut_edges.jsonl";
pub const DEDUP_GROUPS: &str = "dedup.jsonl";
pub const DEDUP_PAIRS: &str = "pairs.dedup.jsonl";
pub const DEDUP_COMPONENTS: &str = "components.dedup.jsonl";
pub const SPLITS: &str = "splits.jsonl";
pub const SPLIT_WARNINGS: &str = "split_warnings.jsonl";
pub const SAMPLES: &str = "samples";
pub const STATS: &str = "stats.tsv";
pub const PLAN: &str = "plan.json";
pub const BATCHES: &str = "batches.jsonl";
pub const SCORES: &str = "scores.jsonl";
pub const EVAL_SUMMARY: &str = "eval_summary.jsonl";
pub const CORRELATION: &str = "correlation.json";

/// Stage that writes a given artifact, for error messages.
fn producer(artifact: &str) -> &'static str {
    match artifact {
        CORPUS | STORE => "embed-import",
        DIRECT_PAIRS => "align",
        PAIRS | COMPONENTS | CUT_EDGES => "induce",
        DEDUP_GROUPS | DEDUP_PAIRS | DEDUP_COMPONENTS => "dedup",
        SPLITS | SPLIT_WARNINGS => "split",
        SAMPLES => "materialize",
        PLAN => "plan",
        SCORES => "evaluate",
        _ => "an earlier stage",
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct RunManifest<'a> {
    stage: &'a str,
    config_sha256: String,
    params: &'a BTreeMap<String, serde_json::Value>,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}

/// Collects hashes of everything a stage reads and writes.
pub struct StageRun<'a> {
    pub work: &'a Path,
    pub stage: &'static str,
    config_text: String,
    params: BTreeMap<String, serde_json::Value>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl<'a> StageRun<'a> {
    pub fn new(work: &'a Path, stage: &'static str, config_text: String) -> Self {
        StageRun {
            work,
            stage,
            config_text,
            params: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.work.join(rel)
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable param"),
        );
    }

    /// Fails with exit code 2 when a work-directory artifact is absent.
    pub fn require(&self, rel: &str) -> Result<PathBuf> {
        let p = self.path(rel);
        if !p.exists() {
            return Err(MissingArtifact {
                stage: self.stage,
                artifact: rel.to_string(),
                producer: producer(rel),
            }
            .into());
        }
        Ok(p)
    }

    /// Reads and hashes a work-directory input.
    pub fn read(&mut self, rel: &str) -> Result<Vec<u8>> {
        let p = self.require(rel)?;
        let bytes = std::fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
        self.inputs.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    /// Reads and hashes a user-supplied input, recorded under `role`.
    pub fn read_external(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(format!("@{role}"), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(rel), bytes)?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            stage: self.stage,
            config_sha256: sha256_hex(self.config_text.as_bytes()),
            params: &self.params,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(
            &self.work.join("manifests").join(format!("{}.json", self.stage)),
            &bytes,
        )
    }
}
