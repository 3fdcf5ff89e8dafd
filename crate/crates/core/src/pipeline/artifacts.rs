use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Descriptors,
    Participate,
    Bands,
    Simnet,
    Map,
    Cluster,
    Overlay,
    Categraph,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Descriptors,
        Stage::Participate,
        Stage::Bands,
        Stage::Simnet,
        Stage::Map,
        Stage::Cluster,
        Stage::Overlay,
        Stage::Categraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Descriptors => "descriptors",
            Stage::Participate => "participate",
            Stage::Bands => "bands",
            Stage::Simnet => "simnet",
            Stage::Map => "map",
            Stage::Cluster => "cluster",
            Stage::Overlay => "overlay",
            Stage::Categraph => "categraph",
        }
    }

    /// Direct upstream stages.
    pub fn depends_on(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Descriptors => &[Stage::Ingest],
            Stage::Participate => &[Stage::Ingest, Stage::Descriptors],
            Stage::Bands => &[Stage::Participate],
            Stage::Simnet => &[Stage::Ingest],
            Stage::Map => &[Stage::Simnet],
            Stage::Cluster => &[Stage::Simnet, Stage::Map],
            Stage::Overlay => &[Stage::Ingest, Stage::Simnet, Stage::Map, Stage::Cluster, Stage::Bands],
            Stage::Categraph => &[Stage::Ingest, Stage::Bands],
        }
    }

    /// All upstream stages, nearest first, without duplicates.
    pub fn ancestors(self) -> Vec<Stage> {
        let mut out = Vec::new();
        let mut queue: Vec<Stage> = self.depends_on().to_vec();
        while let Some(s) = queue.first().copied() {
            queue.remove(0);
            if !out.contains(&s) {
                out.push(s);
                queue.extend_from_slice(s.depends_on());
            }
        }
        out
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Record of one stage run: what it read and what it wrote, by content hash.
/// Paths are relative to the output directory; external inputs are keyed by
/// their config role (`input:corpus`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: Stage,
    pub params: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn manifest_path(out: &Path, stage: Stage) -> PathBuf {
    out.join(stage.name()).join("manifest.json")
}

pub fn read_manifest(out: &Path, stage: Stage) -> Option<Manifest> {
    let text = std::fs::read(manifest_path(out, stage)).ok()?;
    serde_json::from_slice(&text).ok()
}

/// Collects a stage's writes and commits its manifest.
pub struct StageWriter<'a> {
    out: &'a Path,
    stage: Stage,
    params: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl<'a> StageWriter<'a> {
    pub fn begin(out: &'a Path, stage: Stage, params: String) -> Result<Self, PipelineError> {
        let dir = out.join(stage.name());
        // an interrupted run must not leave a manifest vouching for old files
        let _ = std::fs::remove_file(manifest_path(out, stage));
        std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(stage, &dir, e))?;
        Ok(StageWriter {
            out,
            stage,
            params,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn record_input(&mut self, key: impl Into<String>, bytes: &[u8]) {
        self.inputs.insert(key.into(), sha256_hex(bytes));
    }

    /// Reads an upstream artifact, recording its hash.
    pub fn read_artifact(&mut self, rel: &str) -> Result<Vec<u8>, PipelineError> {
        let path = self.out.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| PipelineError::io(self.stage, &path, e))?;
        self.inputs.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let rel = format!("{}/{name}", self.stage.name());
        let path = self.out.join(&rel);
        std::fs::write(&path, bytes).map_err(|e| PipelineError::io(self.stage, &path, e))?;
        self.outputs.insert(rel, sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest, PipelineError> {
        let m = Manifest {
            stage: self.stage,
            params: self.params,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let path = manifest_path(self.out, self.stage);
        let mut text = serde_json::to_vec_pretty(&m).expect("manifest serializes");
        text.push(b'\n');
        std::fs::write(&path, text).map_err(|e| PipelineError::io(self.stage, &path, e))?;
        Ok(m)
    }
}

/// Verifies that every upstream stage of `stage` has run, that its outputs
/// are untouched, that it consumed the current outputs of its own upstream
/// stages, and that it ran with the current parameters.
///
/// `params` gives the expected parameter hash for each stage.
pub fn check_dependencies(
    out: &Path,
    stage: Stage,
    params: &dyn Fn(Stage) -> String,
) -> Result<(), PipelineError> {
    for dep in stage.ancestors() {
        let m = read_manifest(out, dep).ok_or(PipelineError::MissingArtifact {
            stage,
            needs: dep,
            path: manifest_path(out, dep),
        })?;
        for (rel, hash) in &m.outputs {
            let path = out.join(rel);
            match hash_file(&path) {
                Err(_) => {
                    return Err(PipelineError::MissingArtifact {
                        stage,
                        needs: dep,
                        path,
                    })
                }
                Ok(h) if &h != hash => {
                    return Err(PipelineError::StaleArtifact {
                        stage,
                        needs: dep,
                        reason: format!("{rel} was modified after {dep} wrote it"),
                    })
                }
                Ok(_) => {}
            }
        }
        for (rel, hash) in m.inputs.iter().filter(|(k, _)| !k.starts_with("input:")) {
            let current = hash_file(&out.join(rel)).ok();
            if current.as_ref() != Some(hash) {
                return Err(PipelineError::StaleArtifact {
                    stage,
                    needs: dep,
                    reason: format!("{dep} was built from an older {rel}; re-run {dep}"),
                });
            }
        }
        if m.params != params(dep) {
            return Err(PipelineError::StaleArtifact {
                stage,
                needs: dep,
                reason: format!("configuration of {dep} changed since it ran; re-run {dep}"),
            });
        }
    }
    Ok(())
}
