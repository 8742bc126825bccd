// SPDX-License-Identifier: Apache-2.0

//! Run manifests written next to every output file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub indicator: String,
    pub params: String,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub engine_version: String,
    /// Worker threads used; results do not depend on it.
    pub threads: usize,
    pub phases: Vec<PhaseTiming>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, indicator: &str, params: &str) -> Self {
        Self {
            command,
            indicator: indicator.to_string(),
            params: params.to_string(),
            inputs: Vec::new(),
            seed: None,
            engine_version: crate::ENGINE_VERSION.to_string(),
            threads: rayon::current_num_threads(),
            phases: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path, sha256: String) {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
    }

    /// Runs `f`, recording its wall-clock time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(PhaseTiming {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Equality ignoring timings, thread count and the literal command line.
    pub fn same_run(&self, other: &Self) -> bool {
        self.indicator == other.indicator
            && self.params == other.params
            && self
                .inputs
                .iter()
                .map(|i| &i.sha256)
                .eq(other.inputs.iter().map(|i| &i.sha256))
            && self.seed == other.seed
            && self.engine_version == other.engine_version
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

/// `<output>.manifest.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_run_identity() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(vec!["scinov".into(), "novelty".into()], "lee", "");
        m.add_input(Path::new("c.jsonl"), "ab".into());
        let v = m.time("score", || 41 + 1);
        assert_eq!(v, 42);
        let path = sidecar_path(&dir.path().join("lee_journals_2004.jsonl"));
        assert!(path
            .to_string_lossy()
            .ends_with("lee_journals_2004.jsonl.manifest.json"));
        m.write(&path).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back, m);
        let mut other = m.clone();
        other.phases.clear();
        other.threads = 99;
        assert!(m.same_run(&other));
        other.seed = Some(3);
        assert!(!m.same_run(&other));
    }
}
