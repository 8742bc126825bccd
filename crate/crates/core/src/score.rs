// SPDX-License-Identifier: Apache-2.0

//! The line-delimited score record shared by every indicator.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// One `(document, indicator, parameter set)` result.
///
/// Undefined values (for instance disruption of an uncited document) are
/// `None` and serialise as `null`, never as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub doc_id: String,
    pub year: i32,
    pub indicator: String,
    /// `journals`, `keywords`, `title`, `abstract` or `citations`.
    pub entity: String,
    /// Canonical `key=value` list of the parameters that produced the score.
    pub params: String,
    pub scores: BTreeMap<String, Option<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counts: BTreeMap<String, u64>,
    /// Values at [`stats::STANDARD_PERCENTILES`] of the document's distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentiles: Option<Vec<f64>>,
    /// The raw per-pair distribution, ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<f64>>,
}

impl ScoreRecord {
    pub fn new(doc_id: &str, year: i32, indicator: &str, entity: &str, params: &str) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            year,
            indicator: indicator.to_string(),
            entity: entity.to_string(),
            params: params.to_string(),
            scores: BTreeMap::new(),
            counts: BTreeMap::new(),
            percentiles: None,
            distribution: None,
        }
    }

    pub fn score(mut self, name: &str, value: Option<f64>) -> Self {
        self.scores.insert(name.to_string(), value);
        self
    }

    pub fn count(mut self, name: &str, value: u64) -> Self {
        self.counts.insert(name.to_string(), value);
        self
    }

    /// Attaches a distribution (sorted here) and its standard percentiles.
    pub fn with_distribution(mut self, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        if !values.is_empty() {
            self.percentiles = Some(stats::standard_percentiles(&values));
        }
        self.distribution = Some(values);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scores.get(name).copied().flatten()
    }
}

/// Canonical parameter fingerprint: `k1=v1,k2=v2` in the given order.
pub fn fingerprint(pairs: &[(&str, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_scores(path: &Path, records: &[ScoreRecord]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_are_non_decreasing() {
        let r = ScoreRecord::new("d", 2000, "lee", "journals", "")
            .with_distribution(vec![3.0, -1.0, 2.0, 0.5]);
        let p = r.percentiles.unwrap();
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.distribution.unwrap(), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn undefined_scores_serialize_as_null() {
        let r = ScoreRecord::new("d", 2000, "disruption", "citations", "").score("di1", None);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(r#""di1":null"#));
        let back: ScoreRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
