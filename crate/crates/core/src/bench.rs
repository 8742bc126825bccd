// SPDX-License-Identifier: Apache-2.0

//! Wall-clock comparison of indicators over synthetic corpora of growing size.

use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::corpus::{CorpusStore, IngestOptions, Provenance};
use crate::disruption::Measure;
use crate::error::{Error, Result};
use crate::graph::EntityKind;
use crate::manifest::RunManifest;
use crate::novelty::{FosterParams, LeeParams, UzziParams, WangParams};
use crate::pipeline::{run_indicator, Indicator};
use crate::semantic::{EmbeddingStore, ShibayamaParams};
use crate::synth::{synth_corpus, SynthParams};

/// Publication years of bench corpora; indicators score the middle year.
pub const BENCH_YEARS: (i32, i32) = (2000, 2009);
pub const BENCH_FOCAL_YEAR: i32 = 2005;

/// `name[:key=value]...`, for instance `uzzi:s=1` or `foster:resolution=0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub name: String,
    pub options: Vec<(String, String)>,
}

impl FromStr for BenchSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let options = parts
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| {
                        Error::InvalidParams(format!("bench option `{kv}` is not key=value"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = Self { name, options };
        spec.indicator(EntityKind::Journals, BENCH_FOCAL_YEAR, 0)?;
        Ok(spec)
    }
}

impl BenchSpec {
    fn option<T: FromStr>(&self, keys: &[&str], default: T) -> Result<T> {
        match self
            .options
            .iter()
            .find(|(k, _)| keys.contains(&k.as_str()))
        {
            Some((k, v)) => v
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad value `{v}` for `{k}`"))),
            None => Ok(default),
        }
    }

    pub fn indicator(&self, entity: EntityKind, year: i32, seed: u64) -> Result<Indicator> {
        Ok(match self.name.as_str() {
            "uzzi" => Indicator::Uzzi(UzziParams {
                samples: self.option(&["s", "samples"], crate::resampling::DEFAULT_SAMPLES)?,
                seed: self.option(&["seed"], seed)?,
                ..UzziParams::new(entity, year)
            }),
            "lee" => Indicator::Lee(LeeParams { entity, year }),
            "foster" => Indicator::Foster(FosterParams {
                resolution: self
                    .option(&["resolution", "gamma"], crate::novelty::DEFAULT_RESOLUTION)?,
                seed: self.option(&["seed"], seed)?,
                ..FosterParams::new(entity, year)
            }),
            "wang" => {
                let d = WangParams::new(entity, year);
                Indicator::Wang(WangParams {
                    backward: self.option(&["b"], d.backward)?,
                    forward: self.option(&["f"], d.forward)?,
                    reuse_threshold: self.option(&["r", "reuse"], d.reuse_threshold)?,
                    ..d
                })
            }
            "shibayama" => Indicator::Shibayama {
                year,
                params: ShibayamaParams {
                    percentile: self.option(&["q"], crate::semantic::DEFAULT_PERCENTILE)?,
                    ..Default::default()
                },
            },
            "disruption" => Indicator::Disruption {
                year: None,
                measures: Measure::DEFAULT.to_vec(),
            },
            other => return Err(Error::InvalidParams(format!("unknown indicator `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub indicator: String,
    pub params: String,
    pub corpus_size: usize,
    pub corpus_build_seconds: f64,
    pub wall_seconds: f64,
    pub records: usize,
    /// Process high-water mark of resident memory, where the OS reports it.
    pub peak_rss_bytes: Option<u64>,
    pub manifest: RunManifest,
}

pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Synthetic corpus used for a bench size.
pub fn bench_corpus(size: usize, seed: u64) -> Result<(CorpusStore, EmbeddingStore)> {
    let synth = synth_corpus(&SynthParams {
        n_docs: size,
        n_entities: (size / 20).clamp(20, 2000),
        years: BENCH_YEARS,
        seed,
        ..Default::default()
    })?;
    let mut emb = EmbeddingStore::default();
    for (id, v) in synth.embeddings {
        emb.insert(id, v)?;
    }
    let prov = Provenance {
        input_digest: format!("synth:size={size},seed={seed}"),
        options: IngestOptions::default(),
    };
    Ok((CorpusStore::from_documents(synth.documents, prov).0, emb))
}

/// Times every indicator at every size. Each timing follows one discarded
/// warm-up run.
pub fn run_bench(sizes: &[usize], specs: &[BenchSpec], seed: u64) -> Result<Vec<BenchRow>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams("bench sizes must be ascending".into()));
    }
    let mut rows = Vec::new();
    if specs.is_empty() {
        return Ok(rows);
    }
    for &size in sizes {
        let start = Instant::now();
        let (store, emb) = bench_corpus(size, seed)?;
        let build = start.elapsed().as_secs_f64();
        for spec in specs {
            let indicator = spec.indicator(EntityKind::Journals, BENCH_FOCAL_YEAR, seed)?;
            run_indicator(&store, Some(&emb), &indicator)?;
            let mut manifest = RunManifest::new(
                vec!["bench".into(), size.to_string(), spec.name.clone()],
                indicator.name(),
                &indicator.fingerprint(),
            );
            manifest.seed = Some(seed);
            manifest.inputs.push(crate::manifest::InputDigest {
                path: "synthetic".into(),
                sha256: store.provenance().input_digest.clone(),
            });
            let t = Instant::now();
            let out = run_indicator(&store, Some(&emb), &indicator)?;
            let wall = t.elapsed().as_secs_f64();
            manifest.phases.push(crate::manifest::PhaseTiming {
                phase: "score".into(),
                seconds: wall,
            });
            log::info!("bench {} n={size}: {wall:.3}s", indicator.name());
            rows.push(BenchRow {
                indicator: indicator.name().to_string(),
                params: indicator.fingerprint(),
                corpus_size: size,
                corpus_build_seconds: build,
                wall_seconds: wall,
                records: out.records.len(),
                peak_rss_bytes: peak_rss_bytes(),
                manifest,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidParams(format!("csv: {e}"));
    w.write_record([
        "indicator",
        "params",
        "corpus_size",
        "corpus_build_seconds",
        "wall_seconds",
        "records",
        "peak_rss_bytes",
    ])
    .map_err(err)?;
    for r in rows {
        w.write_record([
            r.indicator.clone(),
            r.params.clone(),
            r.corpus_size.to_string(),
            format!("{:.6}", r.corpus_build_seconds),
            format!("{:.6}", r.wall_seconds),
            r.records.to_string(),
            r.peak_rss_bytes.map_or_else(String::new, |b| b.to_string()),
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let s: BenchSpec = "uzzi:s=1".parse().unwrap();
        match s.indicator(EntityKind::Journals, 2005, 0).unwrap() {
            Indicator::Uzzi(p) => assert_eq!(p.samples, 1),
            other => panic!("{other:?}"),
        }
        assert!("nope".parse::<BenchSpec>().is_err());
        assert!("uzzi:s".parse::<BenchSpec>().is_err());
        assert!("uzzi:s=x".parse::<BenchSpec>().is_err());
    }

    #[test]
    fn two_sizes_two_rows() {
        let rows = run_bench(&[100, 1000], &["lee".parse().unwrap()], 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].corpus_size, 100);
        assert!(rows.iter().all(|r| r.records > 0));
        assert_eq!(bench_csv(&rows).unwrap().lines().count(), 3);
    }

    #[test]
    fn empty_indicator_list() {
        assert!(run_bench(&[100], &[], 1).unwrap().is_empty());
        assert!(run_bench(&[1000, 100], &["lee".parse().unwrap()], 1).is_err());
    }
}
