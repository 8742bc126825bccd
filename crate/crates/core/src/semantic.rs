// SPDX-License-Identifier: Apache-2.0

//! Semantic novelty from precomputed reference embeddings.
//!
//! A focal document is scored by a percentile of the pairwise cosine
//! distances between the vectors of the documents it cites. Vectors are
//! looked up through the cited document's `title_vector_id` or
//! `abstract_vector_id`; references without a resolvable vector are left out
//! and reported through the coverage counters.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStore, DocumentRecord};
use crate::error::{Error, Result};
use crate::score::{fingerprint, ScoreRecord};
use crate::stats::percentile_sorted;

pub const DEFAULT_PERCENTILE: f64 = 10.0;

const PACKED_MAGIC: &[u8; 8] = b"SCNVEMB1";

/// Which vector of a cited document to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextField {
    Title,
    Abstract,
}

impl TextField {
    pub fn as_str(self) -> &'static str {
        match self {
            TextField::Title => "title",
            TextField::Abstract => "abstract",
        }
    }

    fn vector_id(self, doc: &DocumentRecord) -> Option<&str> {
        match self {
            TextField::Title => doc.title_vector_id.as_deref(),
            TextField::Abstract => doc.abstract_vector_id.as_deref(),
        }
    }
}

impl FromStr for TextField {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "title" => Ok(TextField::Title),
            "abstract" => Ok(TextField::Abstract),
            other => Err(format!("unknown field `{other}` (title|abstract)")),
        }
    }
}

/// Immutable id → vector map with a uniform dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    index: HashMap<String, usize>,
    ids: Vec<String>,
    data: Vec<f64>,
}

#[derive(Deserialize, Serialize)]
struct EmbeddingLine {
    id: String,
    vector: Vec<f64>,
}

impl EmbeddingStore {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index
            .get(id)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Adds a vector; all vectors must share one dimension and be finite.
    pub fn insert(&mut self, id: String, vector: Vec<f64>) -> Result<()> {
        if self.ids.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "vector {id} has non-finite values"
            )));
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(&vector);
        Ok(())
    }

    /// Writes the packed binary form: magic, `u32 d`, `u64 n`, `n` fixed-width
    /// records of `d` little-endian `f64`, then `n` length-prefixed ids.
    pub fn write_packed(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        w.write_all(PACKED_MAGIC).map_err(io)?;
        w.write_all(&(self.dim as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.ids.len() as u64).to_le_bytes())
            .map_err(io)?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        for id in &self.ids {
            w.write_all(&(id.len() as u32).to_le_bytes()).map_err(io)?;
            w.write_all(id.as_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_packed(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        let corrupt = |reason: &str| Error::CacheCorrupt {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end = pos
                .checked_add(n)
                .filter(|&e| e <= buf.len())
                .ok_or_else(|| corrupt("truncated"))?;
            let s = &buf[pos..end];
            pos = end;
            Ok(s)
        };
        if take(8)? != PACKED_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let raw = take(
            n.checked_mul(dim * 8)
                .ok_or_else(|| corrupt("size overflow"))?,
        )?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut store = EmbeddingStore::default();
        for i in 0..n {
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let id = std::str::from_utf8(take(len)?).map_err(|_| corrupt("invalid utf-8"))?;
            store.insert(id.to_string(), data[i * dim..(i + 1) * dim].to_vec())?;
        }
        if n > 0 {
            store.dim = dim;
        }
        Ok(store)
    }
}

/// Reads line-delimited `{"id": ..., "vector": [...]}` records.
///
/// Files starting with the packed magic are read as packed binaries.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 8];
    let is_packed = file.read_exact(&mut magic).is_ok() && &magic == PACKED_MAGIC;
    if is_packed {
        return EmbeddingStore::read_packed(path);
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut store = EmbeddingStore::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbeddingLine = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        store.insert(rec.id, rec.vector)?;
    }
    Ok(store)
}

/// Writes line-delimited embedding records.
pub fn write_embeddings(path: &Path, items: &[(String, Vec<f64>)]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for (id, vector) in items {
        serde_json::to_writer(
            &mut w,
            &EmbeddingLine {
                id: id.clone(),
                vector: vector.clone(),
            },
        )
        .map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `1 - cos(u, v)` clamped to `[0, 2]`; a zero vector has cosine 0.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - dot / (nu * nv).sqrt()).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShibayamaParams {
    pub field: TextField,
    pub percentile: f64,
}

impl Default for ShibayamaParams {
    fn default() -> Self {
        Self {
            field: TextField::Title,
            percentile: DEFAULT_PERCENTILE,
        }
    }
}

impl ShibayamaParams {
    pub fn fingerprint(&self) -> String {
        fingerprint(&[
            ("field", self.field.as_str().to_string()),
            ("q", self.percentile.to_string()),
        ])
    }
}

/// Pairwise distances among the resolvable reference vectors of a document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceDistribution {
    pub doc_id: String,
    /// Ascending.
    pub distances: Vec<f64>,
    /// References with a vector (`m`).
    pub resolved: usize,
    pub total_refs: usize,
}

pub fn distance_distribution(
    doc: &DocumentRecord,
    corpus: &CorpusStore,
    embeddings: &EmbeddingStore,
    field: TextField,
) -> Result<DistanceDistribution> {
    let mut seen: Vec<&str> = Vec::new();
    let mut vectors: Vec<&[f64]> = Vec::new();
    for r in &doc.references {
        let Some(ref_id) = r.ref_id.as_deref() else {
            continue;
        };
        if seen.contains(&ref_id) {
            continue;
        }
        seen.push(ref_id);
        if let Some(v) = corpus
            .get(ref_id)
            .and_then(|cited| field.vector_id(cited))
            .and_then(|vid| embeddings.get(vid))
        {
            vectors.push(v);
        }
    }
    let mut distances = Vec::with_capacity(vectors.len() * vectors.len().saturating_sub(1) / 2);
    for (a, u) in vectors.iter().enumerate() {
        for v in &vectors[a + 1..] {
            distances.push(cosine_distance(u, v)?);
        }
    }
    distances.sort_by(f64::total_cmp);
    Ok(DistanceDistribution {
        doc_id: doc.id.clone(),
        distances,
        resolved: vectors.len(),
        total_refs: doc.references.len(),
    })
}

/// Scores one document; `Ok(None)` when fewer than two references resolve.
pub fn shibayama_novelty(
    doc: &DocumentRecord,
    corpus: &CorpusStore,
    embeddings: &EmbeddingStore,
    params: &ShibayamaParams,
) -> Result<Option<ScoreRecord>> {
    if !(0.0..=100.0).contains(&params.percentile) {
        return Err(Error::InvalidParams(format!(
            "percentile {} outside [0, 100]",
            params.percentile
        )));
    }
    let dist = distance_distribution(doc, corpus, embeddings, params.field)?;
    if dist.resolved < 2 {
        return Ok(None);
    }
    let score = percentile_sorted(&dist.distances, params.percentile);
    let coverage = dist.resolved as f64 / dist.total_refs as f64;
    Ok(Some(
        ScoreRecord::new(
            &doc.id,
            doc.year,
            "shibayama",
            params.field.as_str(),
            &params.fingerprint(),
        )
        .score("novelty", Some(score))
        .score("coverage", Some(coverage))
        .count("resolved_refs", dist.resolved as u64)
        .count("total_refs", dist.total_refs as u64)
        .with_distribution(dist.distances),
    ))
}

#[derive(Debug, Clone)]
pub struct ShibayamaOutput {
    pub records: Vec<ScoreRecord>,
    /// Documents with fewer than two resolvable references.
    pub skipped: Vec<String>,
}

/// Scores every document of `year`.
pub fn shibayama_year(
    corpus: &CorpusStore,
    embeddings: &EmbeddingStore,
    year: i32,
    params: &ShibayamaParams,
) -> Result<ShibayamaOutput> {
    use rayon::prelude::*;
    let docs = corpus.docs_in_year(year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    let scored = docs
        .par_iter()
        .map(|d| shibayama_novelty(d, corpus, embeddings, params).map(|r| (d.id.clone(), r)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in scored {
        match r {
            Some(r) => records.push(r),
            None => skipped.push(id),
        }
    }
    Ok(ShibayamaOutput { records, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IngestOptions, Provenance, ReferenceEntry};

    fn corpus_with_vectors(vectors: &[(&str, Vec<f64>)]) -> (CorpusStore, EmbeddingStore) {
        let mut docs: Vec<DocumentRecord> = vectors
            .iter()
            .map(|(id, _)| DocumentRecord {
                id: id.to_string(),
                year: 1999,
                references: vec![],
                keywords: vec!["k".into()],
                title_vector_id: Some(format!("t:{id}")),
                abstract_vector_id: None,
            })
            .collect();
        docs.push(DocumentRecord {
            id: "fp".into(),
            year: 2000,
            references: vectors
                .iter()
                .map(|(id, _)| ReferenceEntry {
                    ref_id: Some(id.to_string()),
                    source: None,
                    year: Some(1999),
                })
                .collect(),
            keywords: vec![],
            title_vector_id: None,
            abstract_vector_id: None,
        });
        let prov = Provenance {
            input_digest: String::new(),
            options: IngestOptions::default(),
        };
        let mut emb = EmbeddingStore::default();
        for (id, v) in vectors {
            emb.insert(format!("t:{id}"), v.clone()).unwrap();
        }
        (CorpusStore::from_documents(docs, prov).0, emb)
    }

    fn score(vectors: &[(&str, Vec<f64>)], q: f64) -> Option<f64> {
        let (c, e) = corpus_with_vectors(vectors);
        let params = ShibayamaParams {
            field: TextField::Title,
            percentile: q,
        };
        shibayama_novelty(c.get("fp").unwrap(), &c, &e, &params)
            .unwrap()
            .and_then(|r| r.get("novelty"))
    }

    #[test]
    fn cosine_distance_examples() {
        assert_eq!(cosine_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let h = 1.0 / 2f64.sqrt();
        let d = cosine_distance(&[1.0, 0.0], &[h, h]).unwrap();
        assert!((d - (1.0 - h)).abs() < 1e-15);
        assert!((d - 0.29289).abs() < 1e-5);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            cosine_distance(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identical_vectors_score_zero() {
        let v = vec![0.3, 0.4, 0.5];
        for q in [10.0, 50.0, 90.0] {
            assert_eq!(
                score(&[("a", v.clone()), ("b", v.clone()), ("c", v.clone())], q),
                Some(0.0)
            );
        }
    }

    #[test]
    fn orthogonal_vectors_score_one() {
        let s = score(
            &[
                ("a", vec![1.0, 0.0, 0.0]),
                ("b", vec![0.0, 1.0, 0.0]),
                ("c", vec![0.0, 0.0, 1.0]),
            ],
            10.0,
        );
        assert_eq!(s, Some(1.0));
    }

    #[test]
    fn single_pair_distribution() {
        let h = 1.0 / 2f64.sqrt();
        let s = score(&[("a", vec![1.0, 0.0]), ("b", vec![h, h])], 50.0).unwrap();
        assert!((s - 0.29289).abs() < 1e-5);
    }

    #[test]
    fn fewer_than_two_vectors_is_skipped() {
        assert_eq!(score(&[("a", vec![1.0, 0.0])], 10.0), None);
    }

    #[test]
    fn store_rejects_mixed_dimensions_and_duplicates() {
        let mut s = EmbeddingStore::default();
        s.insert("a".into(), vec![0.0; 200]).unwrap();
        s.insert("b".into(), vec![1.0; 200]).unwrap();
        assert_eq!((s.dim(), s.len()), (200, 2));
        assert!(matches!(
            s.insert("c".into(), vec![0.0; 100]),
            Err(Error::DimensionMismatch {
                expected: 200,
                found: 100
            })
        ));
        assert!(matches!(
            s.insert("a".into(), vec![0.0; 200]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn empty_file_gives_empty_store() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let s = load_embeddings(f.path()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn packed_round_trip() {
        let mut s = EmbeddingStore::default();
        s.insert("x".into(), vec![0.5, -1.25]).unwrap();
        s.insert("yé".into(), vec![3.0, 1e-300]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.bin");
        s.write_packed(&path).unwrap();
        assert_eq!(load_embeddings(&path).unwrap(), s);
    }
}
