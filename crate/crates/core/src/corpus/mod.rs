// SPDX-License-Identifier: Apache-2.0

//! Document records, ingestion and the year-partitioned corpus store.
//!
//! Input is UTF-8 with one JSON object per line:
//!
//! ```text
//! {"id": "p1", "year": 2004,
//!  "references": [{"ref_id": "p0", "source": "J-A", "year": 2001}],
//!  "keywords": ["k1"], "title_vector_id": "t:p1"}
//! ```
//!
//! Keywords and reference sources are normalised (trimmed, internal
//! whitespace collapsed, optionally case-folded) because entity identity
//! drives all co-occurrence counting.

mod cache;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use cache::{cache_path_for, read_cache, write_cache};

/// One cited work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    /// Cited document id; present iff the cited work is in the corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_id: Option<String>,
    /// Journal or venue of the cited work.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Publication year of the cited work.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

/// One scholarly document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub year: i32,
    #[serde(default)]
    pub references: Vec<ReferenceEntry>,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_vector_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_vector_id: Option<String>,
}

/// Ingest configuration. Part of the store provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Inclusive `[lo, hi]` filter on publication year.
    pub year_range: Option<(i32, i32)>,
    /// Case-fold keywords and sources.
    pub case_fold: bool,
    /// How far a reference year may exceed the citing year before it is
    /// clamped (in-press citations).
    pub ref_year_slack: i32,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            year_range: None,
            case_fold: true,
            ref_year_slack: 1,
        }
    }
}

/// Why a single input line was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("malformed year: {0}")]
    MalformedYear(String),
    #[error("record has neither references nor keywords")]
    EmptyRecord,
    #[error("invalid json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    SkippedRecord,
    DuplicateId,
    ClampedReferenceYear,
    DroppedReference,
}

/// Non-fatal ingest event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestWarning {
    /// 1-based input line, 0 when not tied to a line.
    pub line: usize,
    pub kind: WarningKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines: usize,
    pub accepted: usize,
    pub warnings: Vec<IngestWarning>,
}

impl IngestReport {
    pub fn count(&self, kind: WarningKind) -> usize {
        self.warnings.iter().filter(|w| w.kind == kind).count()
    }
}

#[derive(Deserialize)]
struct RawDocument {
    id: Option<String>,
    year: Option<serde_json::Value>,
    #[serde(default)]
    references: Vec<RawReference>,
    #[serde(default)]
    keywords: Vec<String>,
    title_vector_id: Option<String>,
    abstract_vector_id: Option<String>,
}

#[derive(Deserialize)]
struct RawReference {
    ref_id: Option<String>,
    source: Option<String>,
    year: Option<serde_json::Value>,
}

/// Trim, collapse internal whitespace and optionally lowercase.
pub fn normalize_label(raw: &str, case_fold: bool) -> String {
    let mut out = String::with_capacity(raw.len());
    for (i, part) in raw.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(part);
    }
    if case_fold {
        out.to_lowercase()
    } else {
        out
    }
}

fn parse_year(value: &serde_json::Value) -> std::result::Result<i32, RecordError> {
    value
        .as_i64()
        .and_then(|y| i32::try_from(y).ok())
        .ok_or_else(|| RecordError::MalformedYear(value.to_string()))
}

/// Parses and validates one input line.
///
/// Returns the record together with any per-record warnings (clamped
/// reference years, dropped references). The warnings carry line 0; the
/// caller fills in the line number.
pub fn parse_document(
    line: &str,
    opts: &IngestOptions,
) -> std::result::Result<(DocumentRecord, Vec<IngestWarning>), RecordError> {
    let raw: RawDocument =
        serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
    let id = raw
        .id
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .ok_or(RecordError::MissingField("id"))?;
    let year = match raw.year {
        None | Some(serde_json::Value::Null) => return Err(RecordError::MissingField("year")),
        Some(v) => parse_year(&v)?,
    };

    let mut warnings = Vec::new();
    let mut references = Vec::with_capacity(raw.references.len());
    for r in raw.references {
        let ref_id = r
            .ref_id
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty());
        let source = r
            .source
            .map(|s| normalize_label(&s, opts.case_fold))
            .filter(|s| !s.is_empty());
        if ref_id.is_none() && source.is_none() {
            warnings.push(IngestWarning {
                line: 0,
                kind: WarningKind::DroppedReference,
                detail: format!("{id}: reference without ref_id or source"),
            });
            continue;
        }
        let mut ref_year = match r.year {
            None | Some(serde_json::Value::Null) => None,
            Some(v) => Some(parse_year(&v)?),
        };
        if let Some(y) = ref_year {
            if y > year.saturating_add(opts.ref_year_slack) {
                warnings.push(IngestWarning {
                    line: 0,
                    kind: WarningKind::ClampedReferenceYear,
                    detail: format!("{id}: reference year {y} clamped to {year}"),
                });
                ref_year = Some(year);
            }
        }
        references.push(ReferenceEntry {
            ref_id,
            source,
            year: ref_year,
        });
    }

    let mut keywords: Vec<String> = Vec::with_capacity(raw.keywords.len());
    for k in raw.keywords {
        let k = normalize_label(&k, opts.case_fold);
        if !k.is_empty() && !keywords.contains(&k) {
            keywords.push(k);
        }
    }

    if references.is_empty() && keywords.is_empty() {
        return Err(RecordError::EmptyRecord);
    }

    let clean = |s: Option<String>| s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
    Ok((
        DocumentRecord {
            id,
            year,
            references,
            keywords,
            title_vector_id: clean(raw.title_vector_id),
            abstract_vector_id: clean(raw.abstract_vector_id),
        },
        warnings,
    ))
}

/// Where a store came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hex SHA-256 of the input file, empty for in-memory stores.
    pub input_digest: String,
    pub options: IngestOptions,
}

/// Immutable, id-ordered collection of documents with a year partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStore {
    documents: Vec<DocumentRecord>,
    index: HashMap<String, u32>,
    year_index: BTreeMap<i32, Vec<u32>>,
    provenance: Provenance,
}

impl CorpusStore {
    /// Builds a store from already-validated records. Later duplicates
    /// replace earlier ones; the number of replaced records is returned.
    pub fn from_documents(
        docs: impl IntoIterator<Item = DocumentRecord>,
        provenance: Provenance,
    ) -> (Self, Vec<String>) {
        let mut by_id: BTreeMap<String, DocumentRecord> = BTreeMap::new();
        let mut duplicates = Vec::new();
        for doc in docs {
            if let Some(old) = by_id.insert(doc.id.clone(), doc) {
                duplicates.push(old.id);
            }
        }
        (
            Self::from_sorted(by_id.into_values().collect(), provenance),
            duplicates,
        )
    }

    /// `documents` must be sorted by id with unique ids.
    fn from_sorted(documents: Vec<DocumentRecord>, provenance: Provenance) -> Self {
        debug_assert!(documents.windows(2).all(|w| w[0].id < w[1].id));
        let mut index = HashMap::with_capacity(documents.len());
        let mut year_index: BTreeMap<i32, Vec<u32>> = BTreeMap::new();
        for (i, d) in documents.iter().enumerate() {
            index.insert(d.id.clone(), i as u32);
            year_index.entry(d.year).or_default().push(i as u32);
        }
        Self {
            documents,
            index,
            year_index,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// All documents, ordered by id.
    pub fn documents(&self) -> &[DocumentRecord] {
        &self.documents
    }

    pub fn get(&self, id: &str) -> Option<&DocumentRecord> {
        self.index.get(id).map(|&i| &self.documents[i as usize])
    }

    /// Dense position of a document in id order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Years that hold at least one document, ascending.
    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.year_index.keys().copied()
    }

    /// `(first, last)` publication year, `None` for an empty store.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        let lo = *self.year_index.keys().next()?;
        let hi = *self.year_index.keys().next_back()?;
        Some((lo, hi))
    }

    /// Documents published in `year`, ordered by id.
    pub fn docs_in_year(&self, year: i32) -> Vec<&DocumentRecord> {
        self.year_index
            .get(&year)
            .map(|ids| ids.iter().map(|&i| &self.documents[i as usize]).collect())
            .unwrap_or_default()
    }

    /// Documents with `lo <= year <= hi`, ordered by year then id.
    pub fn docs_in_years(&self, lo: i32, hi: i32) -> Vec<&DocumentRecord> {
        if lo > hi {
            return Vec::new();
        }
        self.year_index
            .range(lo..=hi)
            .flat_map(|(_, ids)| ids.iter().map(|&i| &self.documents[i as usize]))
            .collect()
    }
}

/// Streams the file through SHA-256.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a line-delimited corpus file.
///
/// Invalid records are skipped with a warning; duplicate ids keep the last
/// occurrence. Fails only on I/O errors or when nothing valid remains.
pub fn load_corpus(path: &Path, opts: &IngestOptions) -> Result<(CorpusStore, IngestReport)> {
    let digest = file_digest(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut report = IngestReport::default();
    let mut docs = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        match parse_document(&line, opts) {
            Ok((doc, warnings)) => {
                report.warnings.extend(
                    warnings
                        .into_iter()
                        .map(|w| IngestWarning { line: lineno, ..w }),
                );
                if let Some((lo, hi)) = opts.year_range {
                    if doc.year < lo || doc.year > hi {
                        continue;
                    }
                }
                docs.push((lineno, doc));
            }
            Err(e) => {
                if e == RecordError::EmptyRecord {
                    log::warn!("{}:{lineno}: {e}", path.display());
                }
                report.warnings.push(IngestWarning {
                    line: lineno,
                    kind: WarningKind::SkippedRecord,
                    detail: e.to_string(),
                });
            }
        }
    }

    let mut line_of: HashMap<String, usize> = HashMap::new();
    for (lineno, doc) in &docs {
        if let Some(prev) = line_of.insert(doc.id.clone(), *lineno) {
            report.warnings.push(IngestWarning {
                line: *lineno,
                kind: WarningKind::DuplicateId,
                detail: format!("{} also on line {prev}; keeping line {lineno}", doc.id),
            });
        }
    }

    let provenance = Provenance {
        input_digest: digest,
        options: opts.clone(),
    };
    let (store, _) = CorpusStore::from_documents(docs.into_iter().map(|(_, d)| d), provenance);
    if store.is_empty() {
        return Err(Error::NoValidRecords(path.to_path_buf()));
    }
    report.accepted = store.len();
    Ok((store, report))
}

/// Loads from the columnar cache beside `path` when its digest and options
/// match, otherwise parses the text input and rewrites the cache.
///
/// The returned report is empty on a cache hit.
pub fn load_corpus_cached(
    path: &Path,
    opts: &IngestOptions,
) -> Result<(CorpusStore, IngestReport, bool)> {
    let cache = cache_path_for(path);
    if cache.exists() {
        let digest = file_digest(path)?;
        match read_cache(&cache) {
            Ok(store)
                if store.provenance.input_digest == digest && &store.provenance.options == opts =>
            {
                return Ok((store, IngestReport::default(), true));
            }
            Ok(_) => log::info!("cache {} is stale, rebuilding", cache.display()),
            Err(e) => log::warn!("ignoring unreadable cache: {e}"),
        }
    }
    let (store, report) = load_corpus(path, opts)?;
    if let Err(e) = write_cache(&store, &cache) {
        log::warn!("could not write cache {}: {e}", cache.display());
    }
    Ok((store, report, false))
}

/// Writes records as line-delimited JSON.
pub fn write_corpus(path: &Path, docs: &[DocumentRecord]) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for d in docs {
        serde_json::to_writer(&mut w, d).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
