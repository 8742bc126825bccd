// SPDX-License-Identifier: Apache-2.0

//! Binary columnar cache for a [`CorpusStore`].
//!
//! Layout (little endian):
//!
//! ```text
//! magic "SCNVCOL1"
//! u32 len + provenance JSON
//! u64 document count n
//! strings   id[n]
//! i32       year[n]
//! opt-str   title_vector_id[n], abstract_vector_id[n]
//! u64       ref_offsets[n + 1]
//! opt-str   ref_id[R], source[R]
//! opt-i32   ref_year[R]
//! u64       keyword_offsets[n + 1]
//! strings   keyword[K]
//! ```
//!
//! A string column is `u64 offsets[len + 1]` followed by the concatenated
//! UTF-8 bytes. Optional columns prefix a one-byte presence flag per row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{CorpusStore, DocumentRecord, Provenance, ReferenceEntry};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SCNVCOL1";

/// `corpus.jsonl` → `corpus.jsonl.scnvcache`.
pub fn cache_path_for(input: &Path) -> PathBuf {
    let mut name = input.as_os_str().to_owned();
    name.push(".scnvcache");
    PathBuf::from(name)
}

struct ColumnWriter {
    buf: Vec<u8>,
}

impl ColumnWriter {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn strings<'a>(&mut self, items: impl Iterator<Item = &'a str> + Clone) {
        let mut off = 0u64;
        self.u64(0);
        for s in items.clone() {
            off += s.len() as u64;
            self.u64(off);
        }
        for s in items {
            self.buf.extend_from_slice(s.as_bytes());
        }
    }
    fn opt_strings<'a>(&mut self, items: impl Iterator<Item = Option<&'a str>> + Clone) {
        for s in items.clone() {
            self.buf.push(s.is_some() as u8);
        }
        self.strings(items.map(|s| s.unwrap_or("")));
    }
    fn offsets(&mut self, lens: impl Iterator<Item = usize>) {
        let mut off = 0u64;
        self.u64(0);
        for l in lens {
            off += l as u64;
            self.u64(off);
        }
    }
}

pub fn write_cache(store: &CorpusStore, path: &Path) -> Result<()> {
    let docs = store.documents();
    let refs = || docs.iter().flat_map(|d| d.references.iter());
    let mut w = ColumnWriter { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    let prov = serde_json::to_vec(store.provenance()).expect("provenance serializes");
    w.u32(prov.len() as u32);
    w.buf.extend_from_slice(&prov);
    w.u64(docs.len() as u64);
    w.strings(docs.iter().map(|d| d.id.as_str()));
    for d in docs {
        w.i32(d.year);
    }
    w.opt_strings(docs.iter().map(|d| d.title_vector_id.as_deref()));
    w.opt_strings(docs.iter().map(|d| d.abstract_vector_id.as_deref()));
    w.offsets(docs.iter().map(|d| d.references.len()));
    w.opt_strings(refs().map(|r| r.ref_id.as_deref()));
    w.opt_strings(refs().map(|r| r.source.as_deref()));
    for r in refs() {
        w.buf.push(r.year.is_some() as u8);
    }
    for r in refs() {
        w.i32(r.year.unwrap_or(0));
    }
    w.offsets(docs.iter().map(|d| d.keywords.len()));
    w.strings(
        docs.iter()
            .flat_map(|d| d.keywords.iter().map(String::as_str)),
    );

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&w.buf).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

struct ColumnReader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> ColumnReader<'a> {
    fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::CacheCorrupt {
            path: self.path.to_path_buf(),
            reason: reason.into(),
        }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| self.corrupt("truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| self.corrupt("length overflow"))
    }
    fn offsets(&mut self, n: usize) -> Result<Vec<usize>> {
        let offs = (0..=n).map(|_| self.usize()).collect::<Result<Vec<_>>>()?;
        if offs[0] != 0 || offs.windows(2).any(|w| w[0] > w[1]) {
            return Err(self.corrupt("non-monotone offsets"));
        }
        Ok(offs)
    }
    fn strings(&mut self, n: usize) -> Result<Vec<String>> {
        let offs = self.offsets(n)?;
        let bytes = self.take(offs[n])?;
        let text = std::str::from_utf8(bytes).map_err(|_| self.corrupt("invalid utf-8"))?;
        offs.windows(2)
            .map(|w| {
                text.get(w[0]..w[1])
                    .map(str::to_string)
                    .ok_or_else(|| self.corrupt("string split inside a code point"))
            })
            .collect()
    }
    fn flags(&mut self, n: usize) -> Result<Vec<bool>> {
        Ok(self.take(n)?.iter().map(|&b| b != 0).collect())
    }
    fn opt_strings(&mut self, n: usize) -> Result<Vec<Option<String>>> {
        let present = self.flags(n)?;
        let values = self.strings(n)?;
        Ok(present
            .into_iter()
            .zip(values)
            .map(|(p, v)| p.then_some(v))
            .collect())
    }
}

pub fn read_cache(path: &Path) -> Result<CorpusStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    let mut r = ColumnReader {
        buf: &buf,
        pos: 0,
        path,
    };
    if r.take(8)? != MAGIC {
        return Err(r.corrupt("bad magic"));
    }
    let plen = r.u32()? as usize;
    let provenance: Provenance =
        serde_json::from_slice(r.take(plen)?).map_err(|e| r.corrupt(e.to_string()))?;
    let n = r.usize()?;
    let ids = r.strings(n)?;
    let years = (0..n).map(|_| r.i32()).collect::<Result<Vec<_>>>()?;
    let title = r.opt_strings(n)?;
    let abstr = r.opt_strings(n)?;
    let ref_offs = r.offsets(n)?;
    let nrefs = ref_offs[n];
    let ref_ids = r.opt_strings(nrefs)?;
    let sources = r.opt_strings(nrefs)?;
    let ref_year_present = r.flags(nrefs)?;
    let ref_years = (0..nrefs).map(|_| r.i32()).collect::<Result<Vec<_>>>()?;
    let kw_offs = r.offsets(n)?;
    let keywords = r.strings(kw_offs[n])?;
    if r.pos != buf.len() {
        return Err(r.corrupt("trailing bytes"));
    }

    let mut refs = ref_ids
        .into_iter()
        .zip(sources)
        .zip(ref_year_present.into_iter().zip(ref_years))
        .map(|((ref_id, source), (has_year, year))| ReferenceEntry {
            ref_id,
            source,
            year: has_year.then_some(year),
        });
    let mut kws = keywords.into_iter();
    let mut documents = Vec::with_capacity(n);
    for (i, ((id, year), (title_vector_id, abstract_vector_id))) in ids
        .into_iter()
        .zip(years)
        .zip(title.into_iter().zip(abstr))
        .enumerate()
    {
        documents.push(DocumentRecord {
            id,
            year,
            references: refs.by_ref().take(ref_offs[i + 1] - ref_offs[i]).collect(),
            keywords: kws.by_ref().take(kw_offs[i + 1] - kw_offs[i]).collect(),
            title_vector_id,
            abstract_vector_id,
        });
    }
    if documents.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(r.corrupt("documents not sorted by id"));
    }
    Ok(CorpusStore::from_sorted(documents, provenance))
}
