// SPDX-License-Identifier: Apache-2.0

//! Corpus-level summaries of score files: yearly trends, indicator
//! correlation matrices and per-document distribution dumps.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::score::ScoreRecord;
use crate::stats::{mean_std, pearson, spearman, standard_percentiles, STANDARD_PERCENTILES};

/// Score columns tried, in order, when a series does not name one.
const PRIMARY_SCORES: [&str; 4] = ["novelty", "commonness", "di1", "dinok1"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub indicator: String,
    pub entity: String,
    pub params: String,
    pub score: String,
    pub year: i32,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub percentiles: Vec<f64>,
}

/// Groups defined scores by indicator, entity, parameters, score name and
/// year.
pub fn report_trends(records: &[ScoreRecord]) -> Result<Vec<TrendRow>> {
    type Key = (String, String, String, String, i32);
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for r in records {
        for (name, value) in &r.scores {
            if let Some(v) = value {
                groups
                    .entry((
                        r.indicator.clone(),
                        r.entity.clone(),
                        r.params.clone(),
                        name.clone(),
                        r.year,
                    ))
                    .or_default()
                    .push(*v);
            }
        }
    }
    if groups.is_empty() {
        return Err(Error::NoScores);
    }
    Ok(groups
        .into_iter()
        .map(|((indicator, entity, params, score, year), mut values)| {
            values.sort_by(f64::total_cmp);
            let (mean, std) = mean_std(&values).expect("groups are non-empty");
            TrendRow {
                indicator,
                entity,
                params,
                score,
                year,
                count: values.len(),
                mean,
                std,
                percentiles: standard_percentiles(&values),
            }
        })
        .collect())
}

pub fn trends_csv(rows: &[TrendRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "indicator".to_string(),
        "entity".into(),
        "params".into(),
        "score".into(),
        "year".into(),
        "count".into(),
        "mean".into(),
        "std".into(),
    ];
    header.extend(STANDARD_PERCENTILES.iter().map(|q| format!("p{q}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut row = vec![
            r.indicator.clone(),
            r.entity.clone(),
            r.params.clone(),
            r.score.clone(),
            r.year.to_string(),
            r.count.to_string(),
            r.mean.to_string(),
            r.std.to_string(),
        ];
        row.extend(r.percentiles.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParams(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One column of a correlation matrix: a score of a set of records.
#[derive(Debug, Clone)]
pub struct ScoreSeries {
    pub label: String,
    /// `doc_id → value`; undefined values are absent.
    pub values: HashMap<String, f64>,
}

impl ScoreSeries {
    /// Extracts `score` (or the first present primary score) from records.
    pub fn from_records(label: &str, records: &[ScoreRecord], score: Option<&str>) -> Result<Self> {
        let name = match score {
            Some(s) => s.to_string(),
            None => records
                .iter()
                .find_map(|r| PRIMARY_SCORES.iter().find(|p| r.scores.contains_key(**p)))
                .map(|s| s.to_string())
                .or_else(|| {
                    records
                        .first()
                        .and_then(|r| r.scores.keys().next().cloned())
                })
                .ok_or(Error::NoScores)?,
        };
        let values = records
            .iter()
            .filter_map(|r| r.get(&name).map(|v| (r.doc_id.clone(), v)))
            .collect();
        Ok(Self {
            label: format!("{label}:{name}"),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub pearson: Vec<Vec<Option<f64>>>,
    pub spearman: Vec<Vec<Option<f64>>>,
    /// Documents in each pairwise intersection.
    pub overlap: Vec<Vec<usize>>,
}

/// Pairwise correlations over the documents scored by both series.
pub fn report_correlation(series: &[ScoreSeries]) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(Error::InvalidParams(
            "correlation needs at least two score series".into(),
        ));
    }
    let n = series.len();
    let mut out = CorrelationMatrix {
        labels: series.iter().map(|s| s.label.clone()).collect(),
        pearson: vec![vec![None; n]; n],
        spearman: vec![vec![None; n]; n],
        overlap: vec![vec![0; n]; n],
    };
    for a in 0..n {
        out.pearson[a][a] = Some(1.0);
        out.spearman[a][a] = Some(1.0);
        out.overlap[a][a] = series[a].values.len();
        for b in a + 1..n {
            let mut docs: Vec<&String> = series[a]
                .values
                .keys()
                .filter(|d| series[b].values.contains_key(*d))
                .collect();
            if docs.is_empty() {
                return Err(Error::NoOverlap);
            }
            docs.sort();
            let x: Vec<f64> = docs.iter().map(|d| series[a].values[*d]).collect();
            let y: Vec<f64> = docs.iter().map(|d| series[b].values[*d]).collect();
            let (p, s) = (pearson(&x, &y), spearman(&x, &y));
            out.pearson[a][b] = p;
            out.pearson[b][a] = p;
            out.spearman[a][b] = s;
            out.spearman[b][a] = s;
            out.overlap[a][b] = docs.len();
            out.overlap[b][a] = docs.len();
        }
    }
    Ok(out)
}

pub fn correlation_csv(m: &CorrelationMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "a", "b", "value", "overlap"])
        .map_err(csv_error)?;
    for (method, table) in [("pearson", &m.pearson), ("spearman", &m.spearman)] {
        for (a, row) in table.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let value = v.map_or_else(String::new, |v| v.to_string());
                w.write_record([
                    method,
                    &m.labels[a],
                    &m.labels[b],
                    &value,
                    &m.overlap[a][b].to_string(),
                ])
                .map_err(csv_error)?;
            }
        }
    }
    finish(w)
}

/// Everything known about one document in one score file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocBlock {
    pub source: String,
    pub record: ScoreRecord,
}

/// Collects the records of `doc_id` from labelled score files.
pub fn report_doc(doc_id: &str, files: &[(String, Vec<ScoreRecord>)]) -> Result<Vec<DocBlock>> {
    let blocks: Vec<DocBlock> = files
        .iter()
        .flat_map(|(source, records)| {
            records
                .iter()
                .filter(|r| r.doc_id == doc_id)
                .map(|r| DocBlock {
                    source: source.clone(),
                    record: r.clone(),
                })
        })
        .collect();
    if blocks.is_empty() {
        return Err(Error::UnknownDocument(doc_id.to_string()));
    }
    Ok(blocks)
}

/// Long-format CSV: one row per summary score and per distribution value.
pub fn doc_csv(blocks: &[DocBlock]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "source",
        "indicator",
        "entity",
        "params",
        "kind",
        "name",
        "value",
    ])
    .map_err(csv_error)?;
    for b in blocks {
        let r = &b.record;
        let mut row = |kind: &str, name: &str, value: String| {
            w.write_record([
                &b.source,
                &r.indicator,
                &r.entity,
                &r.params,
                kind,
                name,
                &value,
            ])
        };
        for (name, v) in &r.scores {
            row("score", name, v.map_or_else(String::new, |v| v.to_string())).map_err(csv_error)?;
        }
        for (i, v) in r.distribution.iter().flatten().enumerate() {
            row("distribution", &i.to_string(), v.to_string()).map_err(csv_error)?;
        }
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(doc: &str, year: i32, indicator: &str, value: Option<f64>) -> ScoreRecord {
        ScoreRecord::new(doc, year, indicator, "journals", "").score("novelty", value)
    }

    #[test]
    fn trends_single_year_mean() {
        let rows = report_trends(&[
            rec("a", 2000, "lee", Some(1.0)),
            rec("b", 2000, "lee", Some(3.0)),
        ])
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean, 2.0);
        assert_eq!(rows[0].count, 2);
    }

    #[test]
    fn trends_equal_scores_have_zero_spread() {
        let rows = report_trends(&[
            rec("a", 2000, "lee", Some(0.7)),
            rec("b", 2000, "lee", Some(0.7)),
        ])
        .unwrap();
        assert_eq!(rows[0].std, 0.0);
    }

    #[test]
    fn trends_shape_and_undefined_values() {
        let records = vec![
            rec("a", 2000, "lee", Some(1.0)),
            rec("b", 2001, "lee", Some(1.0)),
            rec("c", 2000, "foster", Some(1.0)),
            rec("d", 2001, "foster", Some(1.0)),
            rec("e", 2001, "foster", None),
        ];
        let rows = report_trends(&records).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().map(|r| r.count).sum::<usize>(), 4);
        assert!(trends_csv(&rows).unwrap().lines().count() == 5);
        assert!(matches!(report_trends(&[]), Err(Error::NoScores)));
    }

    fn series(label: &str, pairs: &[(&str, f64)]) -> ScoreSeries {
        ScoreSeries {
            label: label.into(),
            values: pairs.iter().map(|(d, v)| (d.to_string(), *v)).collect(),
        }
    }

    #[test]
    fn self_and_negated_correlation() {
        let a = series("a", &[("1", 0.3), ("2", 1.7), ("3", -0.2), ("4", 0.9)]);
        let neg = series("neg", &[("1", -0.3), ("2", -1.7), ("3", 0.2), ("4", -0.9)]);
        let m = report_correlation(&[a.clone(), a.clone(), neg]).unwrap();
        assert_eq!(m.pearson[0][1], Some(1.0));
        assert_eq!(m.pearson[0][2], Some(-1.0));
        assert_eq!(m.spearman[0][2], Some(-1.0));
        for i in 0..3 {
            assert_eq!(m.pearson[i][i], Some(1.0));
            for j in 0..3 {
                assert_eq!(m.pearson[i][j], m.pearson[j][i]);
            }
        }
    }

    #[test]
    fn disjoint_series_do_not_overlap() {
        let a = series("a", &[("1", 0.3)]);
        let b = series("b", &[("2", 0.3)]);
        assert!(matches!(report_correlation(&[a, b]), Err(Error::NoOverlap)));
    }

    #[test]
    fn independent_series_are_uncorrelated() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let a = ScoreSeries {
            label: "a".into(),
            values: (0..n)
                .map(|i| (i.to_string(), rng.random::<f64>()))
                .collect(),
        };
        let b = ScoreSeries {
            label: "b".into(),
            values: (0..n)
                .map(|i| (i.to_string(), rng.random::<f64>()))
                .collect(),
        };
        let m = report_correlation(&[a, b]).unwrap();
        assert!(m.pearson[0][1].unwrap().abs() < 0.05);
    }

    #[test]
    fn primary_score_selection() {
        let records = vec![ScoreRecord::new("d", 2000, "uzzi", "journals", "")
            .score("conventionality", Some(1.0))
            .score("novelty", Some(2.0))];
        let s = ScoreSeries::from_records("f", &records, None).unwrap();
        assert_eq!(s.label, "f:novelty");
        assert_eq!(s.values["d"], 2.0);
    }

    #[test]
    fn doc_dump() {
        let lee = ScoreRecord::new("d", 2004, "lee", "journals", "")
            .score("commonness", Some(0.47))
            .with_distribution(vec![0.625, 0.9375, 0.625]);
        let foster = rec("d", 2004, "foster", Some(0.5));
        let files = vec![
            ("lee.jsonl".to_string(), vec![lee]),
            ("foster.jsonl".to_string(), vec![foster]),
        ];
        let blocks = report_doc("d", &files).unwrap();
        assert_eq!(blocks.len(), 2);
        let csv = doc_csv(&blocks[..1]).unwrap();
        assert_eq!(
            csv.lines().filter(|l| l.contains(",distribution,")).count(),
            3
        );
        assert!(matches!(
            report_doc("zz", &files),
            Err(Error::UnknownDocument(_))
        ));
    }
}
