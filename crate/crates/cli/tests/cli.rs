// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scinov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scinov"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn scinov")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) -> PathBuf {
    let corpus = dir.join("c.jsonl");
    let out = scinov(&[
        "--seed",
        "5",
        "--years",
        "2000:2006",
        "synth",
        "--n-docs",
        "160",
        "--n-entities",
        "12",
        "--embedding-dim",
        "4",
        "--out",
        s(&corpus),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    corpus
}

#[test]
fn synth_writes_corpus_embeddings_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    for f in [
        "c.jsonl",
        "c.embeddings.jsonl",
        "c.truth.json",
        "c.jsonl.manifest.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let out = scinov(&["--corpus", s(&corpus), "ingest"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["documents"], 160);
}

#[test]
fn ingest_with_bad_lines_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\":\"a\",\"year\":2000,\"references\":[{\"source\":\"J\",\"year\":1999}]}\nnot json\n",
    )
    .unwrap();
    let out = scinov(&["--corpus", s(&corpus), "ingest"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_corpus_fails() {
    let out = scinov(&[
        "--corpus",
        "/nonexistent/c.jsonl",
        "novelty",
        "lee",
        "--year",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = scinov(&["novelty", "lee", "--year", "2000"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn score_files_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out_dir = dir.path().join("out");
    let base = ["--corpus", s(&corpus), "--out-dir", s(&out_dir)];
    let runs: [&[&str]; 5] = [
        &["novelty", "lee", "--year", "2003"],
        &["novelty", "uzzi", "--year", "2003", "--samples", "5"],
        &["novelty", "foster", "--on", "keywords", "--year", "2003"],
        &["novelty", "wang", "--year", "2003", "--b", "2", "--f", "2"],
        &["disruption", "--measures", "di1,dinok1"],
    ];
    for args in runs {
        let out = scinov(&[&base[..], args].concat());
        assert_ne!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in [
        "lee_journals_2003.jsonl",
        "uzzi_journals_2003.jsonl",
        "foster_keywords_2003.jsonl",
        "wang_journals_2003.jsonl",
        "disruption_citations_all.jsonl",
    ] {
        let path = out_dir.join(f);
        assert!(
            std::fs::read_to_string(&path).unwrap().lines().count() > 0,
            "{f}"
        );
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join(format!("{f}.manifest.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(
            manifest["inputs"][0]["sha256"].as_str().unwrap().len(),
            64,
            "{f}"
        );
    }

    let lee = out_dir.join("lee_journals_2003.jsonl");
    let uzzi = out_dir.join("uzzi_journals_2003.jsonl");
    let out = scinov(&[
        "report",
        "correlate",
        "--format",
        "json",
        "--scores",
        s(&lee),
        s(&uzzi),
    ]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(m["pearson"][0][0], 1.0);

    let out = scinov(&["report", "trends", "--scores", s(&lee)]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("indicator,"));

    let out = scinov(&["report", "doc", "--id", "no-such-doc", "--scores", s(&lee)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shibayama_reads_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let emb = dir.path().join("c.embeddings.jsonl");
    let out = scinov(&[
        "--corpus",
        s(&corpus),
        "--out-dir",
        s(dir.path()),
        "novelty",
        "shibayama",
        "--year",
        "2004",
        "--embeddings",
        s(&emb),
        "--field",
        "abstract",
        "--q",
        "50",
    ]);
    assert_ne!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("shibayama_abstract_2004.jsonl").exists());
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        for args in [
            &["novelty", "uzzi", "--year", "2004", "--samples", "10"][..],
            &["novelty", "foster", "--year", "2004"][..],
            &["disruption"][..],
        ] {
            let out = scinov(
                &[
                    &[
                        "--corpus",
                        s(&corpus),
                        "--out-dir",
                        s(&out_dir),
                        "--threads",
                        threads,
                    ][..],
                    args,
                ]
                .concat(),
            );
            assert_ne!(out.status.code(), Some(1));
        }
        let mut files: Vec<_> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        outputs.push(
            files
                .iter()
                .map(|p| std::fs::read(p).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(outputs[0].len(), 3);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_agrees_with_reference() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let emb = dir.path().join("c.embeddings.jsonl");
    let out = scinov(&[
        "--corpus",
        s(&corpus),
        "--out-dir",
        s(dir.path()),
        "verify",
        "--year",
        "2003",
        "--embeddings",
        s(&emb),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("MISMATCH"));
    assert!(dir.path().join("verify_2003.json").exists());
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = scinov(&[
        "--out-dir",
        s(dir.path()),
        "bench",
        "--sizes",
        "1e2,2e2",
        "--indicators",
        "lee,uzzi:s=1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let out = scinov(&["bench", "--sizes", "1e2", "--indicators", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}
