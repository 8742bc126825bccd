// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scinov_core::bench::{bench_csv, run_bench, BenchSpec};
use scinov_core::corpus::{
    file_digest, load_corpus_cached, write_corpus, CorpusStore, IngestOptions, WarningKind,
};
use scinov_core::disruption::{parse_measures, Measure};
use scinov_core::graph::{window_graph, write_graph};
use scinov_core::manifest::{sidecar_path, RunManifest};
use scinov_core::novelty::{FosterParams, LeeParams, UzziParams, WangParams, DEFAULT_RESOLUTION};
use scinov_core::oracle::{compare, oracle_score, DEFAULT_SIZE_GUARD};
use scinov_core::pipeline::{run_indicator, Indicator};
use scinov_core::report::{
    correlation_csv, doc_csv, report_correlation, report_doc, report_trends, trends_csv,
    ScoreSeries,
};
use scinov_core::resampling::DEFAULT_SAMPLES;
use scinov_core::score::{read_scores, write_scores};
use scinov_core::semantic::{
    load_embeddings, write_embeddings, EmbeddingStore, ShibayamaParams, TextField,
};
use scinov_core::synth::{synth_corpus, write_truth, SynthParams};
use scinov_core::EntityKind;

/// Combinatorial novelty and disruption indicators for bibliographic corpora.
#[derive(Parser, Debug)]
#[command(name = "scinov", version)]
struct Cli {
    /// Line-delimited corpus file.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Directory for score files and manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Master seed for resampling, community detection and synthesis.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Inclusive publication-year range `lo:hi`.
    #[arg(long, global = true, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the corpus, report warnings and refresh the columnar cache.
    Ingest,
    /// Co-occurrence graphs.
    Cooc {
        #[command(subcommand)]
        command: CoocCommand,
    },
    /// Co-occurrence and semantic novelty indicators.
    Novelty {
        #[command(subcommand)]
        command: NoveltyCommand,
    },
    /// Disruption, depth, breadth, dependence and independence.
    Disruption {
        /// Focal year; every document when omitted.
        #[arg(long)]
        year: Option<i32>,
        #[arg(
            long,
            default_value = "di1,di5,dinok1,dinok5,depth,breadth,dependence,independence"
        )]
        measures: String,
    },
    /// Generate a synthetic corpus with embeddings and planted communities.
    Synth(SynthArgs),
    /// Summaries over score files.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
    /// Compare every indicator against the naive reference implementation.
    Verify {
        #[arg(long)]
        year: i32,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SIZE_GUARD)]
        size_guard: usize,
    },
    /// Time indicators over synthetic corpora of growing size.
    Bench {
        /// Comma-separated corpus sizes, e.g. `1e2,1e3,1e4`.
        #[arg(long, value_delimiter = ',', value_parser = parse_size)]
        sizes: Vec<usize>,
        /// Comma-separated indicators with optional `:key=value` options.
        #[arg(long, value_delimiter = ',')]
        indicators: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum CoocCommand {
    /// Build the co-occurrence graph of the selected years.
    Build {
        #[arg(long, value_enum)]
        on: Entity,
        /// Single year; defaults to `--years` or the whole corpus.
        #[arg(long)]
        year: Option<i32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Entity {
    Journals,
    Keywords,
}

impl From<Entity> for EntityKind {
    fn from(e: Entity) -> Self {
        match e {
            Entity::Journals => EntityKind::Journals,
            Entity::Keywords => EntityKind::Keywords,
        }
    }
}

#[derive(Args, Debug)]
struct Focal {
    #[arg(long, value_enum, default_value = "journals")]
    on: Entity,
    #[arg(long)]
    year: i32,
}

#[derive(Subcommand, Debug)]
enum NoveltyCommand {
    /// Atypicality z-scores against shuffled networks.
    Uzzi {
        #[command(flatten)]
        focal: Focal,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Commonness of each pair relative to its degree-based expectation.
    Lee {
        #[command(flatten)]
        focal: Focal,
    },
    /// Share of pairs bridging communities of the cumulative graph.
    Foster {
        #[command(flatten)]
        focal: Focal,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: f64,
    },
    /// New, reused pairs weighted by co-citation profile dissimilarity.
    Wang {
        #[command(flatten)]
        focal: Focal,
        #[arg(long, default_value_t = 3)]
        b: u32,
        #[arg(long, default_value_t = 3)]
        f: u32,
        #[arg(long, default_value_t = 1)]
        reuse: u32,
    },
    /// Percentile of pairwise distances between reference embeddings.
    Shibayama {
        #[arg(long)]
        year: i32,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value = "title")]
        field: TextField,
        #[arg(long, default_value_t = 10.0)]
        q: f64,
    },
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n_docs: usize,
    #[arg(long, default_value_t = 50)]
    n_entities: usize,
    #[arg(long, default_value_t = 4)]
    communities: usize,
    #[arg(long, default_value_t = 10)]
    mean_refs: usize,
    #[arg(long, default_value_t = 0.6)]
    p_internal: f64,
    #[arg(long, default_value_t = 0.1)]
    p_cross: f64,
    #[arg(long, default_value_t = 3)]
    keywords_per_doc: usize,
    #[arg(long, default_value_t = 16)]
    embedding_dim: usize,
    /// Corpus output path; embeddings and ground truth are written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ReportCommand {
    /// Per indicator, score and year: count, mean, std and percentiles.
    Trends {
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Pearson and Spearman correlations between score files.
    ///
    /// A file may select its score column as `path#score`.
    Correlate {
        #[arg(long, num_args = 2.., required = true)]
        scores: Vec<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Every record and raw distribution of one document.
    Doc {
        #[arg(long)]
        id: String,
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i32 = lo.trim().parse().map_err(|_| format!("bad year `{lo}`"))?;
    let hi: i32 = hi.trim().parse().map_err(|_| format!("bad year `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_size(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad size `{s}`"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e9) {
        return Err(format!("bad size `{s}`"));
    }
    Ok(v as usize)
}

/// Whether some documents were skipped with warnings.
enum Outcome {
    Complete,
    Partial,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn command_line() -> Vec<String> {
    std::env::args().collect()
}

struct Loaded {
    store: CorpusStore,
    path: PathBuf,
    skipped_records: usize,
}

fn load(cli: &Cli) -> Result<Loaded> {
    let path = cli.corpus.clone().context("--corpus is required")?;
    let opts = IngestOptions {
        year_range: cli.years,
        ..Default::default()
    };
    let (store, report, hit) = load_corpus_cached(&path, &opts)?;
    for w in &report.warnings {
        log::warn!("{}:{}: {:?}: {}", path.display(), w.line, w.kind, w.detail);
    }
    log::info!(
        "{} documents ({})",
        store.len(),
        if hit { "cache" } else { "parsed" }
    );
    Ok(Loaded {
        skipped_records: report.count(WarningKind::SkippedRecord),
        store,
        path,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Ingest => ingest(cli),
        Command::Cooc {
            command: CoocCommand::Build { on, year },
        } => cooc(cli, (*on).into(), *year),
        Command::Novelty { command } => novelty(cli, command),
        Command::Disruption { year, measures } => {
            let measures: Vec<Measure> = parse_measures(measures)?;
            let loaded = load(cli)?;
            score(
                cli,
                &loaded,
                None,
                Indicator::Disruption {
                    year: *year,
                    measures,
                },
            )
        }
        Command::Synth(args) => synth(cli, args),
        Command::Report { command } => report(command),
        Command::Verify {
            year,
            embeddings,
            samples,
            size_guard,
        } => verify(cli, *year, embeddings.as_deref(), *samples, *size_guard),
        Command::Bench { sizes, indicators } => bench(cli, sizes, indicators),
    }
}

fn ingest(cli: &Cli) -> Result<Outcome> {
    let path = cli.corpus.clone().context("--corpus is required")?;
    let opts = IngestOptions {
        year_range: cli.years,
        ..Default::default()
    };
    let cache = scinov_core::corpus::cache_path_for(&path);
    if cache.exists() {
        std::fs::remove_file(&cache)
            .with_context(|| format!("removing stale cache {}", cache.display()))?;
    }
    let (store, report, _) = load_corpus_cached(&path, &opts)?;
    let summary = serde_json::json!({
        "documents": store.len(),
        "year_span": store.year_span(),
        "lines": report.lines,
        "skipped_records": report.count(WarningKind::SkippedRecord),
        "duplicate_ids": report.count(WarningKind::DuplicateId),
        "clamped_reference_years": report.count(WarningKind::ClampedReferenceYear),
        "dropped_references": report.count(WarningKind::DroppedReference),
        "warnings": report.warnings,
        "cache": cache,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if report.count(WarningKind::SkippedRecord) > 0 {
        Outcome::Partial
    } else {
        Outcome::Complete
    })
}

fn cooc(cli: &Cli, kind: EntityKind, year: Option<i32>) -> Result<Outcome> {
    let loaded = load(cli)?;
    let (lo, hi) = match year {
        Some(y) => (y, y),
        None => loaded.store.year_span().context("empty corpus")?,
    };
    let mut manifest = RunManifest::new(
        command_line(),
        "cooc",
        &format!("entity={kind},years={lo}:{hi}"),
    );
    manifest.add_input(&loaded.path, loaded.store.provenance().input_digest.clone());
    let graph = manifest.time("build", || window_graph(&loaded.store, kind, lo, hi));
    std::fs::create_dir_all(&cli.out_dir)?;
    let out = cli.out_dir.join(format!("cooc_{kind}_{lo}-{hi}.graph"));
    write_graph(&graph, &out)?;
    manifest.write(&sidecar_path(&out))?;
    println!(
        "{}: {} nodes, {} edges, N = {}",
        out.display(),
        graph.node_count(),
        graph.edge_count(),
        graph.total_weight()
    );
    Ok(Outcome::Complete)
}

fn novelty(cli: &Cli, command: &NoveltyCommand) -> Result<Outcome> {
    let loaded = load(cli)?;
    let (indicator, embeddings) = match command {
        NoveltyCommand::Uzzi { focal, samples } => (
            Indicator::Uzzi(UzziParams {
                samples: *samples,
                seed: cli.seed,
                ..UzziParams::new(focal.on.into(), focal.year)
            }),
            None,
        ),
        NoveltyCommand::Lee { focal } => (
            Indicator::Lee(LeeParams {
                entity: focal.on.into(),
                year: focal.year,
            }),
            None,
        ),
        NoveltyCommand::Foster { focal, resolution } => (
            Indicator::Foster(FosterParams {
                resolution: *resolution,
                seed: cli.seed,
                ..FosterParams::new(focal.on.into(), focal.year)
            }),
            None,
        ),
        NoveltyCommand::Wang { focal, b, f, reuse } => (
            Indicator::Wang(WangParams {
                backward: *b,
                forward: *f,
                reuse_threshold: *reuse,
                ..WangParams::new(focal.on.into(), focal.year)
            }),
            None,
        ),
        NoveltyCommand::Shibayama {
            year,
            embeddings,
            field,
            q,
        } => (
            Indicator::Shibayama {
                year: *year,
                params: ShibayamaParams {
                    field: *field,
                    percentile: *q,
                },
            },
            Some(embeddings.as_path()),
        ),
    };
    score(cli, &loaded, embeddings, indicator)
}

fn score(
    cli: &Cli,
    loaded: &Loaded,
    embeddings: Option<&Path>,
    indicator: Indicator,
) -> Result<Outcome> {
    let mut manifest = RunManifest::new(command_line(), indicator.name(), &indicator.fingerprint());
    manifest.seed = indicator.seed();
    manifest.add_input(&loaded.path, loaded.store.provenance().input_digest.clone());
    let emb: Option<EmbeddingStore> = match embeddings {
        Some(p) => {
            manifest.add_input(p, file_digest(p)?);
            Some(manifest.time("load_embeddings", || load_embeddings(p))?)
        }
        None => None,
    };
    let out = manifest.time("score", || {
        run_indicator(&loaded.store, emb.as_ref(), &indicator)
    })?;
    for w in &out.warnings {
        log::warn!("{}: {w}", indicator.name());
    }
    for id in &out.skipped {
        log::warn!("{}: no score for {id}", indicator.name());
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let path = cli.out_dir.join(indicator.file_name());
    manifest.time("write", || write_scores(&path, &out.records))?;
    manifest.write(&sidecar_path(&path))?;
    println!("{}: {} records", path.display(), out.records.len());
    Ok(if out.skipped.is_empty() && loaded.skipped_records == 0 {
        Outcome::Complete
    } else {
        Outcome::Partial
    })
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<Outcome> {
    let params = SynthParams {
        n_docs: a.n_docs,
        n_entities: a.n_entities,
        years: cli.years.unwrap_or(SynthParams::default().years),
        communities: a.communities,
        mean_refs: a.mean_refs,
        p_internal: a.p_internal,
        p_cross: a.p_cross,
        keywords_per_doc: a.keywords_per_doc,
        embedding_dim: a.embedding_dim,
        seed: cli.seed,
        ..Default::default()
    };
    let corpus = synth_corpus(&params)?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| cli.out_dir.join("synth.jsonl"));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_corpus(&out, &corpus.documents)?;
    let emb_path = out.with_extension("embeddings.jsonl");
    if params.embedding_dim > 0 {
        write_embeddings(&emb_path, &corpus.embeddings)?;
    }
    write_truth(&out.with_extension("truth.json"), &corpus.truth)?;
    let mut manifest = RunManifest::new(command_line(), "synth", &format!("{params:?}"));
    manifest.seed = Some(cli.seed);
    manifest.write(&sidecar_path(&out))?;
    println!("{}: {} documents", out.display(), corpus.documents.len());
    Ok(Outcome::Complete)
}

fn read_labelled(path: &Path) -> Result<Vec<scinov_core::ScoreRecord>> {
    read_scores(path).with_context(|| format!("reading {}", path.display()))
}

fn report(command: &ReportCommand) -> Result<Outcome> {
    match command {
        ReportCommand::Trends { scores, format } => {
            let mut records = Vec::new();
            for p in scores {
                records.extend(read_labelled(p)?);
            }
            let rows = report_trends(&records)?;
            match format {
                Format::Csv => print!("{}", trends_csv(&rows)?),
                Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
            }
        }
        ReportCommand::Correlate { scores, format } => {
            let mut series = Vec::new();
            for spec in scores {
                let (path, name) = match spec.rsplit_once('#') {
                    Some((p, n)) => (p, Some(n)),
                    None => (spec.as_str(), None),
                };
                let records = read_labelled(Path::new(path))?;
                series.push(ScoreSeries::from_records(path, &records, name)?);
            }
            let m = report_correlation(&series)?;
            match format {
                Format::Csv => print!("{}", correlation_csv(&m)?),
                Format::Json => println!("{}", serde_json::to_string_pretty(&m)?),
            }
        }
        ReportCommand::Doc { id, scores } => {
            let mut files = Vec::new();
            for p in scores {
                files.push((p.display().to_string(), read_labelled(p)?));
            }
            print!("{}", doc_csv(&report_doc(id, &files)?)?);
        }
    }
    Ok(Outcome::Complete)
}

fn verify(
    cli: &Cli,
    year: i32,
    embeddings: Option<&Path>,
    samples: usize,
    guard: usize,
) -> Result<Outcome> {
    let loaded = load(cli)?;
    let emb = embeddings.map(load_embeddings).transpose()?;
    let mut indicators = Vec::new();
    for entity in [EntityKind::Journals, EntityKind::Keywords] {
        indicators.push(Indicator::Uzzi(UzziParams {
            samples,
            seed: cli.seed,
            ..UzziParams::new(entity, year)
        }));
        indicators.push(Indicator::Lee(LeeParams { entity, year }));
        indicators.push(Indicator::Foster(FosterParams {
            seed: cli.seed,
            ..FosterParams::new(entity, year)
        }));
        indicators.push(Indicator::Wang(WangParams::new(entity, year)));
    }
    if emb.is_some() {
        for field in [TextField::Title, TextField::Abstract] {
            indicators.push(Indicator::Shibayama {
                year,
                params: ShibayamaParams {
                    field,
                    ..Default::default()
                },
            });
        }
    }
    indicators.push(Indicator::Disruption {
        year: Some(year),
        measures: Measure::DEFAULT.to_vec(),
    });

    let mut failures = 0;
    let mut rows = Vec::new();
    for ind in &indicators {
        let engine = run_indicator(&loaded.store, emb.as_ref(), ind);
        let oracle = oracle_score(ind, &loaded.store, emb.as_ref(), guard);
        let (status, docs, mismatches) = match (engine, oracle) {
            (Ok(e), Ok(o)) => {
                let diff = compare(&e.records, &o);
                if !diff.is_empty() {
                    failures += 1;
                }
                let status = if diff.is_empty() { "ok" } else { "MISMATCH" };
                (status.to_string(), o.scores.len(), diff)
            }
            (Err(scinov_core::Error::CorpusTooLarge { found, limit }), _)
            | (_, Err(scinov_core::Error::CorpusTooLarge { found, limit })) => {
                bail!("corpus has {found} documents; the reference implementation accepts at most {limit}")
            }
            (Err(a), Err(b)) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => {
                (format!("both failed: {a}"), 0, Vec::new())
            }
            (e, o) => {
                failures += 1;
                let describe = |r: std::result::Result<(), scinov_core::Error>| match r {
                    Ok(()) => "ok".to_string(),
                    Err(e) => e.to_string(),
                };
                let status = format!(
                    "DISAGREE engine={} oracle={}",
                    describe(e.map(|_| ())),
                    describe(o.map(|_| ()))
                );
                (status, 0, Vec::new())
            }
        };
        println!(
            "{:<11} {:<9} docs={:<5} {}",
            ind.name(),
            ind.entity(),
            docs,
            status
        );
        for m in mismatches.iter().take(5) {
            println!(
                "    {} {}: engine={:?} oracle={:?}",
                m.doc_id, m.score, m.engine, m.oracle
            );
        }
        rows.push(serde_json::json!({
            "indicator": ind.name(),
            "entity": ind.entity(),
            "params": ind.fingerprint(),
            "status": status,
            "documents": docs,
            "mismatches": mismatches,
        }));
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let path = cli.out_dir.join(format!("verify_{year}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&rows)? + "\n")?;
    if failures > 0 {
        bail!("{failures} indicator(s) disagree with the reference implementation");
    }
    Ok(Outcome::Complete)
}

fn bench(cli: &Cli, sizes: &[usize], indicators: &[String]) -> Result<Outcome> {
    let specs = indicators
        .iter()
        .map(|s| s.parse::<BenchSpec>())
        .collect::<scinov_core::Result<Vec<_>>>()?;
    let rows = run_bench(sizes, &specs, cli.seed)?;
    let csv = bench_csv(&rows)?;
    std::fs::create_dir_all(&cli.out_dir)?;
    let path = cli.out_dir.join("bench.csv");
    std::fs::write(&path, &csv)?;
    print!("{csv}");
    Ok(Outcome::Complete)
}
