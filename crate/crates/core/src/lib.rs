// SPDX-License-Identifier: Apache-2.0

//! Combinatorial novelty and disruption indicators for scholarly documents.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] parses line-delimited document records and keeps them in an
//!   immutable, year-partitioned [`corpus::CorpusStore`] with a binary
//!   columnar cache.
//! * [`graph`] builds entity co-occurrence graphs (journals or keywords) and
//!   the document citation graph.
//! * [`resampling`] produces the year-stratified shuffled networks used as a
//!   null model for atypicality z-scores.
//! * [`novelty`] holds the co-occurrence indicators (atypicality,
//!   commonness, community bridging, reuse-conditioned novelty) together with
//!   the Louvain implementation they depend on.
//! * [`semantic`] scores documents from precomputed reference embeddings.
//! * [`disruption`] classifies citers and computes disruption, depth,
//!   breadth, dependence and independence.
//! * [`oracle`] is a deliberately naive re-implementation of every indicator,
//!   used to cross-check the engine on small corpora.
//! * [`pipeline`] runs any indicator by name; [`synth`], [`report`],
//!   [`manifest`] and [`bench`] support the command line tool.

pub mod bench;
pub mod corpus;
pub mod disruption;
pub mod error;
pub mod graph;
pub mod manifest;
pub mod novelty;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod resampling;
pub mod score;
pub mod semantic;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use graph::EntityKind;
pub use score::ScoreRecord;

/// Version string embedded in run manifests.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
