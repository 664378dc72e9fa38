//! Detection of content-duplication campaigns in social-media post corpora.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! * [`corpus`]: load posts, accounts and auxiliary lists; normalize and filter text.
//! * [`embed`]: embeddings from files, an HTTP service, or the hashed n-gram fallback.
//! * [`dupcluster`]: exact DBSCAN over embeddings, cluster consistency and statistics.
//! * [`ropm`]: the Ratcliff/Obershelp sliding-window baseline.
//! * [`dupgraph`]: account co-duplication graphs, Louvain communities and profiles.
//! * [`screening`]: bot/verified/political accounts, keywords, toxicity, specious links.
//! * [`synth`]: synthetic corpora with planted campaigns and scoring against ground truth.
//!
//! Data-parallel loops go through [`Execution`]; with the `parallel` feature
//! disabled every stage runs sequentially and produces identical output.

pub mod corpus;
pub mod dupcluster;
pub mod dupgraph;
pub mod embed;
mod error;
mod exec;
pub mod ropm;
pub mod screening;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
