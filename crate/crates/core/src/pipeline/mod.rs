//! Stage orchestration over a JSON run configuration. Each stage reads the
//! artifacts of earlier stages from the output directory and writes its own
//! directory plus a manifest of input and output hashes.

mod config;
mod manifest;
mod stages;

pub use config::{EvalConfig, FeatureConfig, Inputs, LexiconSource, NewsConfig, RunConfig, Stage};
pub use manifest::{hash_file, sha256_hex, write_manifest, FileHash, Manifest};
pub use stages::{
    dfm, eval, ingest, lexicon, load_dfm, newsstudy, predict, read_users, run_all, topics, train, DfmSummary,
    DocumentStats, FoldRow, IngestSummary, KeptUser, ModelChoice, NewsSummary, SampleSplit, ScoredUser, TextKind,
};
