//! Inferring left/right political leaning of social-media users from
//! non-political text and follow-network features.
//!
//! The crate is organised by pipeline stage: [`corpus`] ingests tweets and
//! voter-advice results, [`polex`] induces the political lexicon,
//! [`textprep`] builds feature matrices, [`topics`] fits the anchor-word
//! topic model, [`classify`] trains the classifiers, [`eval`] runs the
//! evaluation protocol and [`newsstudy`] applies a trained model to news
//! sharers. [`synthgen`] produces planted-truth corpora for every stage.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod newsstudy;
pub mod pipeline;
pub mod polex;
pub mod synthgen;
pub mod textprep;
pub mod topics;

pub use error::{Error, Result};
