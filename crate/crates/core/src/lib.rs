//! Verbal aggression detection for imageboard messages.
//!
//! The pipeline ingests raw posts ([`corpus`]), normalizes them into token
//! streams ([`textnorm`]), trains skip-gram word vectors ([`embedding`]),
//! turns each message into twelve seed-distance and length features
//! ([`features`]) and classifies them with a random forest ([`forest`]).
//! [`pipeline`] wires the stages together behind a JSON config.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod features;
pub mod forest;
pub mod lang;
mod numfmt;
pub mod pipeline;
mod seed;
pub mod synthetic;
pub mod textnorm;

pub use error::{Error, Result};
pub use lang::Language;
