//! Datasets, model scoring, reports and the human-study service built on
//! `modalsyl-core`.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod jsonl;
pub mod lexicon;
pub mod report;
pub mod study;

pub use error::Error;
