//! Core of the modal syllogism workbench.
//!
//! Formulas of the normal modal language, a tableau prover with an
//! exhaustive-enumeration oracle, the catalog of syllogistic forms and their
//! English realization, answer-probability metrics, and the regression
//! machinery used to analyse scores. Everything here is pure computation over
//! `alloc` collections; file formats, HTTP and the CLI live in the `modalsyl`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod catalog;
pub mod formula;
pub mod fuzz;
pub mod kripke;
pub mod lexicon;
pub mod metrics;
pub mod oracle;
pub mod realize;
pub mod stats;
pub mod syntax;
pub mod tableau;

pub use catalog::{builtin_catalog, ArgForm, CatalogEntry, Family, Label};
pub use formula::{Formula, MetaFormula, Modality};
pub use kripke::{FrameClass, KripkeModel, Mode, Sequent, Verdict};
pub use lexicon::{Interpretation, Lexicon, LexiconKind};
pub use oracle::brute_force_oracle;
pub use tableau::{decide, decide_with, ProverConfig, ProverError};
