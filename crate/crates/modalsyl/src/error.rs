use std::path::PathBuf;

use modalsyl_core::analysis::AnalysisError;
use modalsyl_core::kripke::SequentParseError;
use modalsyl_core::lexicon::LexiconError;
use modalsyl_core::realize::RealizeError;
use modalsyl_core::ProverError;

use crate::eval::EvalError;
use crate::study::StudyError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Sequent(#[from] SequentParseError),
    #[error("{0}")]
    Prover(#[from] ProverError),
    #[error("{0}")]
    Lexicon(#[from] LexiconError),
    #[error("{0}")]
    Realize(#[from] RealizeError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Study(#[from] StudyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable category used in one-line CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Usage(_) => "usage",
            Error::Sequent(_) => "syntax",
            Error::Prover(_) => "prover",
            Error::Lexicon(_) => "lexicon",
            Error::Realize(_) => "realize",
            Error::Eval(_) => "eval",
            Error::Analysis(_) => "analysis",
            Error::Study(_) => "study",
            Error::Csv(_) => "csv",
        }
    }
}
