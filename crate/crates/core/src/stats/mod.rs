//! Least squares, marginal means, contrasts, correlation and logistic regression.

pub mod correlation;
pub mod design;
pub mod dist;
pub mod linalg;
pub mod linear;
pub mod logistic;

use alloc::string::String;

pub use correlation::{correlate, pearson, spearman, Correlation};
pub use design::{Covariate, Design, Factor, Table, Term};
pub use linear::{emmeans, fit_linear, pairwise_contrasts, ContrastResult, Emm, Hypothesis, LinearFit};
pub use logistic::{fit_logistic, likelihood_ratio, LogisticFit, LrtResult};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("{rows} rows cannot identify {cols} coefficients")]
    TooFewRows { rows: usize, cols: usize },
    #[error("design matrix is rank deficient at column `{0}`")]
    RankDeficient(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("unknown level `{level}` of factor `{factor}`")]
    UnknownLevel { factor: String, level: String },
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("zero variance in `{0}`")]
    ZeroVariance(&'static str),
    #[error("response must be 0 or 1")]
    NotBinary,
    #[error("complete separation detected at coefficient `{0}`")]
    Separation(String),
    #[error("no rows left after excluding separated groups")]
    NothingToFit,
}
