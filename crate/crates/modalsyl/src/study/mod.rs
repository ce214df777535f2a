//! Human-study service: randomized sessions, keypress trials and export.

mod http;
mod store;

pub use http::{router, serve, SharedStore};
pub use store::{
    Key, KeyMapping, Next, Session, Store, StudyConfig, Trial, TrialRecord, INSTRUCTIONS_F_NO,
    INSTRUCTIONS_F_YES, RT_BOUNDS_MS,
};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("expected item {expected}, got {got}")]
    OutOfOrder { expected: String, got: String },
    #[error("item {0} was already answered")]
    Duplicate(String),
    #[error("session is complete")]
    SessionComplete,
    #[error("reaction time {0} ms is outside (50, 600000)")]
    InvalidRt(f64),
    #[error("key must be F or J, got {0:?}")]
    InvalidKey(String),
    #[error("no items loaded")]
    NoItems,
    #[error("{0}")]
    Io(String),
}

impl StudyError {
    /// Machine-readable reason string used in HTTP error bodies.
    pub fn reason(&self) -> &'static str {
        match self {
            StudyError::UnknownSession(_) => "unknown_session",
            StudyError::OutOfOrder { .. } => "out_of_order",
            StudyError::Duplicate(_) => "duplicate",
            StudyError::SessionComplete => "session_complete",
            StudyError::InvalidRt(_) => "invalid_rt",
            StudyError::InvalidKey(_) => "invalid_key",
            StudyError::NoItems => "no_items",
            StudyError::Io(_) => "storage",
        }
    }
}
