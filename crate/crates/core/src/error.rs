use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Unsupported or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("length error in {what}: expected {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: String,
        got: usize,
    },

    /// A parameter outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bundled or user-supplied data table is missing or corrupt.
    #[error("data table {table}: {reason}")]
    Data { table: String, reason: String },

    /// A block decoder detected an error pattern it cannot correct.
    #[error("uncorrectable block: {0}")]
    Uncorrectable(String),

    #[error("synchronization error: unique word matched {matched}/16 (threshold {threshold})")]
    Sync { matched: usize, threshold: usize },

    #[error("header error: {0}")]
    Header(String),

    /// Filter design did not converge.
    #[error("filter design failed after {iterations} iterations: {reason}")]
    Design { iterations: usize, reason: String },

    /// Measured curves do not reach the requested operating point.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("simulation error at Eb/N0 = {ebn0_db} dB: {source}")]
    AtPoint {
        ebn0_db: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn length(what: &'static str, expected: impl ToString, got: usize) -> Self {
        Error::Length {
            what,
            expected: expected.to_string(),
            got,
        }
    }

    pub(crate) fn data(table: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Data {
            table: table.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by curves that do not bracket a target.
    pub fn is_insufficient_data(&self) -> bool {
        match self {
            Error::InsufficientData(_) => true,
            Error::AtPoint { source, .. } => source.is_insufficient_data(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
