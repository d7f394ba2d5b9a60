use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid pairwise matrix: {0}")]
    InvalidMatrix(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("no random index for matrix order {0}")]
    UnsupportedOrder(usize),

    #[error("incomplete weights: {0}")]
    IncompleteWeights(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("schema error in {file}: {message}")]
    Schema { file: PathBuf, message: String },

    #[error("{file}: row {row}, column {column}: {message}")]
    Cell {
        file: PathBuf,
        row: String,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Schema, range or contract violations in the supplied data.
    Validation,
    /// The data is well-formed but the statistic is undefined or did not converge.
    Numeric,
    /// File system and other environment failures.
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidMatrix(_)
            | Error::UnsupportedOrder(_)
            | Error::IncompleteWeights(_)
            | Error::Schema { .. }
            | Error::Cell { .. }
            | Error::Json { .. }
            | Error::Config(_)
            | Error::MissingInput(_) => ErrorClass::Validation,
            Error::InsufficientData(_)
            | Error::Degenerate(_)
            | Error::NonConvergence { .. }
            | Error::UndefinedCorrelation(_) => ErrorClass::Numeric,
            Error::Io { .. } => ErrorClass::Io,
            Error::Stage { source, .. } => source.class(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(file: impl Into<PathBuf>, message: impl Into<String>) -> Error {
        Error::Schema {
            file: file.into(),
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_errors_keep_the_inner_class() {
        let e = Error::Degenerate("all ties".into()).in_stage("round-stats");
        assert_eq!(e.class(), ErrorClass::Numeric);
        assert_eq!(e.to_string(), "round-stats: degenerate input: all ties");
    }

    #[test]
    fn cell_errors_name_the_coordinates() {
        let e = Error::Cell {
            file: "ratings_round1.csv".into(),
            row: "e03".into(),
            column: "ux.cost".into(),
            message: "rating 9 outside 1..=5".into(),
        };
        let msg = e.to_string();
        assert!(msg.contains("ratings_round1.csv"));
        assert!(msg.contains("e03"));
        assert!(msg.contains("ux.cost"));
    }
}
