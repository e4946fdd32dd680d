use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed text input. `line` is 1-based when known.
    #[error("parse error{}: {message}", fmt_line(*line))]
    Parse { line: Option<usize>, message: String },

    /// A path, sequence, or matrix violates its structural invariants.
    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    /// Shapes or lengths disagree between inputs that must match.
    #[error("dimension mismatch{}: {message}", fmt_record(*record))]
    Dimension {
        record: Option<usize>,
        message: String,
    },

    /// Raw write positions went backwards and strict monotonicity was requested.
    #[error("write positions are not monotone at target position {position}")]
    NonMonotone { position: usize },

    /// The norm is zero, so its gradient does not exist.
    #[error("gradient undefined: alpha and gamma are identical")]
    ZeroDistance,

    /// A ratio metric has an empty denominator set.
    #[error("undefined metric {metric}: {message}")]
    EmptyDenominator {
        metric: &'static str,
        message: String,
    },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

fn fmt_record(record: Option<usize>) -> String {
    record.map(|r| format!(" in record {r}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn dimension(message: impl Into<String>) -> Self {
        Error::Dimension {
            record: None,
            message: message.into(),
        }
    }

    /// Attach a record id to dimension errors and a line number to parse
    /// errors that do not have one yet.
    pub fn in_record(self, id: usize) -> Self {
        match self {
            Error::Dimension {
                record: None,
                message,
            } => Error::Dimension {
                record: Some(id),
                message,
            },
            Error::Parse {
                line: None,
                message,
            } => Error::Parse {
                line: Some(id + 1),
                message,
            },
            Error::Invalid { what, message } => Error::Invalid {
                what,
                message: format!("record {id}: {message}"),
            },
            other => other,
        }
    }

    /// Process exit code: 1 for bad input, 2 for consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid { .. } | Error::Io { .. } => 1,
            Error::Dimension { .. }
            | Error::NonMonotone { .. }
            | Error::ZeroDistance
            | Error::EmptyDenominator { .. } => 2,
        }
    }
}
