use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at column {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("no range given for variable `{0}`")]
    MissingRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("rule references unknown columns {missing:?}; available columns: {available:?}")]
    Schema {
        missing: Vec<String>,
        available: Vec<String>,
    },

    #[error("table error at row {row}: {message}")]
    Table { row: usize, message: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("while evaluating rule `{rule}`: {source}")]
    Rule {
        rule: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_rule(rule: impl ToString, source: Error) -> Self {
        Error::Rule {
            rule: rule.to_string(),
            source: Box::new(source),
        }
    }

    /// Unwraps `Rule` context to the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Rule { source, .. } => source.root(),
            other => other,
        }
    }
}
