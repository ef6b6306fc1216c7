use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("empty matrix")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row {row}, column {column}: malformed cell `{token}`")]
    MalformedCell {
        row: usize,
        column: usize,
        token: String,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("column {column} ({label}) is all-zero")]
    ZeroColumn { column: usize, label: String },
    #[error("invalid {kind} label `{label}`")]
    InvalidLabel { kind: &'static str, label: String },
    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("matrix still has {0} unknown pairs")]
    Incomplete(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("no character with index {0}")]
    UnknownCharacter(usize),
    #[error("duplicate realization of character {0}")]
    DuplicateRealization(usize),
    #[error("graph and matrix disagree on dimensions")]
    DimensionMismatch,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown character `{label}`")]
    UnknownCharacter { line: usize, label: String },
    #[error("line {line}: unknown species `{label}`")]
    UnknownSpecies { line: usize, label: String },
    #[error("line {line}: duplicate realization of `{label}`")]
    DuplicateRealization { line: usize, label: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("completion contains a forbidden submatrix on columns {0:?}")]
    Forbidden((usize, usize)),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{unknown} unknown pairs exceed the enumeration cap of {cap}")]
    Budget { unknown: usize, cap: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("no valid instance after {0} attempts")]
    RetriesExhausted(usize),
}
