use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("invalid variable name `{0}` (variables are x0, x1, ...)")]
    InvalidVariable(String),
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("integer literal `{0}` does not fit in 64 bits")]
    IntegerOverflow(String),
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("expression needs {needed} variables but the point has {got}")]
    Arity { needed: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error("failed to write staging sources: {0}")]
    Io(#[from] std::io::Error),
    #[error("C compiler `{compiler}` failed: {stderr}")]
    Compiler { compiler: String, stderr: String },
    #[error("could not load staged library: {0}")]
    Load(String),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown benchmark case `{0}`")]
    UnknownCase(String),
    #[error("unknown implementation `{0}`")]
    UnknownImpl(String),
    #[error("{impl_name} does not support {case}: {why}")]
    Unsupported {
        case: String,
        impl_name: &'static str,
        why: &'static str,
    },
    #[error("invalid benchmark parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
