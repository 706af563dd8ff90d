use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" | "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown input `{name}` (expression takes {arity} inputs)")]
    Arity { name: String, arity: usize },

    #[error("shape error{}: {message}", offset.map(|o| format!(" at offset {o}")).unwrap_or_default())]
    Shape { offset: Option<usize>, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },

    #[error("element is not in {group} (membership residual {residual:e})")]
    NotInGroup { group: String, residual: f64 },

    #[error("logarithm undefined near the cut locus (rotation angle {angle})")]
    CutLocus { angle: f64 },

    #[error("point {point:?} lies outside chart `{chart}`")]
    OutOfChart { chart: String, point: Vec<f64> },

    #[error("parameter {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("segment from {from:?} to {to:?} leaves chart `{chart}`")]
    SegmentLeavesChart { chart: String, from: Vec<f64>, to: Vec<f64> },

    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid homotopy: {0}")]
    InvalidHomotopy(String),

    #[error("homotopy boundary does not match the representatives: {0}")]
    BoundaryMismatch(String),

    #[error("not a loop: starts at {start} but ends at {end}")]
    NotALoop { start: String, end: String },

    #[error("step-halving error estimate {estimate:e} exceeds {limit:e}; increase steps")]
    StepTooCoarse { estimate: f64, limit: f64 },

    #[error("torsor mismatch: {0}")]
    TorsorMismatch(String),

    #[error("no access path for chart `{0}`")]
    MissingAccessPath(String),

    #[error("map is not a group homomorphism (residual {residual:e})")]
    NotAHomomorphism { residual: f64 },

    #[error("shape mismatch between cocycle objects: {0}")]
    ShapeMismatch(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn shape(message: impl Into<String>) -> Self {
        Error::Shape { offset: None, message: message.into() }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Config { path: path.into(), message: message.to_string() }
    }

    /// Locate a parse error by line and column of `src`.
    pub(crate) fn with_span(self, src: &str, span: Option<std::ops::Range<usize>>) -> Self {
        match (self, span) {
            (Error::Config { message, .. }, Some(span)) => {
                let before = &src[..span.start.min(src.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                Error::Config { path: format!("line {line}, column {column}"), message }
            }
            (e, _) => e,
        }
    }

    /// Prefix the schema path of a config error (or wrap any other error).
    pub(crate) fn at(self, path: &str) -> Self {
        match self {
            Error::Config { path: inner, message } if !inner.is_empty() => {
                Error::Config { path: format!("{path}.{inner}"), message }
            }
            Error::Config { message, .. } => Error::Config { path: path.to_string(), message },
            other => Error::Config { path: path.to_string(), message: other.to_string() },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
