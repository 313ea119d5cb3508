use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty dimension: {0}")]
    EmptyDimension(&'static str),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is not positive semi-definite: eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e})")]
    Factorization { pivot: usize, value: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid value for `{key}`: {value} (expected {expected})")]
    InvalidParameter {
        key: String,
        value: String,
        expected: String,
    },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("degenerate combiner for UE {ue}: effective channel is zero")]
    DegenerateCombiner { ue: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: &str, value: impl ToString, expected: &str) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            value: value.to_string(),
            expected: expected.to_string(),
        }
    }

    /// True for failures of the linear-algebra kernel (as opposed to bad
    /// input or I/O). The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPsd { .. } | Error::Factorization { .. } | Error::NonFinite(_) => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
