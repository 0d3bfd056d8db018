use std::path::PathBuf;

/// Errors produced anywhere in the tracking pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid harmonic state: order {order} at omega {omega} reaches Nyquist")]
    InvalidState { omega: f64, order: usize },

    #[error("underdetermined basis: {rows} samples cannot support {cols} columns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("singular normal equations")]
    Singular,

    #[error("degenerate frame: zero energy")]
    DegenerateFrame,

    #[error("hypergeometric argument {z} outside [0, 1)")]
    Domain { z: f64 },

    #[error("series did not converge after {iterations} terms (partial log value {partial})")]
    NonConvergence { partial: f64, iterations: usize },

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("audio format error: {0}")]
    Format(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
