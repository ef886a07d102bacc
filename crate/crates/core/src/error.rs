use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pure state norm |alpha|^2 + |beta|^2 = {norm} deviates from 1 by more than {tolerance}")]
    Normalization { norm: f64, tolerance: f64 },

    #[error("non-finite amplitude or matrix entry")]
    NonFinite,

    #[error("Stokes radius {radius} lies outside the Bloch ball")]
    BlochViolation { radius: f64 },

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("not unitary: max |U^dag U - I| = {0:e}")]
    NotUnitary(f64),

    #[error("count record for axis {axis} has no counts")]
    EmptyRecord { axis: char },

    #[error("record axis {record} does not match the Hamiltonian eigendirection")]
    AxisMismatch { record: char },

    #[error("T-parameter trace normaliser underflowed")]
    DegenerateParams,

    #[error("no counts recorded for axis {0}")]
    MissingAxis(char),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
