use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("hbar must lie in (0, 1], got {0}")]
    HbarOutOfRange(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too large for {what}: {size} > {limit}")]
    GridTooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("field is not antisymmetric: |B_jk + B_kj| = {defect:e} at a probe point")]
    NotAntisymmetric { defect: f64 },
    #[error("gauge gradient mismatch: defect {0:e}")]
    GaugeMismatch(f64),
    #[error("fiducial vector invalid: {0}")]
    InvalidFiducial(String),
    #[error("could not parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("index {index} out of range {range}")]
    OutOfRange { index: usize, range: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

pub(crate) fn parse_err(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Parse {
        what,
        detail: detail.into(),
    }
}
