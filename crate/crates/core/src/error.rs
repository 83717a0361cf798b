use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdError {
    #[error("degenerate axis: zero rotation axis with nonzero angle")]
    DegenerateAxis,
    #[error("matrix is not special-unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("branch angle mismatch: {0} vs {1}")]
    BranchAngleMismatch(f64, f64),
    #[error("singular geometry: zero displacement")]
    SingularGeometry,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("odd-n UDD requires even N (got N = {0})")]
    OddUddIteration(u32),
    #[error("unsupported resonance: {0}")]
    UnsupportedResonance(String),
    #[error("no resonance in window")]
    NoResonanceInWindow,
    #[error("dip too shallow for FWHM (minimum dot {0:.4})")]
    DipTooShallow(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("no conditional coupling (A_perp = 0)")]
    NoConditionalCoupling,
    #[error("unconditional x-rotation angle vanishes (A_par = 0)")]
    VanishingUnconditionalAngle,
    #[error("negative spectral density at omega = {0}")]
    NegativeSpectrum(f64),
    #[error("spectrum: {0}")]
    Spectrum(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl DdError {
    /// True for failures caused by files or formats rather than physics.
    pub fn is_io(&self) -> bool {
        matches!(self, DdError::Io(_) | DdError::Parse(_))
    }
}

impl From<std::io::Error> for DdError {
    fn from(e: std::io::Error) -> Self {
        DdError::Io(e.to_string())
    }
}

impl From<csv::Error> for DdError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            DdError::Io(e.to_string())
        } else {
            DdError::Parse(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, DdError>;
