use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented invariant.
    #[error("{key}: {constraint}")]
    Invalid { key: String, constraint: String },

    #[error("empty grid")]
    EmptyGrid,

    #[error("detuning grid must be strictly increasing")]
    UnsortedGrid,

    #[error("window/fwhm violation: window {window:e} s is shorter than 8 x fwhm {fwhm:e} s")]
    WindowTooSmall { window: f64, fwhm: f64 },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("window wraparound: {fraction:e} of the output energy lies in the outer 5% of the window; use a larger window")]
    Wraparound { fraction: f64 },

    #[error("peak at boundary")]
    PeakAtBoundary,

    #[error("unbounded pulse: no half-maximum crossing on the {side} side")]
    UnboundedPulse { side: &'static str },

    #[error("traces do not share a grid")]
    GridMismatch,

    #[error("insufficient data: need at least {need} points, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("nonpositive power {0}")]
    NonPositivePower(f64),

    #[error("normal matrix singular: damping exceeded {0:e}")]
    SingularNormalMatrix(f64),

    #[error("no δ satisfies distortion cap {0}")]
    NoFeasibleDetuning(f64),

    #[error("non-uniform grid: max deviation {0:e} of the mean spacing")]
    NonUniformGrid(f64),

    #[error("trace too short: {0} rows, need at least 16")]
    TraceTooShort(usize),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Wraparound { .. }
                | Error::PeakAtBoundary
                | Error::UnboundedPulse { .. }
                | Error::SingularNormalMatrix(_)
                | Error::NoFeasibleDetuning(_)
        )
    }
}
