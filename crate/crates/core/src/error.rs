use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty signal matrix")]
    Empty,

    #[error("signal matrix needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("non-finite value at channel {channel}, sample {sample}")]
    NonFinite { channel: usize, sample: usize },

    #[error("lag {lag} out of range for {samples} samples (max {max})")]
    LagOutOfRange { lag: usize, samples: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("exhaustive permutation matching supports at most {max} channels, got {got}")]
    TooManyChannels { got: usize, max: usize },

    #[error("log argument {value} is not positive at channel {channel}, sample {sample}")]
    LogDomain { channel: usize, sample: usize, value: f64 },

    #[error("exponent {exponent} exceeds overflow guard at channel {channel}, sample {sample}")]
    Overflow { channel: usize, sample: usize, exponent: f64 },

    #[error("slope {value} at index {index} must be positive")]
    NonPositiveSlope { index: usize, value: f64 },

    #[error("slope {value} at index {index} outside bounds [{min}, {max}]")]
    SlopeOutOfBounds { index: usize, value: f64, min: f64, max: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("generation {generation}, candidate {candidate}: {source}")]
    Evaluation {
        generation: usize,
        candidate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("io: {0}")]
    Io(String),

    #[error("bundle: {0}")]
    Bundle(String),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Overflow { .. }
            | Error::DegenerateData(_)
            | Error::DegenerateChannel(_)
            | Error::NotSymmetric(_) => true,
            Error::Evaluation { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
