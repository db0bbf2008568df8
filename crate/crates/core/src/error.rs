use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequency {f_hz:.6e} Hz lies in a stopband")]
    Stopband { f_hz: f64 },
    #[error("pump amplitude |beta| = {beta:.4} must stay below 0.25")]
    Overdrive { beta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration failed at x = {x:.6}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("least-squares fit did not converge: {0}")]
    FitDivergence(String),
    #[error("data do not constrain the model: {0}")]
    Identifiability(String),
    #[error("temperature {t_k:.4e} K outside loss table [{lo:.4e}, {hi:.4e}] K")]
    TableRange { t_k: f64, lo: f64, hi: f64 },
    #[error("sample covariance is singular")]
    DegenerateData,
    #[error("not enough samples: {got} < {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("inferred variance {value:.4e} is negative beyond tolerance {tolerance:.4e}")]
    NonPhysicalVariance { value: f64, tolerance: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("measurement efficiency {eta:.4} exceeds the quantum limit")]
    QuantumBoundViolation { eta: f64 },
    #[error("no overlapping frequency for {f_hz:.6e} Hz")]
    FrequencyMismatch { f_hz: f64 },
    #[error("phase jump of {jump:.3} rad at {f_hz:.6e} Hz cannot be unwrapped")]
    Unwrap { f_hz: f64, jump: f64 },
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Stopband { .. } => "StopbandError",
            Error::Overdrive { .. } => "OverdriveError",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Integration { .. } => "IntegrationError",
            Error::FitDivergence(_) => "FitDivergence",
            Error::Identifiability(_) => "IdentifiabilityError",
            Error::TableRange { .. } => "TableRangeError",
            Error::DegenerateData => "DegenerateData",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::NonPhysicalVariance { .. } => "NonPhysicalVariance",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::QuantumBoundViolation { .. } => "QuantumBoundViolation",
            Error::FrequencyMismatch { .. } => "FrequencyMismatch",
            Error::Unwrap { .. } => "UnwrapError",
            Error::Io(_) => "IoError",
            Error::Parse(_) => "ParseError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
