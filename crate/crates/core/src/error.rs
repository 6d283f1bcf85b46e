use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("missing sampling period (add a time column or pass --period)")]
    MissingPeriod,

    #[error("non-uniform sampling at row {row}: step {step} vs {expected}")]
    NonUniformSampling { row: usize, step: f64, expected: f64 },

    #[error("trajectory {index} has {len} samples, need more than {needed}")]
    TrajectoryTooShort { index: usize, len: usize, needed: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few training pairs: {pairs} pairs for {unknowns} basis functions")]
    TooFewPairs { pairs: usize, unknowns: usize },

    #[error("rank-deficient normal equations (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("inverse matrix inconsistent with matrix (|V V^-1 - I| = {defect:.3e})")]
    InconsistentInverse { defect: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("overdamped or spurious real mode: eigenvalue {value}")]
    RealEigenvalue { value: f64 },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("near-resonant denominator at (s1={s1}, s2={s2}, j={j}): |d| = {magnitude:.3e}")]
    NearResonance {
        s1: usize,
        s2: usize,
        j: usize,
        magnitude: f64,
    },

    #[error("singular homological system (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("resonance audit failed for mode {mode}: {flags} near-resonance(s)")]
    ResonanceAudit { mode: usize, flags: usize },

    #[error("zero decay rate for mode {mode}: spectral quotient undefined")]
    ZeroDecayRate { mode: usize },

    #[error("degenerate frequency: {0}")]
    DegenerateFrequency(String),

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::MissingPeriod | Error::InvalidMode(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Data(_)
            | Error::NonUniformSampling { .. }
            | Error::TrajectoryTooShort { .. }
            | Error::DimensionMismatch { .. }
            | Error::TooFewPairs { .. }
            | Error::Serialization(_) => ErrorKind::Data,
            Error::RankDeficient { .. }
            | Error::InconsistentInverse { .. }
            | Error::Eigen(_)
            | Error::RealEigenvalue { .. }
            | Error::NearResonance { .. }
            | Error::SingularSystem { .. }
            | Error::ResonanceAudit { .. }
            | Error::ZeroDecayRate { .. }
            | Error::DegenerateFrequency(_)
            | Error::Divergence { .. } => ErrorKind::Numerical,
            Error::Stage { source, .. } => source.kind(),
        }
    }

    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
