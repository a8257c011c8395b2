use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular radius to {body}: |r| = {radius_km} km")]
    Singularity { body: &'static str, radius_km: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("step size underflow at t = {t_sec} s (h = {h_sec} s)")]
    StepSizeUnderflow { t_sec: f64, h_sec: f64 },

    #[error("integration exceeded {0} steps")]
    MaxStepsExceeded(usize),

    #[error("epoch {requested} outside span [{start}, {end}] (days, MJD2000)")]
    OutOfSpan {
        requested: f64,
        start: f64,
        end: f64,
    },

    #[error("matrix is not positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("filter divergence: position sigma {sigma_km} km exceeds ceiling {ceiling_km} km")]
    Divergence { sigma_km: f64, ceiling_km: f64 },

    #[error("optimizer infeasible: constraint residual {residual} above tolerance {tolerance}")]
    Infeasible { residual: f64, tolerance: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corridor screen rejected every sample")]
    AllSamplesRejected,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },

    #[error("toml parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
