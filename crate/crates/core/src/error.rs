use thiserror::Error;

/// Errors raised by the library. Numerical degeneracies that are part of the
/// geometry (an undefined binormal, say) are reported as flags on the series
/// instead of as errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),

    #[error("delayed argument t - tau = {arg:e} s of element {element} at sample {sample} is outside the signal support")]
    SupportViolation {
        element: usize,
        sample: usize,
        arg: f64,
    },

    #[error("observation window is empty: delays need [{lo:e}, {hi:e}] s; enable unbounded support or shrink the array")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("angles are not steering-aliased at the carrier (residual {residual:e})")]
    NotAliased { residual: f64 },

    #[error("grating-lobe diagnostic needs a uniform linear array on the x axis")]
    NonUniformArray,

    #[error("invalid Savitzky-Golay configuration: {0}")]
    InvalidFilter(String),

    #[error("series of {have} samples is shorter than the required {need}")]
    TooShort { have: usize, need: usize },

    #[error("spectrum is invalid over the whole domain")]
    InvalidSpectrum,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
