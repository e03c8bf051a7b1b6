use thiserror::Error;

use crate::Band;

/// Errors raised by the calculator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index table `{band}` has {found} samples, at least {required} are needed")]
    TooFewSamples {
        band: String,
        found: usize,
        required: usize,
    },
    #[error(
        "index table `{band}`: wavelengths must be strictly increasing and positive (row {row})"
    )]
    NonMonotone { band: String, row: usize },
    #[error("index table `{band}`: effective index must be positive (row {row})")]
    NonPositiveIndex { band: String, row: usize },
    #[error("frequency {omega:.6e} rad/s is outside the valid range [{min:.6e}, {max:.6e}] of band `{band}`")]
    OutOfRange {
        band: String,
        omega: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("mode profile `{band}`: {reason}")]
    InvalidProfile { band: String, reason: String },
    #[error("mode profiles do not share one grid: {0}")]
    GridMismatch(String),
    #[error("mode overlap vanishes; the effective area is unbounded")]
    VanishingOverlap,
    #[error("group velocity dispersion is zero; the analytic bandwidth is unbounded")]
    InfiniteBandwidth,
    #[error("band {0} is required by this process but missing from the device")]
    MissingBand(Band),
    #[error("nonlinear parameter `{0}` is not configured")]
    MissingGamma(String),
    #[error("no phase-matched point in the search bracket [{lo:.6e}, {hi:.6e}]")]
    NoPhaseMatch { lo: f64, hi: f64 },
    #[error("quadrature did not reach the requested tolerance (estimate {estimate:.6e}, error {error:.3e})")]
    QuadratureFailed { estimate: f64, error: f64 },
    #[error("pump fixed point did not converge after {iterations} iterations; circulating power oscillates in [{low:.6e}, {high:.6e}] W (bistable regime)")]
    Bistable {
        iterations: usize,
        low: f64,
        high: f64,
    },
    #[error("process does not apply: {0}")]
    Unsupported(String),
    #[error("scaling fit needs positive rates; got {0:.3e}")]
    NonPositiveRate(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
