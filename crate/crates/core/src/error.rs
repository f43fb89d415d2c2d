use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("value {value} is outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("P-value {value} at index {index} is not within {tolerance:e} of any support point")]
    SnapFailure {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("invalid P-value {value} at index {index}: must lie in (0, 1]")]
    InvalidPValue { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample size too small: {0}")]
    SampleSize(String),

    #[error("tied observations are not allowed for rank-based statistic {0}")]
    Ties(&'static str),

    #[error("zero observation is not allowed for the signed-rank test")]
    ZeroObservation,

    #[error("enumeration of {required} assignments exceeds the cap of {cap}")]
    EnumerationCap { required: u128, cap: u64 },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("no P-value is at or below the threshold {0}")]
    EmptyRejection(f64),

    #[error("smoothing spline: {0}")]
    Spline(String),

    #[error("numerical routine did not converge: {0}")]
    NonConvergence(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("estimator produced a non-positive pi0 ({0})")]
    NonPositivePi0(f64),

    #[error("missing support: method {0} needs the P-value support")]
    MissingSupport(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}
