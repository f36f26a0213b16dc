use thiserror::Error;

/// Errors raised by the dynamics routines.
///
/// Numeric payloads are converted to `f64` so the error type does not
/// depend on the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unphysical state: C_I = {c_i} must be positive")]
    UnphysicalState { c_i: f64 },
    #[error("Bernoulli solution singular at t = {t}")]
    Singularity { t: f64 },
    #[error("initial state is the coherent state of this frequency: V0 = 0 and kappa0 is undefined")]
    CoherentDegeneracy,
    #[error("trajectory blew up at t = {t} (|C| = {magnitude})")]
    BlowUp { t: f64, magnitude: f64 },
    #[error("alpha fell below the floor {floor} at t = {t}")]
    AlphaFloor { t: f64, floor: f64 },
    #[error("negative radicand {value} in closed-form alpha")]
    NegativeRadicand { value: f64 },
    #[error("grid too coarse: {points} points given, at least {required} required")]
    GridTooCoarse { points: usize, required: usize },
    #[error("Wronskian of the initial datum is {value}, expected 1")]
    WronskianViolation { value: f64 },
    #[error("zero centroid: the invariant vanishes and the lambda scale is undefined")]
    ZeroCentroid,
    #[error("kernel evaluated at a focal point (|lambda_I| = {lambda_i})")]
    FocalPoint { lambda_i: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("invalid frequency profile: {0}")]
    InvalidProfile(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
