use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration has no prevertices")]
    EmptyConfig,
    #[error("{prevertices} prevertices but {weights} weights")]
    LengthMismatch { prevertices: usize, weights: usize },
    #[error("prevertices must be strictly increasing (index {index})")]
    NonMonotone { index: usize },
    #[error("prevertex {index} sits on the basepoint 0")]
    PrevertexAtBasepoint { index: usize },
    #[error("no prevertex {side} of the basepoint 0")]
    NotStraddling { side: &'static str },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("kappa must be positive, got {0}")]
    InvalidKappa(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point coincides with prevertex {index}")]
    AtPrevertex { index: usize },
    #[error("corner {index} is at infinity (beta = {beta})")]
    CornerAtInfinity { index: usize, beta: f64 },
    #[error("quadrature subdivision limit of {limit} segments exceeded")]
    SubdivisionLimit { limit: usize },
    #[error("point {w} lies outside the prevertex gap containing the basepoint")]
    OutsideBaseGap { w: f64 },
    #[error("driver is within the collision tolerance of a force point at t = {t}")]
    Collision { t: f64 },
    #[error("metric degenerates at t = {t}: |f'(W)| = {value}")]
    DegenerateMetric { t: f64, value: f64 },
    #[error("clock is not increasing at index {index}")]
    NonMonotoneClock { index: usize },
    #[error("point swallowed at t = {t} inside the requested window")]
    Swallowed { t: f64 },
    #[error("square-root branch failure at step {step}")]
    BranchFailure { step: usize },
    #[error("time {t} is outside the path range [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },
    #[error("hypergeometric series did not converge within {terms} terms")]
    NoConvergence { terms: usize },
    #[error("kappa = {0} is outside the range of the hitting formula (kappa > 4)")]
    KappaOutOfRange(f64),
}
