use thiserror::Error;

/// Errors raised by the numerical and algebraic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adaptive step {step:e} fell below the minimum {min:e} at t = {t}")]
    StepUnderflow { t: f64, step: f64, min: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("non-finite function value at t = {t}")]
    NonFiniteValue { t: f64 },

    #[error("hypergeometric parameter c = {re}{im:+}i is a pole (non-positive integer)")]
    PoleAtC { re: f64, im: f64 },

    #[error("hypergeometric series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("t = {t} is outside the tabulated span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("potential denominator vanishes near t = {t}")]
    SingularPotential { t: f64 },

    #[error("grid has {samples} samples, at least {required} are needed")]
    GridTooCoarse { samples: usize, required: usize },

    #[error("p-vector is degenerate (|p3| or q below threshold) at t = {t}")]
    DegenerateP { t: f64 },

    #[error("reality structure violated: imaginary part {imag:e} exceeds tolerance")]
    RealityViolated { imag: f64 },

    #[error("alpha/beta pair is inconsistent with radius R: |alpha^2 + beta^2 - R^2| = {gap:e}")]
    InconsistentPair { gap: f64 },

    #[error("closed-form denominator vanishes at t = {t}")]
    PoleHit { t: f64 },

    #[error("hypergeometric amplitude A vanishes at t = {t}")]
    ZeroA { t: f64 },

    #[error("phase unwrap failed between samples near t = {t}")]
    UnwrapFailure { t: f64 },

    #[error("input spinor field is identically zero")]
    DegenerateInput,

    #[error("chain step {step} failed: {source}")]
    ChainStep { step: usize, source: Box<Error> },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Attaches the evaluation time to errors raised by pointwise routines
    /// that do not know it.
    pub fn at_time(self, t: f64) -> Error {
        match self {
            Error::DegenerateP { .. } => Error::DegenerateP { t },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
