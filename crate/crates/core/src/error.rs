use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("rates {first} and {second} are too close (relative gap {gap:e} < 1e-9); hypoexponential coefficients are singular")]
    CoefficientSingularity { first: f64, second: f64, gap: f64 },

    #[error("binomial expansion exponent {exponent} exceeds the cap of {cap}")]
    ExpansionOverflow { exponent: u32, cap: u32 },

    #[error("enumerating E_k for n={n}, k={k} needs {size} multi-indices, above the bound of {bound}")]
    CombinatorialExplosion { n: usize, k: u32, size: f64, bound: u64 },

    #[error("expansion form needs an integer exponent, got k={0}")]
    NonIntegerExponent(f64),

    #[error("ill-conditioned evaluation: {0}")]
    Conditioning(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("information criteria undefined: sample size {v} must exceed parameter count {c} + 1")]
    AiccUndefined { c: usize, v: usize },

    #[error("fit failed: {0}")]
    FitFailed(String),
}
