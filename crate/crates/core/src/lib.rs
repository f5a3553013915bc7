//! Exponentiated hypoexponential distributions.
//!
//! The family raises the CDF of a sum of independent exponential stages with
//! distinct rates `α_1, …, α_n` to a power `k > 0`:
//! `F_Y(t) = [Σ_i A_i (1 - e^{-α_i t})]^k`.
//!
//! - [`dist`]: exponential, exponentiated-exponential and hypoexponential building blocks
//! - [`mee`]: maxima of independent exponentiated exponentials
//! - [`ehypo`]: the family itself, its integer-`k` expansion and sampling
//! - [`estimate`]: profile maximum likelihood
//! - [`gof`]: information criteria and EDF statistics
//! - [`ingest`], [`fixtures`]: sample parsing and the bundled remission-time data
//!
//! With the default `parallel` feature, bulk sampling, multistart fitting and
//! likelihood sums run on rayon. Results do not depend on the execution mode.

pub mod dist;
pub mod ehypo;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod gof;
pub mod ingest;
pub mod mee;
pub mod par;

pub use dist::{Distribution, EEParams, Exponential, Exponentiated, HypoCoefficients, Hypoexponential, RateVector};
pub use ehypo::{EHypo, EHypoParams};
pub use error::{Error, Result};
pub use estimate::{fit, FitOptions, FitResult, Sample};
pub use gof::GofReport;
pub use mee::MeeParams;
pub use par::Execution;
