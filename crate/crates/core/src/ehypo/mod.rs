//! The exponentiated hypoexponential family `F_Y = [F_{S_n}]^k`.
//!
//! The power form is the canonical evaluator for every real `k > 0`. For
//! integer `k` the [`expansion`] submodule provides the equivalent signed
//! mixture over maxima of exponentiated exponentials.

pub mod expansion;
pub mod sampling;

use serde::{Deserialize, Serialize};

use crate::dist::{ln_from_parts, Distribution, Hypoexponential, RateVector};
use crate::error::{Error, Result};

pub use expansion::{ehypo_expansion, enumerate_ek, EHypoExpansion, ExpansionTerm, MultiIndex, ENUMERATION_BOUND};
pub use sampling::{ehypo_sample, ehypo_sample_with, inverse_cdf, Sampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EHypoParams {
    rates: RateVector,
    k: f64,
}

impl EHypoParams {
    pub fn new(rates: RateVector, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!("exponent k must be positive and finite, got {k}")));
        }
        Ok(Self { rates, k })
    }

    pub fn from_rates(rates: &[f64], k: f64) -> Result<Self> {
        Self::new(RateVector::new(rates.to_vec())?, k)
    }

    pub fn rates(&self) -> &RateVector {
        &self.rates
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn stages(&self) -> usize {
        self.rates.len()
    }

    /// `k` as an integer, when it is one.
    pub fn integer_k(&self) -> Option<u32> {
        (self.k.fract() == 0.0 && self.k <= u32::MAX as f64).then_some(self.k as u32)
    }

    pub fn distribution(&self) -> EHypo {
        EHypo::new(self)
    }
}

/// Every quantity of interest at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEval {
    pub t: f64,
    pub pdf: f64,
    pub cdf: f64,
    pub survival: f64,
    pub hazard: f64,
    /// Survival underflowed to zero; hazard is reported as `+inf`.
    pub tail_saturated: bool,
    /// The hypoexponential sum left `[0, 1]` by more than the cancellation slack.
    pub ill_conditioned: bool,
}

/// Power-form evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct EHypo {
    hypo: Hypoexponential,
    k: f64,
}

impl EHypo {
    pub fn new(params: &EHypoParams) -> Self {
        Self {
            hypo: Hypoexponential::new(params.rates.clone()),
            k: params.k,
        }
    }

    pub fn hypo(&self) -> &Hypoexponential {
        &self.hypo
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn ln_base(&self, t: f64) -> (f64, bool) {
        let (f, s, ill) = self.hypo.cdf_survival(t);
        if f <= 0.0 {
            return (f64::NEG_INFINITY, ill);
        }
        (ln_from_parts(f, s), ill)
    }

    /// Density limit at `t = 0`: `F_S(t) ~ (Π α / n!) t^n`, so the density is
    /// of order `t^{nk - 1}`.
    fn pdf_at_origin(&self) -> f64 {
        let n = self.hypo.rates().len() as f64;
        let nk = n * self.k;
        if nk < 1.0 {
            f64::INFINITY
        } else if nk == 1.0 {
            let lead: f64 = self.hypo.rates().as_slice().iter().product::<f64>()
                / (1..=self.hypo.rates().len()).map(|i| i as f64).product::<f64>();
            lead.powf(self.k)
        } else {
            0.0
        }
    }

    pub fn evaluate(&self, t: f64) -> PointEval {
        let (_, _, ill) = self.hypo.cdf_survival(t);
        let survival = self.survival(t);
        let pdf = self.pdf(t);
        let tail_saturated = survival <= 0.0;
        PointEval {
            t,
            pdf,
            cdf: self.cdf(t),
            survival,
            hazard: if tail_saturated { f64::INFINITY } else { pdf / survival },
            tail_saturated,
            ill_conditioned: ill,
        }
    }
}

impl Distribution for EHypo {
    fn cdf(&self, t: f64) -> f64 {
        let ln_f = self.ln_cdf(t);
        if ln_f == f64::NEG_INFINITY {
            0.0
        } else {
            ln_f.exp()
        }
    }

    fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if t == 0.0 {
            return self.pdf_at_origin();
        }
        let base = self.hypo.pdf(t);
        if self.k == 1.0 {
            return base;
        }
        if base <= 0.0 {
            return 0.0;
        }
        let (ln_f, _) = self.ln_base(t);
        if ln_f == f64::NEG_INFINITY {
            return if self.k < 1.0 { f64::INFINITY } else { 0.0 };
        }
        self.k * ((self.k - 1.0) * ln_f).exp() * base
    }

    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        -self.ln_cdf(t).exp_m1()
    }

    fn ln_cdf(&self, t: f64) -> f64 {
        self.k * self.ln_base(t).0
    }
}

pub fn ehypo_cdf(p: &EHypoParams, t: f64) -> f64 {
    p.distribution().cdf(t)
}

pub fn ehypo_pdf(p: &EHypoParams, t: f64) -> f64 {
    p.distribution().pdf(t)
}

pub fn ehypo_survival(p: &EHypoParams, t: f64) -> f64 {
    p.distribution().survival(t)
}

pub fn ehypo_hazard(p: &EHypoParams, t: f64) -> f64 {
    p.distribution().hazard(t)
}
