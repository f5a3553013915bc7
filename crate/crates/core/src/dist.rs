//! Exponential, exponentiated-exponential and hypoexponential building blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum relative gap `|a - b| / max(a, b)` between two rates.
pub const DISTINCTNESS_TOL: f64 = 1e-9;

/// Slack allowed outside `[0, 1]` before a summed CDF is reported as ill-conditioned.
pub const CANCELLATION_SLACK: f64 = 1e-8;

/// A univariate lifetime distribution on `[0, inf)`.
pub trait Distribution {
    fn cdf(&self, t: f64) -> f64;

    fn pdf(&self, t: f64) -> f64;

    fn survival(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    /// `ln F(t)`; overridden where a better-conditioned route exists.
    fn ln_cdf(&self, t: f64) -> f64 {
        self.cdf(t).ln()
    }

    fn hazard(&self, t: f64) -> f64 {
        let s = self.survival(t);
        if s <= 0.0 {
            return f64::INFINITY;
        }
        self.pdf(t) / s
    }
}

impl<D: Distribution + ?Sized> Distribution for &D {
    fn cdf(&self, t: f64) -> f64 {
        (**self).cdf(t)
    }
    fn pdf(&self, t: f64) -> f64 {
        (**self).pdf(t)
    }
    fn survival(&self, t: f64) -> f64 {
        (**self).survival(t)
    }
    fn ln_cdf(&self, t: f64) -> f64 {
        (**self).ln_cdf(t)
    }
    fn hazard(&self, t: f64) -> f64 {
        (**self).hazard(t)
    }
}

/// `ln(1 - e^{-x})` for `x > 0`.
pub(crate) fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `ln F` from a CDF value and its complement, picking the accurate branch.
pub(crate) fn ln_from_parts(cdf: f64, survival: f64) -> f64 {
    if cdf < 0.5 {
        cdf.ln()
    } else {
        (-survival).ln_1p()
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

/// `1 - e^{-rate t}` for `t > 0`, zero otherwise.
pub fn exp_cdf(rate: f64, t: f64) -> Result<f64> {
    check_finite("rate", rate)?;
    check_finite("t", t)?;
    if rate <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    Ok(Exponential { rate }.cdf(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!("rate must be positive and finite, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Distribution for Exponential {
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            -(-self.rate * t).exp_m1()
        }
    }

    fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * t).exp()
        }
    }

    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            (-self.rate * t).exp()
        }
    }

    fn ln_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_one_minus_exp_neg(self.rate * t)
        }
    }

    fn hazard(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.rate
        }
    }
}

/// A base distribution raised to a positive power: CDF `F(t)^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exponentiated<D> {
    base: D,
    exponent: f64,
}

impl<D: Distribution> Exponentiated<D> {
    pub fn new(base: D, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::Domain(format!(
                "exponent must be positive and finite, got {exponent}"
            )));
        }
        Ok(Self { base, exponent })
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Density at `t` given `ln F(t)`; handles `F = 0` via the sign of `exponent - 1`.
    fn pdf_from_ln_cdf(&self, ln_f: f64, t: f64) -> f64 {
        let base_pdf = self.base.pdf(t);
        if self.exponent == 1.0 {
            return base_pdf;
        }
        if base_pdf <= 0.0 {
            return 0.0;
        }
        if ln_f == f64::NEG_INFINITY {
            return if self.exponent < 1.0 { f64::INFINITY } else { 0.0 };
        }
        self.exponent * ((self.exponent - 1.0) * ln_f).exp() * base_pdf
    }
}

impl<D: Distribution> Distribution for Exponentiated<D> {
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
        self.pdf_from_ln_cdf(self.base.ln_cdf(t), t)
    }

    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        -(self.ln_cdf(t)).exp_m1()
    }

    fn ln_cdf(&self, t: f64) -> f64 {
        self.exponent * self.base.ln_cdf(t)
    }
}

/// Evaluates `[F(t)]^alpha` for an arbitrary CDF evaluator.
pub fn exponentiate_cdf<F: Fn(f64) -> f64>(cdf: F, alpha: f64, t: f64) -> f64 {
    let f = cdf(t);
    if f <= 0.0 {
        0.0
    } else {
        f.powf(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EEParams {
    pub rate: f64,
    pub exponent: f64,
}

impl EEParams {
    pub fn new(rate: f64, exponent: f64) -> Result<Self> {
        Exponential::new(rate)?;
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::Domain(format!(
                "exponent must be positive and finite, got {exponent}"
            )));
        }
        Ok(Self { rate, exponent })
    }

    pub fn distribution(&self) -> Exponentiated<Exponential> {
        Exponentiated {
            base: Exponential { rate: self.rate },
            exponent: self.exponent,
        }
    }
}

/// `(1 - e^{-λt})^α`.
pub fn ee_cdf(p: &EEParams, t: f64) -> f64 {
    p.distribution().cdf(t)
}

/// `αλ(1 - e^{-λt})^{α-1} e^{-λt}`; at `t = 0` this is `+inf`, `λ` or `0`
/// for `α < 1`, `α = 1` and `α > 1` respectively.
pub fn ee_pdf(p: &EEParams, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return match p.exponent.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => p.rate,
            _ => 0.0,
        };
    }
    p.distribution().pdf(t)
}

/// Ordered, strictly positive, pairwise-distinct stage rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Domain("at least one rate is required".into()));
        }
        for &r in &rates {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Domain(format!("rates must be positive and finite, got {r}")));
            }
        }
        for i in 0..rates.len() {
            for j in (i + 1)..rates.len() {
                let gap = relative_gap(rates[i], rates[j]);
                if gap < DISTINCTNESS_TOL {
                    return Err(Error::CoefficientSingularity {
                        first: rates[i],
                        second: rates[j],
                        gap,
                    });
                }
            }
        }
        Ok(Self(rates))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest pairwise relative gap, or `inf` for a single rate.
    pub fn min_relative_gap(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.0.len() {
            for j in (i + 1)..self.0.len() {
                best = best.min(relative_gap(self.0[i], self.0[j]));
            }
        }
        best
    }
}

impl TryFrom<Vec<f64>> for RateVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RateVector> for Vec<f64> {
    fn from(r: RateVector) -> Self {
        r.0
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Signed partial-fraction weights `A_i = Π_{j≠i} α_j / (α_j − α_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypoCoefficients(Vec<f64>);

impl HypoCoefficients {
    pub fn from_rates(rates: &RateVector) -> Self {
        let r = rates.as_slice();
        let a = (0..r.len())
            .map(|i| {
                r.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &aj)| aj / (aj - r[i]))
                    .product()
            })
            .collect();
        Self(a)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Validating entry point for raw rates.
pub fn hypo_coefficients(rates: &[f64]) -> Result<HypoCoefficients> {
    Ok(HypoCoefficients::from_rates(&RateVector::new(rates.to_vec())?))
}

/// Sum of independent exponential stages with distinct rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypoexponential {
    rates: RateVector,
    coefficients: HypoCoefficients,
}

impl Hypoexponential {
    pub fn new(rates: RateVector) -> Self {
        let coefficients = HypoCoefficients::from_rates(&rates);
        Self { rates, coefficients }
    }

    pub fn from_rates(rates: &[f64]) -> Result<Self> {
        Ok(Self::new(RateVector::new(rates.to_vec())?))
    }

    pub fn rates(&self) -> &RateVector {
        &self.rates
    }

    pub fn coefficients(&self) -> &HypoCoefficients {
        &self.coefficients
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coefficients
            .0
            .iter()
            .copied()
            .zip(self.rates.0.iter().copied())
    }

    /// `Σ A_i e^{-α_i t}`, unclamped.
    pub fn survival_sum(&self, t: f64) -> f64 {
        self.terms().map(|(a, r)| a * (-r * t).exp()).sum()
    }

    /// `Σ A_i (1 - e^{-α_i t})`, unclamped.
    pub fn cdf_sum(&self, t: f64) -> f64 {
        self.terms().map(|(a, r)| a * -(-r * t).exp_m1()).sum()
    }

    /// CDF and survival at `t > 0` as a consistent pair, clamped to `[0, 1]`,
    /// plus whether cancellation pushed the raw sum beyond the slack.
    pub fn cdf_survival(&self, t: f64) -> (f64, f64, bool) {
        if t <= 0.0 {
            return (0.0, 1.0, false);
        }
        let s = self.survival_sum(t);
        let (raw_f, raw_s) = if s < 0.5 {
            (1.0 - s, s)
        } else {
            let f = self.cdf_sum(t);
            (f, 1.0 - f)
        };
        let ill = !(-CANCELLATION_SLACK..=1.0 + CANCELLATION_SLACK).contains(&raw_f);
        (raw_f.clamp(0.0, 1.0), raw_s.clamp(0.0, 1.0), ill)
    }

    /// Raw density sum `Σ A_i α_i e^{-α_i t}`; may be slightly negative under cancellation.
    pub fn pdf_sum(&self, t: f64) -> f64 {
        self.terms().map(|(a, r)| a * r * (-r * t).exp()).sum()
    }
}

impl Distribution for Hypoexponential {
    fn cdf(&self, t: f64) -> f64 {
        self.cdf_survival(t).0
    }

    fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.pdf_sum(t).max(0.0)
    }

    fn survival(&self, t: f64) -> f64 {
        self.cdf_survival(t).1
    }

    fn ln_cdf(&self, t: f64) -> f64 {
        let (f, s, _) = self.cdf_survival(t);
        if f <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ln_from_parts(f, s)
    }
}

pub fn hypo_cdf(rates: &RateVector, t: f64) -> f64 {
    Hypoexponential::new(rates.clone()).cdf(t)
}

pub fn hypo_pdf(rates: &RateVector, t: f64) -> f64 {
    Hypoexponential::new(rates.clone()).pdf(t)
}
