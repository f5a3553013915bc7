//! Maximum-likelihood estimation of `(α_1, …, α_n, k)`.
//!
//! For fixed rates the score in `k` is `N/k + Σ_j ln F_S(x_j)`, whose root
//! `k̂ = -N / Σ_j ln F_S(x_j)` is available in closed form. [`fit`] maximises
//! the profile likelihood `L*(α) = L(α, k̂(α))` over ordered rates.

mod fit;
pub mod optim;

use serde::{Deserialize, Serialize};

pub use fit::{fit, profile_gradient, rates_from_theta, theta_from_rates, FitOptions, FitResult, MIN_RELATIVE_GAP};

use crate::dist::{Distribution, Hypoexponential, RateVector};
use crate::ehypo::EHypoParams;
use crate::error::{Error, Result};
use crate::par::{chunked_fold, Execution};

/// Below this relative rate gap the rate score is reported as ill-conditioned.
pub const SCORE_GAP_TOL: f64 = 1e-6;

/// Positive, finite observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("no observations".into()));
        }
        if let Some((i, &x)) = values.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidSample(format!(
                "observation {} is {x}; values must be positive and finite",
                i + 1
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

/// Per-sample sums that the likelihood, `k̂` and the profile objective share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodSums {
    pub n: usize,
    pub sum_ln_pdf: f64,
    pub sum_ln_cdf: f64,
    /// Observations where the hypoexponential density or CDF summed to `<= 0`.
    pub nonpositive: usize,
}

impl LikelihoodSums {
    pub fn compute(hypo: &Hypoexponential, sample: &Sample, exec: Execution) -> Self {
        let (sum_ln_pdf, sum_ln_cdf, nonpositive) = chunked_fold(
            exec,
            sample.values(),
            (0.0, 0.0, 0usize),
            |&x| {
                let f = hypo.pdf_sum(x);
                let ln_cdf = hypo.ln_cdf(x);
                if f <= 0.0 || ln_cdf == f64::NEG_INFINITY {
                    (f64::NEG_INFINITY, ln_cdf, 1)
                } else {
                    (f.ln(), ln_cdf, 0)
                }
            },
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
        Self {
            n: sample.len(),
            sum_ln_pdf,
            sum_ln_cdf,
            nonpositive,
        }
    }

    pub fn loglik(&self, k: f64) -> f64 {
        if self.nonpositive > 0 {
            return f64::NEG_INFINITY;
        }
        let tail = if k == 1.0 { 0.0 } else { (k - 1.0) * self.sum_ln_cdf };
        self.n as f64 * k.ln() + self.sum_ln_pdf + tail
    }

    pub fn k_hat(&self) -> Result<f64> {
        if self.nonpositive > 0 || self.sum_ln_cdf.is_nan() || self.sum_ln_cdf >= 0.0 {
            return Err(Error::Conditioning(format!(
                "hypoexponential CDF is nonpositive at {} observation(s)",
                self.nonpositive
            )));
        }
        Ok(-(self.n as f64) / self.sum_ln_cdf)
    }

    /// `L(α, k̂(α)) = N ln k̂ + Σ ln f - N - Σ ln F`.
    pub fn profile_loglik(&self) -> f64 {
        match self.k_hat() {
            Ok(k) => self.loglik(k),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// `N ln k + Σ ln f_S(x_j) + (k-1) Σ ln F_S(x_j)`; `-inf` when cancellation
/// drives any density or CDF value to zero or below.
pub fn loglik(p: &EHypoParams, sample: &Sample) -> f64 {
    loglik_with(p, sample, Execution::default())
}

pub fn loglik_with(p: &EHypoParams, sample: &Sample, exec: Execution) -> f64 {
    let hypo = Hypoexponential::new(p.rates().clone());
    LikelihoodSums::compute(&hypo, sample, exec).loglik(p.k())
}

/// Closed-form maximiser of the likelihood in `k` for fixed rates.
pub fn k_hat(rates: &RateVector, sample: &Sample) -> Result<f64> {
    let hypo = Hypoexponential::new(rates.clone());
    LikelihoodSums::compute(&hypo, sample, Execution::default()).k_hat()
}

/// `∂ loglik / ∂k = N/k + Σ ln F_S(x_j)`.
pub fn score_k(p: &EHypoParams, sample: &Sample) -> f64 {
    let hypo = Hypoexponential::new(p.rates().clone());
    let sums = LikelihoodSums::compute(&hypo, sample, Execution::default());
    sums.n as f64 / p.k() + sums.sum_ln_cdf
}

/// `∂A_i/∂α_q` for every `i`.
///
/// `∂A_q/∂α_q = A_q Σ_{v≠q} 1/(α_v − α_q)`; for `i ≠ q` only the factor
/// `α_q/(α_q − α_i)` depends on `α_q`, giving `-A_i α_i / (α_q (α_q − α_i))`.
pub fn coefficient_derivatives(rates: &[f64], a: &[f64], q: usize) -> Vec<f64> {
    let aq = rates[q];
    (0..rates.len())
        .map(|i| {
            if i == q {
                let s: f64 = rates
                    .iter()
                    .enumerate()
                    .filter(|&(v, _)| v != q)
                    .map(|(_, &av)| 1.0 / (av - aq))
                    .sum();
                a[q] * s
            } else {
                -a[i] * rates[i] / (aq * (aq - rates[i]))
            }
        })
        .collect()
}

/// `∂ loglik / ∂α_q`, assembled from the coefficient derivatives:
/// `Σ_j [∂f(x_j)/f(x_j) + (k−1) ∂F(x_j)/F(x_j)]` with
/// `∂f = Σ_i ∂A_i α_i e^{-α_i x} + A_q (1 − α_q x) e^{-α_q x}` and
/// `∂F = Σ_i ∂A_i (1 − e^{-α_i x}) + A_q x e^{-α_q x}`.
pub fn score_alpha(p: &EHypoParams, sample: &Sample, q: usize) -> Result<f64> {
    let n = p.stages();
    if q >= n {
        return Err(Error::Domain(format!("stage index {q} out of range for {n} stages")));
    }
    Ok(rate_scores(p, sample, Execution::default())?[q])
}

/// [`score_alpha`] for every stage in one pass over the sample.
pub fn rate_scores(p: &EHypoParams, sample: &Sample, exec: Execution) -> Result<Vec<f64>> {
    if p.rates().min_relative_gap() < SCORE_GAP_TOL {
        return Err(Error::Conditioning(format!(
            "rates are nearly coalescent (relative gap {:e})",
            p.rates().min_relative_gap()
        )));
    }
    let hypo = Hypoexponential::new(p.rates().clone());
    let rates = p.rates().as_slice();
    let a = hypo.coefficients().as_slice();
    let n = rates.len();
    let da: Vec<Vec<f64>> = (0..n).map(|q| coefficient_derivatives(rates, a, q)).collect();
    let k = p.k();
    let totals = chunked_fold(
        exec,
        sample.values(),
        vec![0.0; n],
        |&x| {
            let decay: Vec<f64> = rates.iter().map(|&r| (-r * x).exp()).collect();
            let one_minus: Vec<f64> = rates.iter().map(|&r| -(-r * x).exp_m1()).collect();
            let f = hypo.pdf_sum(x);
            let (cdf, _, _) = hypo.cdf_survival(x);
            (0..n)
                .map(|q| {
                    let aq = rates[q];
                    let mut df = a[q] * (1.0 - aq * x) * decay[q];
                    let mut dcdf = a[q] * x * decay[q];
                    for i in 0..n {
                        df += da[q][i] * rates[i] * decay[i];
                        dcdf += da[q][i] * one_minus[i];
                    }
                    let tail = if k == 1.0 { 0.0 } else { (k - 1.0) * dcdf / cdf };
                    df / f + tail
                })
                .collect()
        },
        |mut acc, v| {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
            acc
        },
    );
    Ok(totals)
}
