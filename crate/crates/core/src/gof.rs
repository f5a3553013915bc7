//! Model-comparison statistics: `-2 ln L`, AIC, AICc, BIC and the
//! Anderson–Darling / Cramér–von Mises EDF statistics.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::estimate::Sample;

/// CDF values are clamped into `[EDF_CLAMP, 1 - EDF_CLAMP]` before taking logs.
pub const EDF_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
}

/// `AIC = -2 ln L + 2c`, `AICc = AIC + 2c(c+1)/(v-c-1)`, `BIC = -2 ln L + c ln v`.
pub fn information_criteria(loglik: f64, c: usize, v: usize) -> Result<InformationCriteria> {
    if v <= c + 1 {
        return Err(Error::AiccUndefined { c, v });
    }
    let neg2 = -2.0 * loglik;
    let cf = c as f64;
    let aic = neg2 + 2.0 * cf;
    Ok(InformationCriteria {
        aic,
        aicc: aic + 2.0 * cf * (cf + 1.0) / (v as f64 - cf - 1.0),
        bic: neg2 + cf * (v as f64).ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStatistics {
    pub a_star: f64,
    pub w_star: f64,
    /// Some probability-integral-transform value hit the clamp.
    pub tail_degenerate: bool,
}

/// Unmodified single-sample statistics on `u_(i) = F(x_(i))`:
///
/// `W* = Σ (u_(i) − (2i−1)/(2N))² + 1/(12N)`,
/// `A* = −N − (1/N) Σ (2i−1)[ln u_(i) + ln(1 − u_(N+1−i))]`.
pub fn edf_statistics<F: Fn(f64) -> f64>(cdf: F, sample: &Sample) -> EdfStatistics {
    let xs = sample.sorted();
    let n = xs.len();
    let nf = n as f64;
    let mut tail_degenerate = false;
    let u: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let raw = cdf(x);
            let c = raw.clamp(EDF_CLAMP, 1.0 - EDF_CLAMP);
            if c != raw || raw.is_nan() {
                tail_degenerate = true;
            }
            if raw.is_nan() {
                0.5
            } else {
                c
            }
        })
        .collect();
    let mut w = 1.0 / (12.0 * nf);
    let mut a = 0.0;
    for i in 0..n {
        let weight = (2 * i + 1) as f64;
        w += (u[i] - weight / (2.0 * nf)).powi(2);
        a += weight * (u[i].ln() + (-u[n - 1 - i]).ln_1p());
    }
    EdfStatistics {
        a_star: -nf - a / nf,
        w_star: w,
        tail_degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub neg2loglik: f64,
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    pub a_star: f64,
    pub w_star: f64,
    /// Number of estimated parameters.
    pub c: usize,
    /// Sample size.
    pub v: usize,
    pub tail_degenerate: bool,
}

impl GofReport {
    pub fn new<D: Distribution + ?Sized>(dist: &D, loglik: f64, c: usize, sample: &Sample) -> Result<Self> {
        let ic = information_criteria(loglik, c, sample.len())?;
        let edf = edf_statistics(|t| dist.cdf(t), sample);
        Ok(Self {
            neg2loglik: -2.0 * loglik,
            aic: ic.aic,
            aicc: ic.aicc,
            bic: ic.bic,
            a_star: edf.a_star,
            w_star: edf.w_star,
            c,
            v: sample.len(),
            tail_degenerate: edf.tail_degenerate,
        })
    }
}

/// A fitted model entering a comparison.
pub struct Candidate<'a> {
    pub name: String,
    pub dist: &'a dyn Distribution,
    pub loglik: f64,
    pub parameters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub report: GofReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub criterion: String,
    /// Model names, best first.
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Sorted by AIC, then name.
    pub rows: Vec<ComparisonRow>,
    pub rankings: Vec<Ranking>,
}

pub const CRITERIA: [&str; 6] = ["neg2loglik", "aic", "aicc", "bic", "a_star", "w_star"];

fn criterion_value(r: &GofReport, criterion: &str) -> f64 {
    match criterion {
        "neg2loglik" => r.neg2loglik,
        "aic" => r.aic,
        "aicc" => r.aicc,
        "bic" => r.bic,
        "a_star" => r.a_star,
        "w_star" => r.w_star,
        _ => unreachable!("unknown criterion {criterion}"),
    }
}

pub fn rank(rows: &[ComparisonRow]) -> (Vec<ComparisonRow>, Vec<Ranking>) {
    let by = |criterion: &str| {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|a, b| {
            criterion_value(&a.report, criterion)
                .total_cmp(&criterion_value(&b.report, criterion))
                .then_with(|| a.name.cmp(&b.name))
        });
        sorted
    };
    let rankings = CRITERIA
        .iter()
        .map(|&c| Ranking {
            criterion: c.to_string(),
            order: by(c).into_iter().map(|r| r.name).collect(),
        })
        .collect();
    (by("aic"), rankings)
}

pub fn compare(models: &[Candidate<'_>], sample: &Sample) -> Result<Comparison> {
    if models.len() < 2 {
        return Err(Error::Domain(format!("comparison needs at least 2 models, got {}", models.len())));
    }
    let rows = models
        .iter()
        .map(|m| {
            Ok(ComparisonRow {
                name: m.name.clone(),
                report: GofReport::new(m.dist, m.loglik, m.parameters, sample)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, rankings) = rank(&rows);
    Ok(Comparison { rows, rankings })
}
