use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{bfgs, fd_gradient, nelder_mead, Minimum, Tolerances};
use super::{rate_scores, LikelihoodSums, Sample};
use crate::dist::{Hypoexponential, RateVector};
use crate::ehypo::EHypoParams;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Floor on consecutive fitted rates: `α_i >= α_{i-1} (1 + MIN_RELATIVE_GAP)`.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// Fitted relative gaps below this emit a coalescence warning.
const COALESCENCE_WARNING_GAP: f64 = 1e-4;

/// A fitted rate this many times `n / mean(x)` means a stage is vanishing.
const DIVERGENCE_WARNING_RATIO: f64 = 100.0;

/// Gradient-norm threshold per observation; the log-likelihood is a sum over the sample.
const GRADIENT_TOL: f64 = 1e-7;
const SIMPLEX_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub starts: usize,
    /// Pin `k` instead of profiling it out; `Some(1.0)` fits a plain hypoexponential.
    pub fix_k: Option<f64>,
    /// Use these rates (in any order) as the only start.
    pub initial_rates: Option<Vec<f64>>,
    pub execution: Execution,
}

impl FitOptions {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            max_iterations: 2000,
            tolerance: 1e-10,
            seed: 42,
            starts: 8,
            fix_k: None,
            initial_rates: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: EHypoParams,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
    /// Log-likelihood after each accepted optimiser step of the winning start.
    pub trace: Vec<f64>,
    /// Log-likelihood at each start point, in start order.
    pub start_logliks: Vec<f64>,
}

/// `θ_1 = ln α_1`, `θ_i = ln(α_i − α_{i−1}(1 + MIN_RELATIVE_GAP))`.
pub fn rates_from_theta(theta: &[f64]) -> Vec<f64> {
    let mut rates = Vec::with_capacity(theta.len());
    let mut prev = 0.0;
    for (i, &t) in theta.iter().enumerate() {
        let r = if i == 0 { t.exp() } else { prev * (1.0 + MIN_RELATIVE_GAP) + t.exp() };
        rates.push(r);
        prev = r;
    }
    rates
}

/// Inverse of [`rates_from_theta`] after sorting; gaps below the floor are
/// lifted just above it.
pub fn theta_from_rates(rates: &[f64]) -> Vec<f64> {
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut theta = Vec::with_capacity(sorted.len());
    for (i, &r) in sorted.iter().enumerate() {
        if i == 0 {
            theta.push(r.ln());
        } else {
            let base = sorted[i - 1] * (1.0 + MIN_RELATIVE_GAP);
            let gap = (r - base).max(sorted[i - 1] * 1e-3);
            theta.push(gap.ln());
        }
    }
    theta
}

/// `∂/∂θ_j = Σ_{i≥j} ∂/∂α_i (1+δ)^{i−j} e^{θ_j}`, where `e^{θ_1} = α_1`.
fn chain_to_theta(theta: &[f64], rates: &[f64], scores: &[f64]) -> Vec<f64> {
    let n = theta.len();
    (0..n)
        .map(|j| {
            let scale = if j == 0 { rates[0] } else { theta[j].exp() };
            let mut acc = 0.0;
            let mut factor = 1.0;
            for score in &scores[j..] {
                acc += score * factor;
                factor *= 1.0 + MIN_RELATIVE_GAP;
            }
            acc * scale
        })
        .collect()
}

/// Gradient of the (profile, or fixed-`k`) log-likelihood in `θ` coordinates.
///
/// With `k` profiled out, `∂L*/∂α = ∂L/∂α` at `k̂` because `∂L/∂k` vanishes there.
pub fn profile_gradient(theta: &[f64], sample: &Sample, fix_k: Option<f64>) -> Option<Vec<f64>> {
    let objective = Objective { sample, fix_k, exec: Execution::default() };
    objective.negative_gradient(theta).map(|g| g.into_iter().map(|v| -v).collect())
}

struct Objective<'a> {
    sample: &'a Sample,
    fix_k: Option<f64>,
    exec: Execution,
}

impl Objective<'_> {
    fn loglik_at_rates(&self, rates: &[f64]) -> f64 {
        let Ok(rv) = RateVector::new(rates.to_vec()) else {
            return f64::NEG_INFINITY;
        };
        let sums = LikelihoodSums::compute(&Hypoexponential::new(rv), self.sample, self.exec);
        match self.fix_k {
            Some(k) => sums.loglik(k),
            None => sums.profile_loglik(),
        }
    }

    /// Gradient of [`Self::negative`] in `θ`; `None` where the score is undefined.
    fn negative_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let rates = rates_from_theta(theta);
        let rv = RateVector::new(rates.clone()).ok()?;
        let k = match self.fix_k {
            Some(k) => k,
            None => LikelihoodSums::compute(&Hypoexponential::new(rv.clone()), self.sample, self.exec)
                .k_hat()
                .ok()?,
        };
        let p = EHypoParams::new(rv, k).ok()?;
        let scores = rate_scores(&p, self.sample, self.exec).ok()?;
        let g = chain_to_theta(theta, &rates, &scores);
        g.iter().all(|v| v.is_finite()).then(|| g.into_iter().map(|v| -v).collect())
    }

    fn negative(&self, theta: &[f64]) -> f64 {
        let rates = rates_from_theta(theta);
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return f64::INFINITY;
        }
        let ll = self.loglik_at_rates(&rates);
        if ll.is_nan() {
            f64::INFINITY
        } else {
            -ll
        }
    }
}

/// Deterministic start rates: levels on a geometric grid over `[0.25, 4]`
/// times `n / mean(x)`, spreads log-uniform in `[1.5, 20]` from a seeded stream.
fn start_points(sample: &Sample, opts: &FitOptions) -> Vec<Vec<f64>> {
    if let Some(r) = &opts.initial_rates {
        let mut r = r.clone();
        r.sort_by(f64::total_cmp);
        return vec![r];
    }
    let n = opts.n;
    let base = n as f64 / sample.mean();
    (0..opts.starts)
        .map(|s| {
            let level = if opts.starts == 1 {
                1.0
            } else {
                0.25 * 16f64.powf(s as f64 / (opts.starts - 1) as f64)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s as u64);
            let spread = rng.random_range(1.5f64.ln()..20f64.ln()).exp();
            (0..n)
                .map(|i| {
                    let pos = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 - 0.5 };
                    base * level * spread.powf(pos)
                })
                .collect()
        })
        .collect()
}

fn validate(sample: &Sample, opts: &FitOptions) -> Result<()> {
    if opts.n == 0 {
        return Err(Error::Domain("stage count n must be at least 1".into()));
    }
    if sample.len() < opts.n + 2 {
        return Err(Error::InvalidSample(format!(
            "{} observations are too few for n={} (need at least {})",
            sample.len(),
            opts.n,
            opts.n + 2
        )));
    }
    if opts.starts == 0 && opts.initial_rates.is_none() {
        return Err(Error::Domain("at least one start is required".into()));
    }
    if let Some(k) = opts.fix_k {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!("fixed k must be positive and finite, got {k}")));
        }
    }
    if let Some(r) = &opts.initial_rates {
        if r.len() != opts.n {
            return Err(Error::Domain(format!("{} initial rates for n={}", r.len(), opts.n)));
        }
        RateVector::new(r.clone())?;
    }
    Ok(())
}

/// Maximises the (profile) likelihood over ordered rates from several starts.
pub fn fit(sample: &Sample, opts: &FitOptions) -> Result<FitResult> {
    validate(sample, opts)?;
    let objective = Objective {
        sample,
        fix_k: opts.fix_k,
        exec: opts.execution,
    };
    let tol = Tolerances {
        max_iterations: opts.max_iterations,
        f_tol: opts.tolerance,
        g_tol: GRADIENT_TOL * sample.len() as f64,
    };
    let starts = start_points(sample, opts);
    let start_logliks: Vec<f64> = starts.iter().map(|r| objective.loglik_at_rates(r)).collect();

    let runs: Vec<Option<(Minimum, usize)>> = map_indexed(opts.execution, starts.len(), |s| {
        let f = |theta: &[f64]| objective.negative(theta);
        let grad = |theta: &[f64]| objective.negative_gradient(theta).unwrap_or_else(|| fd_gradient(&f, theta));
        let theta0 = theta_from_rates(&starts[s]);
        let simplex = nelder_mead(&f, &theta0, SIMPLEX_STEP, tol);
        if !simplex.value.is_finite() {
            return None;
        }
        let polished = bfgs(&f, &grad, &simplex.x, tol);
        let iterations = simplex.iterations + polished.iterations;
        let mut trace = simplex.trace;
        trace.extend(polished.trace.into_iter().skip(1));
        Some((Minimum { trace, iterations, ..polished }, s))
    });

    let failed = runs.iter().filter(|r| r.is_none()).count();
    let best = runs
        .into_iter()
        .flatten()
        .min_by(|(a, sa), (b, sb)| {
            a.value
                .total_cmp(&b.value)
                .then(a.gradient_norm.total_cmp(&b.gradient_norm))
                .then(sa.cmp(sb))
        })
        .ok_or_else(|| {
            Error::FitFailed(format!(
                "none of {} starts produced a finite likelihood (start log-likelihoods: {:?})",
                starts.len(),
                start_logliks
            ))
        })?;
    let (min, _) = best;

    let rates = rates_from_theta(&min.x);
    let rv = RateVector::new(rates.clone())?;
    let sums = LikelihoodSums::compute(&Hypoexponential::new(rv.clone()), sample, opts.execution);
    let k = match opts.fix_k {
        Some(k) => k,
        None => sums.k_hat()?,
    };
    let params = EHypoParams::new(rv.clone(), k)?;

    let mut warnings = Vec::new();
    if !min.converged {
        warnings.push(format!(
            "optimizer did not converge in {} iterations (gradient norm {:e})",
            min.iterations, min.gradient_norm
        ));
    }
    if rates.len() > 1 && rv.min_relative_gap() < COALESCENCE_WARNING_GAP {
        warnings.push("rates nearly coalescent; consider smaller n".into());
    }
    let scale = opts.n as f64 / sample.mean();
    if rates.len() > 1 && rates[rates.len() - 1] > DIVERGENCE_WARNING_RATIO * scale {
        warnings.push(format!(
            "largest rate {:e} is over {DIVERGENCE_WARNING_RATIO}x the data scale; the likelihood is maximised towards n={}",
            rates[rates.len() - 1],
            opts.n - 1
        ));
    }
    if failed > 0 {
        warnings.push(format!("{failed} of {} starts failed to produce a finite likelihood", starts.len()));
    }

    Ok(FitResult {
        params,
        loglik: sums.loglik(k),
        converged: min.converged,
        iterations: min.iterations,
        gradient_norm: min.gradient_norm,
        warnings,
        trace: min.trace.iter().map(|v| -v).collect(),
        start_logliks,
    })
}
