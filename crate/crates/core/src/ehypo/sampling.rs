//! Random variates.
//!
//! Integer `k` uses the construction directly: the maximum of `k` independent
//! hypoexponential draws, each a sum of exponential stages. Other `k` go
//! through inverse transform on the power-form CDF.
//!
//! Bulk sampling splits the request into fixed blocks, each driven by its own
//! ChaCha stream of the root seed, so output depends only on `(seed, count)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp};

use super::{EHypo, EHypoParams};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

const BLOCK: usize = 4096;
const ROOT_ITERATIONS: usize = 200;
const ROOT_TOL: f64 = 1e-12;

/// Owns its generator; use one instance per thread.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: EHypo,
    stages: Vec<Exp<f64>>,
    integer_k: Option<u32>,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(params: &EHypoParams, seed: u64) -> Self {
        Self::with_stream(params, seed, 0)
    }

    pub fn with_stream(params: &EHypoParams, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let stages = params
            .rates()
            .as_slice()
            .iter()
            .map(|&r| Exp::new(r).expect("rates are validated positive"))
            .collect();
        Self {
            dist: params.distribution(),
            stages,
            integer_k: params.integer_k(),
            rng,
        }
    }

    pub fn draw(&mut self) -> Result<f64> {
        match self.integer_k {
            Some(k) => Ok((0..k).map(|_| self.hypo_draw()).fold(0.0, f64::max)),
            None => {
                let u: f64 = self.rng.random();
                inverse_cdf(&self.dist, u, 1.0 / self.dist.hypo().rates().min())
            }
        }
    }

    fn hypo_draw(&mut self) -> f64 {
        let rng = &mut self.rng;
        self.stages.iter().map(|e| e.sample(rng)).sum()
    }
}

/// Solves `dist.cdf(t) = u` for `u ∈ [0, 1)` by bracketed secant steps with a
/// bisection safeguard. The bracket starts at `[0, scale]` and doubles its
/// upper end until it encloses `u`.
pub fn inverse_cdf<D: Distribution>(dist: &D, u: f64, scale: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("probability must lie in [0, 1), got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut f_lo = -u;
    let mut hi = scale;
    let mut f_hi = dist.cdf(hi) - u;
    let mut doublings = 0;
    while f_hi <= 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = dist.cdf(hi) - u;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(Error::Numeric(format!("could not bracket quantile for u={u}")));
        }
    }
    let mut last_width = f64::INFINITY;
    for _ in 0..ROOT_ITERATIONS {
        let width = hi - lo;
        if width <= ROOT_TOL {
            return Ok(0.5 * (lo + hi));
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let use_secant = secant.is_finite() && secant > lo && secant < hi && width < 0.5 * last_width;
        let mid = if use_secant { secant } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            // bracket is at floating-point resolution
            return Ok(0.5 * (lo + hi));
        }
        last_width = width;
        let f_mid = dist.cdf(mid) - u;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Err(Error::Numeric(format!(
        "quantile root-finding did not converge in {ROOT_ITERATIONS} iterations for u={u}"
    )))
}

pub fn ehypo_sample(params: &EHypoParams, count: usize, seed: u64) -> Result<Vec<f64>> {
    ehypo_sample_with(params, count, seed, Execution::default())
}

pub fn ehypo_sample_with(params: &EHypoParams, count: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let blocks = count.div_ceil(BLOCK);
    let chunks = map_indexed(exec, blocks, |b| {
        let mut sampler = Sampler::with_stream(params, seed, b as u64);
        let len = BLOCK.min(count - b * BLOCK);
        (0..len).map(|_| sampler.draw()).collect::<Result<Vec<f64>>>()
    });
    let mut out = Vec::with_capacity(count);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}
