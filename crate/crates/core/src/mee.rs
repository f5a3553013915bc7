//! Maximum of independent exponentiated-exponential variables.

use serde::{Deserialize, Serialize};

use crate::dist::{ln_one_minus_exp_neg, Distribution, RateVector};
use crate::error::{Error, Result};

/// Largest per-factor exponent accepted by the binomial expansion.
pub const EXPANSION_EXPONENT_CAP: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeeParams {
    lambdas: RateVector,
    exponents: Vec<f64>,
}

impl MeeParams {
    /// Real exponents; zero entries are allowed and contribute a factor of one.
    pub fn new(lambdas: RateVector, exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() != lambdas.len() {
            return Err(Error::Domain(format!(
                "{} exponents for {} rates",
                exponents.len(),
                lambdas.len()
            )));
        }
        if exponents.iter().any(|&a| !(a.is_finite() && a >= 0.0)) {
            return Err(Error::Domain("exponents must be finite and nonnegative".into()));
        }
        if !exponents.iter().any(|&a| a > 0.0) {
            return Err(Error::Domain("at least one exponent must be positive".into()));
        }
        Ok(Self { lambdas, exponents })
    }

    pub fn integer(lambdas: RateVector, exponents: &[u32]) -> Result<Self> {
        Self::new(lambdas, exponents.iter().map(|&g| g as f64).collect())
    }

    pub fn lambdas(&self) -> &RateVector {
        &self.lambdas
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    fn active(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambdas
            .as_slice()
            .iter()
            .copied()
            .zip(self.exponents.iter().copied())
            .filter(|&(_, a)| a > 0.0)
    }

    fn total_exponent(&self) -> f64 {
        self.exponents.iter().sum()
    }

    fn integer_exponents(&self) -> Result<Vec<u32>> {
        self.exponents
            .iter()
            .map(|&a| {
                if a.fract() != 0.0 {
                    Err(Error::NonIntegerExponent(a))
                } else if a > EXPANSION_EXPONENT_CAP as f64 {
                    Err(Error::ExpansionOverflow {
                        exponent: a.min(u32::MAX as f64) as u32,
                        cap: EXPANSION_EXPONENT_CAP,
                    })
                } else {
                    Ok(a as u32)
                }
            })
            .collect()
    }
}

impl Distribution for MeeParams {
    fn cdf(&self, t: f64) -> f64 {
        mee_cdf(self, t)
    }
    fn pdf(&self, t: f64) -> f64 {
        mee_pdf(self, t)
    }
    fn survival(&self, t: f64) -> f64 {
        mee_survival(self, t)
    }
    fn ln_cdf(&self, t: f64) -> f64 {
        mee_ln_cdf(self, t)
    }
    fn hazard(&self, t: f64) -> f64 {
        mee_hazard(self, t)
    }
}

fn mee_ln_cdf(p: &MeeParams, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    p.active().map(|(l, a)| a * ln_one_minus_exp_neg(l * t)).sum()
}

/// `Π_j (1 - e^{-λ_j t})^{α_j}`, evaluated in log space.
pub fn mee_cdf(p: &MeeParams, t: f64) -> f64 {
    let ln_f = mee_ln_cdf(p, t);
    if ln_f == f64::NEG_INFINITY {
        0.0
    } else {
        ln_f.exp()
    }
}

/// Product of the factor CDFs times `Σ_j α_j λ_j e^{-λ_j t} / (1 - e^{-λ_j t})`.
///
/// At `t = 0` the density behaves like `t^{s-1}` with `s = Σ α_j`, so it is
/// `+inf` for `s < 1`, `Π λ_j^{α_j}` for `s = 1`, and `0` otherwise.
pub fn mee_pdf(p: &MeeParams, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        let s = p.total_exponent();
        return if s < 1.0 {
            f64::INFINITY
        } else if s == 1.0 {
            p.active().map(|(l, a)| l.powf(a)).product()
        } else {
            0.0
        };
    }
    let log_derivative: f64 = p.active().map(|(l, a)| a * l / (l * t).exp_m1()).sum();
    mee_cdf(p, t) * log_derivative
}

/// `Π_j Σ_{i=0}^{g_j} C(g_j, i)(-1)^{g_j - i} e^{-λ_j (g_j - i) t}` for integer exponents.
pub fn mee_cdf_expanded(p: &MeeParams, t: f64) -> Result<f64> {
    let g = p.integer_exponents()?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let mut product = 1.0;
    for (&l, &gj) in p.lambdas.as_slice().iter().zip(&g) {
        let mut inner = 0.0;
        let mut binom = 1.0;
        for i in 0..=gj {
            let sign = if (gj - i) % 2 == 0 { 1.0 } else { -1.0 };
            inner += binom * sign * (-l * (gj - i) as f64 * t).exp();
            binom = binom * (gj - i) as f64 / (i + 1) as f64;
        }
        product *= inner;
    }
    Ok(product)
}

/// `1 - F(t)` via `-expm1(ln F)`.
pub fn mee_survival(p: &MeeParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    -mee_ln_cdf(p, t).exp_m1()
}

/// `f / R`; `+inf` once the survival underflows (see [`mee_tail_saturated`]).
pub fn mee_hazard(p: &MeeParams, t: f64) -> f64 {
    let s = mee_survival(p, t);
    if s <= 0.0 {
        return f64::INFINITY;
    }
    mee_pdf(p, t) / s
}

pub fn mee_tail_saturated(p: &MeeParams, t: f64) -> bool {
    mee_survival(p, t) <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ee_cdf, ee_pdf, EEParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rates(v: &[f64]) -> RateVector {
        RateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_factor_is_ee() {
        let p = MeeParams::new(rates(&[1.3]), vec![2.5]).unwrap();
        let ee = EEParams::new(1.3, 2.5).unwrap();
        for t in [0.01, 0.4, 2.0, 9.0] {
            assert_relative_eq!(mee_cdf(&p, t), ee_cdf(&ee, t), max_relative = 1e-13);
            assert_relative_eq!(mee_pdf(&p, t), ee_pdf(&ee, t), max_relative = 1e-12);
        }
        let e = MeeParams::integer(rates(&[0.8]), &[1]).unwrap();
        assert_relative_eq!(mee_pdf(&e, 1.1), 0.8 * (-0.88f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn zero_exponents_drop_out() {
        let p = MeeParams::integer(rates(&[5.0, 4.0, 3.0]), &[3, 0, 0]).unwrap();
        let ee = EEParams::new(5.0, 3.0).unwrap();
        for t in [0.1, 0.5, 1.5] {
            assert_relative_eq!(mee_cdf(&p, t), (1.0 - (-5.0 * t).exp()).powi(3), max_relative = 1e-13);
            assert_relative_eq!(mee_pdf(&p, t), ee_pdf(&ee, t), max_relative = 1e-12);
        }
    }

    #[test]
    fn product_example() {
        let p = MeeParams::integer(rates(&[5.0, 4.0, 3.0]), &[1, 1, 1]).unwrap();
        let expected: f64 = [5.0f64, 4.0, 3.0].iter().map(|l| 1.0 - (-l).exp()).product();
        assert_relative_eq!(mee_cdf(&p, 1.0), expected, max_relative = 1e-14);
        for t in [0.0, 0.3, 1.0, 4.0] {
            assert!((mee_survival(&p, t) + mee_cdf(&p, t) - 1.0).abs() <= 1e-12);
        }
        assert_eq!(mee_survival(&p, 0.0), 1.0);
    }

    #[test]
    fn pdf_matches_finite_difference() {
        let p = MeeParams::new(rates(&[5.0, 4.0, 3.0]), vec![1.5, 0.7, 2.0]).unwrap();
        let h = 1e-5;
        let fd = (mee_cdf(&p, 0.8 + h) - mee_cdf(&p, 0.8 - h)) / (2.0 * h);
        assert!((fd - mee_pdf(&p, 0.8)).abs() < 1e-6);
    }

    #[test]
    fn expansion_examples() {
        let p = MeeParams::integer(rates(&[5.0, 4.0, 3.0]), &[2, 1, 0]).unwrap();
        assert_relative_eq!(mee_cdf_expanded(&p, 0.5).unwrap(), mee_cdf(&p, 0.5), max_relative = 1e-10);
        assert_eq!(mee_cdf_expanded(&p, 0.0).unwrap(), 0.0);
        let ones = MeeParams::integer(rates(&[2.0, 7.0]), &[1, 1]).unwrap();
        let t: f64 = 0.3;
        let direct = (1.0 - (-2.0 * t).exp()) * (1.0 - (-7.0 * t).exp());
        assert_relative_eq!(mee_cdf_expanded(&ones, t).unwrap(), direct, max_relative = 1e-14);
    }

    #[test]
    fn expansion_rejects_large_or_fractional() {
        let big = MeeParams::integer(rates(&[1.0, 2.0]), &[61, 1]).unwrap();
        assert!(matches!(mee_cdf_expanded(&big, 1.0), Err(Error::ExpansionOverflow { .. })));
        let frac = MeeParams::new(rates(&[1.0]), vec![1.5]).unwrap();
        assert!(matches!(mee_cdf_expanded(&frac, 1.0), Err(Error::NonIntegerExponent(_))));
    }

    #[test]
    fn hazard_identity_and_saturation() {
        let p = MeeParams::integer(rates(&[5.0, 4.0, 3.0]), &[1, 1, 1]).unwrap();
        for i in 1..50 {
            let t = i as f64 * 0.1;
            let h = mee_hazard(&p, t);
            assert_relative_eq!(h, mee_pdf(&p, t) / mee_survival(&p, t), max_relative = 1e-12);
        }
        assert!(mee_tail_saturated(&p, 1e4));
        assert_eq!(mee_hazard(&p, 1e4), f64::INFINITY);
    }

    #[test]
    fn origin_behaviour() {
        let p = MeeParams::new(rates(&[2.0, 3.0]), vec![0.3, 0.4]).unwrap();
        assert_eq!(mee_pdf(&p, 0.0), f64::INFINITY);
        let q = MeeParams::integer(rates(&[2.0, 3.0]), &[1, 0]).unwrap();
        assert_eq!(mee_pdf(&q, 0.0), 2.0);
        assert!(MeeParams::integer(rates(&[2.0]), &[0]).is_err());
    }

    #[test]
    fn monte_carlo_max_of_maxima() {
        // g_j-fold maxima of Exp(λ_j), then the max over j.
        let lambdas = [1.5, 0.6, 3.0];
        let g = [2u32, 1, 3];
        let p = MeeParams::integer(rates(&lambdas), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| {
                let mut m: f64 = 0.0;
                for (l, &gj) in lambdas.iter().zip(&g) {
                    for _ in 0..gj {
                        let u: f64 = rng.random();
                        m = m.max(-(1.0 - u).ln() / l);
                    }
                }
                m
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = mee_cdf(&p, x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
    }

    proptest! {
        #[test]
        fn expansion_equals_product(
            lambdas in prop::collection::vec(0.1f64..6.0, 1..=4),
            g in prop::collection::vec(0u32..=6, 4),
            ts in prop::collection::vec(0.0f64..5.0, 20),
        ) {
            let rv = match RateVector::new(lambdas) { Ok(r) => r, Err(_) => return Ok(()) };
            let g = &g[..rv.len()];
            prop_assume!(g.iter().any(|&x| x > 0));
            let p = MeeParams::integer(rv, g).unwrap();
            let mut prev = 0.0;
            let mut sorted = ts.clone();
            sorted.sort_by(f64::total_cmp);
            for t in sorted {
                let a = mee_cdf_expanded(&p, t).unwrap();
                let b = mee_cdf(&p, t);
                prop_assert!((a - b).abs() <= 1e-9, "t={t} expanded={a} product={b}");
                prop_assert!(b + 1e-15 >= prev);
                prev = b;
            }
            prop_assert!((mee_cdf(&p, 1e3) - 1.0).abs() < 1e-12);
        }
    }
}
