//! Integer-`k` expansion `F_Y = Σ_{g ∈ E_k} B_g F_{N_g}` with
//! `N_g ~ MEE(α, g)` and `B_g = multinomial(k; g) Π_j A_j^{g_j}`.
//!
//! The `B_g` alternate in sign and grow like `(max |A_j|)^k`, so this form is
//! an equality check on the power form, not a production evaluator.

use serde::{Deserialize, Serialize};

use super::EHypoParams;
use crate::dist::{Distribution, HypoCoefficients};
use crate::error::{Error, Result};
use crate::mee::{mee_cdf, mee_pdf, mee_survival, MeeParams};

/// Upper bound on `|E_k| = C(k+n-1, n-1)`.
pub const ENUMERATION_BOUND: u64 = 1_000_000;

/// A composition of `k` into `n` nonnegative parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `k! / Π g_j!`, accumulated as a product of binomials.
    pub fn multinomial(&self) -> f64 {
        let mut remaining = self.total();
        let mut coeff = 1.0;
        for &g in &self.0 {
            coeff *= binomial(remaining, g);
            remaining -= g;
        }
        coeff
    }
}

fn binomial(n: u32, r: u32) -> f64 {
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ek_size(n: usize, k: u32) -> f64 {
    // C(k + n - 1, n - 1) in floating point; only compared against the bound.
    let top = k as u64 + n as u64 - 1;
    let r = (n as u64 - 1).min(k as u64);
    (0..r).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64)
}

/// All compositions of `k` into `n` parts, in lexicographically decreasing order.
pub fn enumerate_ek(n: usize, k: u32) -> Result<Vec<MultiIndex>> {
    if n == 0 || k == 0 {
        return Err(Error::Domain(format!("enumerate_ek needs n >= 1 and k >= 1, got n={n}, k={k}")));
    }
    let size = ek_size(n, k);
    if size > ENUMERATION_BOUND as f64 {
        return Err(Error::CombinatorialExplosion {
            n,
            k,
            size,
            bound: ENUMERATION_BOUND,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; n];
    fill(&mut current, 0, k, &mut out);
    Ok(out)
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for g in (0..=remaining).rev() {
        current[pos] = g;
        fill(current, pos + 1, remaining - g, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub index: MultiIndex,
    pub coefficient: f64,
    pub component: MeeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EHypoExpansion {
    terms: Vec<ExpansionTerm>,
}

impl EHypoExpansion {
    pub fn terms(&self) -> &[ExpansionTerm] {
        &self.terms
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    fn weighted(&self, f: impl Fn(&MeeParams) -> f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient * f(&t.component)).sum()
    }
}

impl Distribution for EHypoExpansion {
    fn cdf(&self, t: f64) -> f64 {
        self.weighted(|m| mee_cdf(m, t))
    }

    fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.weighted(|m| mee_pdf(m, t))
    }

    /// `Σ B_g R_{N_g}`, which equals `1 - F` because the `B_g` sum to one.
    fn survival(&self, t: f64) -> f64 {
        self.weighted(|m| mee_survival(m, t))
    }
}

pub fn ehypo_expansion(p: &EHypoParams) -> Result<EHypoExpansion> {
    let k = p.integer_k().ok_or(Error::NonIntegerExponent(p.k()))?;
    let a = HypoCoefficients::from_rates(p.rates());
    let indices = enumerate_ek(p.stages(), k)?;
    let terms = indices
        .into_iter()
        .map(|index| {
            let weight: f64 = a
                .as_slice()
                .iter()
                .zip(index.parts())
                .map(|(&aj, &g)| aj.powi(g as i32))
                .product();
            let coefficient = index.multinomial() * weight;
            let component = MeeParams::integer(p.rates().clone(), index.parts())?;
            Ok(ExpansionTerm {
                index,
                coefficient,
                component,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EHypoExpansion { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Brute force over `{0..=k}^n`, keeping tuples that sum to `k`.
    fn brute_force(n: usize, k: u32) -> HashSet<Vec<u32>> {
        let mut out = HashSet::new();
        let total = (k as usize + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let g: Vec<u32> = (0..n)
                .map(|_| {
                    let d = (c % (k as usize + 1)) as u32;
                    c /= k as usize + 1;
                    d
                })
                .collect();
            if g.iter().sum::<u32>() == k {
                out.insert(g);
            }
        }
        out
    }

    #[test]
    fn enumeration_examples() {
        let e = enumerate_ek(3, 3).unwrap();
        assert_eq!(e.len(), 10);
        for g in [[3, 0, 0], [0, 3, 0], [0, 0, 3], [1, 1, 1]] {
            assert!(e.iter().any(|m| m.parts() == g));
        }
        assert_eq!(enumerate_ek(1, 5).unwrap(), vec![MultiIndex(vec![5])]);
        let two = enumerate_ek(2, 2).unwrap();
        assert_eq!(
            two.iter().map(|m| m.parts().to_vec()).collect::<Vec<_>>(),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=4 {
            for k in 1..=5 {
                let e = enumerate_ek(n, k).unwrap();
                let set: HashSet<Vec<u32>> = e.iter().map(|m| m.parts().to_vec()).collect();
                assert_eq!(set.len(), e.len(), "duplicates for n={n} k={k}");
                assert_eq!(set, brute_force(n, k));
                assert_eq!(e.len() as f64, ek_size(n, k));
                assert!(e.windows(2).all(|w| w[0].parts() > w[1].parts()));
            }
        }
    }

    #[test]
    fn enumeration_bound() {
        let err = enumerate_ek(10, 40).unwrap_err();
        assert!(matches!(err, Error::CombinatorialExplosion { bound: ENUMERATION_BOUND, .. }));
        assert!(err.to_string().contains("1000000"));
        assert!(enumerate_ek(0, 3).is_err());
    }

    #[test]
    fn coefficients_for_worked_example() {
        let p = EHypoParams::from_rates(&[5.0, 4.0, 3.0], 3.0).unwrap();
        let x = ehypo_expansion(&p).unwrap();
        assert_eq!(x.terms().len(), 10);
        let first = x.terms().iter().find(|t| t.index.parts() == [3, 0, 0]).unwrap();
        assert_eq!(first.coefficient, 216.0);
        let mid = x.terms().iter().find(|t| t.index.parts() == [1, 1, 1]).unwrap();
        assert_eq!(mid.coefficient, 6.0 * 6.0 * -15.0 * 10.0);
        assert_eq!(x.coefficient_sum(), 1.0);
    }

    #[test]
    fn single_stage_single_term() {
        let p = EHypoParams::from_rates(&[0.4], 4.0).unwrap();
        let x = ehypo_expansion(&p).unwrap();
        assert_eq!(x.terms().len(), 1);
        assert_eq!(x.terms()[0].coefficient, 1.0);
    }

    #[test]
    fn non_integer_k_rejected() {
        let p = EHypoParams::from_rates(&[1.0, 2.0], 2.5).unwrap();
        assert!(matches!(ehypo_expansion(&p), Err(Error::NonIntegerExponent(_))));
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(MultiIndex(vec![2, 1, 0]).multinomial(), 3.0);
        assert_eq!(MultiIndex(vec![1, 1, 1]).multinomial(), 6.0);
        assert_eq!(MultiIndex(vec![2, 2, 1]).multinomial(), 30.0);
    }
}
