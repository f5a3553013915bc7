//! Independent numerical oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

/// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; the
/// odd-indexed nodes carry the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7, 15) on `[a, b]`: bisects the interval
/// with the largest error estimate until the total estimate is below `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts = vec![(a, b, gauss_kronrod(&f, a, b))];
    for _ in 0..20_000 {
        let total_err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if total_err < tol {
            break;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gauss_kronrod(&f, lo, mid)));
        parts.push((mid, hi, gauss_kronrod(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// Smallest power-of-two multiple of `scale` where `survival` drops below `eps`.
pub fn tail_bound<S: Fn(f64) -> f64>(survival: S, scale: f64, eps: f64) -> f64 {
    let mut t = scale;
    while survival(t) > eps {
        t *= 2.0;
    }
    t
}

/// Central difference with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Kolmogorov–Smirnov distance `sup |F_N − F|` of a sample against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// KS critical value at the 1% level, `1.63 / √N`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Hypoexponential coefficients computed with exact rational arithmetic on
/// integer rates: `A_i = Π_{j≠i} α_j / (α_j − α_i)` as a reduced fraction.
pub fn integer_coefficients(rates: &[i64]) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    (0..rates.len())
        .map(|i| {
            let (mut num, mut den) = (1i64, 1i64);
            for (j, &aj) in rates.iter().enumerate() {
                if j != i {
                    num *= aj;
                    den *= aj - rates[i];
                }
            }
            let g = gcd(num, den) * den.signum();
            (num / g, den / g)
        })
        .collect()
}

#[cfg(test)]
#[allow(unused_imports)]
mod self_checks {
    use super::*;

    #[test]
    fn quadrature_on_known_integrals() {
        assert!((integrate(|x| x.exp(), 0.0, 1.0, 1e-13) - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!((integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12) - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn ks_of_perfect_quantiles() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_distance(&xs, |x| x) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rational_coefficients() {
        assert_eq!(integer_coefficients(&[5, 4, 3]), vec![(6, 1), (-15, 1), (10, 1)]);
    }
}
