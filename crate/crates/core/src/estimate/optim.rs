//! Unconstrained minimisers: Nelder–Mead followed by a BFGS polish on a
//! caller-supplied gradient.

/// Termination settings shared by both stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub max_iterations: usize,
    /// Objective-change threshold.
    pub f_tol: f64,
    /// Gradient-norm threshold.
    pub g_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Best objective value after every accepted step; nonincreasing.
    pub trace: Vec<f64>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Central-difference gradient with per-coordinate step `1e-5 max(1, |x_i|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Nelder–Mead with standard coefficients, starting from an axis-aligned
/// simplex of edge `step`. Stops when the simplex's objective spread drops
/// below `f_tol` or the iteration budget runs out.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, tol: Tolerances) -> Minimum {
    let dim = x0.len();
    let eval = |x: &[f64]| sanitize(f(x));
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < tol.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].1);
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= tol.f_tol && size <= 1e-6 {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[dim].1 {
            let c = along(-0.5);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(0.5);
            let v = eval(&c);
            (c, v)
        };
        if fc < simplex[dim].1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let best_x = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best_x) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            *v = eval(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    if trace.last() != Some(&value) {
        trace.push(value);
    }
    let gradient_norm = norm(&fd_gradient(&eval, &x));
    Minimum {
        converged: gradient_norm <= tol.g_tol,
        x,
        value,
        iterations,
        gradient_norm,
        trace,
    }
}

/// BFGS on the inverse Hessian with Armijo backtracking. Converged when the
/// last accepted step changed the objective by less than `f_tol` and the
/// gradient norm is at most `g_tol`.
pub fn bfgs<F, G>(f: &F, grad: &G, x0: &[f64], tol: Tolerances) -> Minimum
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let dim = x0.len();
    let eval = |x: &[f64]| sanitize(f(x));
    let identity = |d: usize| -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x);
    let mut g = grad(&x);
    let mut h_inv = identity(dim);
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;

    while iterations < tol.max_iterations && fx.is_finite() {
        let g_norm = norm(&g);
        if g_norm <= tol.g_tol && last_change <= tol.f_tol {
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = h_inv.iter().map(|row| -row.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()).collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope.is_nan() || slope >= 0.0 {
            h_inv = identity(dim);
            dir = g.iter().map(|gi| -gi).collect();
            slope = -g_norm * g_norm;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = eval(&trial);
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No descent at floating-point resolution along the quasi-Newton direction.
            last_change = 0.0;
            break;
        };
        let g_new = grad(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * norm(&s) * norm(&y) {
            let hy: Vec<f64> = h_inv.iter().map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..dim {
                for j in 0..dim {
                    h_inv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        last_change = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
    }
    let gradient_norm = norm(&g);
    Minimum {
        converged: gradient_norm <= tol.g_tol && last_change <= tol.f_tol,
        x,
        value: fx,
        iterations,
        gradient_norm,
        trace,
    }
}
