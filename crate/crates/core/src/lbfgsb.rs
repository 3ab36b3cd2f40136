//! Projected limited-memory BFGS for box-constrained minimization.
//!
//! Search directions come from the two-loop recursion restricted to the free
//! variables (those not pinned at a bound by the sign of their gradient); the
//! step is then projected back onto the box and accepted by an Armijo
//! backtracking test along the projected arc.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct Options {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once the infinity norm of the projected gradient falls below this
    /// times `max(1, |f|)`.
    pub pg_tolerance: f64,
    pub max_backtracks: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            memory: 12,
            max_iterations: 10_000,
            pg_tolerance: 1e-8,
            max_backtracks: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationLimit,
    /// No decrease possible along any search direction at machine precision.
    Stalled,
    InfeasibleStart,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient: Vec<f64>,
    pub pg_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: Status,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Infinity norm of the projected-gradient step `P(x - g) - x`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&l, &u))| ((xi - gi).clamp(l, u) - xi).abs())
        .fold(0.0, f64::max)
}

/// Minimizes `objective` over the box `[lower, upper]`.
///
/// `objective(x, grad)` returns the function value and fills `grad`; a
/// non-finite value marks `x` as infeasible and makes the line search back off.
pub fn minimize<F>(mut objective: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &Options) -> Outcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    let project = |v: &mut [f64]| {
        for ((vi, &l), &u) in v.iter_mut().zip(lower).zip(upper) {
            *vi = vi.clamp(l, u);
        }
    };

    let mut x = x0.to_vec();
    project(&mut x);
    let mut g = vec![0.0; n];
    let mut f = objective(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() {
        return Outcome {
            pg_norm: f64::INFINITY,
            x,
            f,
            gradient: g,
            iterations: 0,
            evaluations,
            status: Status::InfeasibleStart,
        };
    }

    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut free = vec![true; n];
    let mut status = Status::IterationLimit;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let pg = projected_gradient_norm(&x, &g, lower, upper);
        if pg <= opts.pg_tolerance * f.abs().max(1.0) {
            status = Status::Converged;
            break;
        }
        iterations += 1;

        for i in 0..n {
            free[i] = !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0));
        }

        let mut accepted = false;
        for attempt in 0..2 {
            if attempt == 1 {
                pairs.clear();
            }
            two_loop(&g, &free, &pairs, &mut d);
            let mut slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                pairs.clear();
                two_loop(&g, &free, &pairs, &mut d);
                slope = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                if !(slope < 0.0) {
                    break;
                }
            }
            let mut alpha = if pairs.is_empty() {
                let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (1.0 / dmax).min(1.0)
            } else {
                1.0
            };
            for _ in 0..opts.max_backtracks {
                for i in 0..n {
                    x_new[i] = (x[i] + alpha * d[i]).clamp(lower[i], upper[i]);
                }
                let decrease: f64 = g
                    .iter()
                    .zip(x_new.iter().zip(&x))
                    .map(|(gi, (a, b))| gi * (a - b))
                    .sum();
                if decrease == 0.0 {
                    break;
                }
                let f_new = objective(&x_new, &mut g_new);
                evaluations += 1;
                if f_new.is_finite() && f_new <= f + 1e-4 * decrease {
                    let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                    let yy: f64 = y.iter().map(|v| v * v).sum();
                    if sy > 1e-12 * yy.sqrt() * s.iter().map(|v| v * v).sum::<f64>().sqrt() && sy > 0.0 {
                        if pairs.len() == opts.memory {
                            pairs.pop_front();
                        }
                        pairs.push_back((s, y, 1.0 / sy));
                    }
                    std::mem::swap(&mut x, &mut x_new);
                    std::mem::swap(&mut g, &mut g_new);
                    f = f_new;
                    accepted = true;
                    break;
                }
                alpha *= if f_new.is_finite() { 0.5 } else { 0.1 };
            }
            if accepted || pairs.is_empty() {
                break;
            }
        }
        if !accepted {
            status = Status::Stalled;
            break;
        }
    }

    let pg_norm = projected_gradient_norm(&x, &g, lower, upper);
    if status != Status::Converged && pg_norm <= opts.pg_tolerance * f.abs().max(1.0) {
        status = Status::Converged;
    }
    Outcome {
        x,
        f,
        gradient: g,
        pg_norm,
        iterations,
        evaluations,
        status,
    }
}

/// `d = -H g` on the free set, zero elsewhere.
fn two_loop(g: &[f64], free: &[bool], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, d: &mut [f64]) {
    let masked_dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(free)
            .filter(|(_, &f)| f)
            .map(|((x, y), _)| x * y)
            .sum()
    };
    for (di, (&gi, &fi)) in d.iter_mut().zip(g.iter().zip(free)) {
        *di = if fi { gi } else { 0.0 };
    }
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * masked_dot(s, d);
        for i in 0..d.len() {
            if free[i] {
                d[i] -= a * y[i];
            }
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let yy = masked_dot(y, y);
        let sy = masked_dot(s, y);
        if yy > 0.0 && sy > 0.0 {
            let gamma = sy / yy;
            d.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * masked_dot(y, d);
        for i in 0..d.len() {
            if free[i] {
                d[i] += (a - b) * s[i];
            }
        }
    }
    d.iter_mut().for_each(|v| *v = -*v);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let mut f = 0.0;
        g.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..x.len() - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
            g[i] += -400.0 * x[i] * a - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        f
    }

    #[test]
    fn unconstrained_rosenbrock() {
        let n = 10;
        let out = minimize(
            rosenbrock,
            &vec![-1.2; n],
            &vec![f64::NEG_INFINITY; n],
            &vec![f64::INFINITY; n],
            &Options::default(),
        );
        assert!(out.converged(), "{:?}", out.status);
        assert!(out.x.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn active_bound_on_quadratic() {
        // min (x0 - 2)^2 + (x1 + 1)^2 on [0, 1]^2 -> (1, 0)
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 2.0);
            g[1] = 2.0 * (x[1] + 1.0);
            (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2)
        };
        let out = minimize(f, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], &Options::default());
        assert!(out.converged());
        assert_eq!(out.x, vec![1.0, 0.0]);
    }

    #[test]
    fn bounded_rosenbrock_stops_at_bound() {
        let n = 4;
        let upper = vec![0.5; n];
        let out = minimize(rosenbrock, &vec![0.0; n], &vec![-2.0; n], &upper, &Options::default());
        assert!(out.converged(), "{:?}", out.status);
        assert!(projected_gradient_norm(&out.x, &out.gradient, &vec![-2.0; n], &upper) < 1e-8);
        assert_eq!(out.x[0], 0.5);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        // f = x^2 - 3x for x < 1, infinite beyond: minimizer in the box at the edge
        let f = |x: &[f64], g: &mut [f64]| {
            if x[0] > 1.0 {
                return f64::INFINITY;
            }
            g[0] = 2.0 * x[0] - 3.0;
            x[0] * x[0] - 3.0 * x[0]
        };
        let out = minimize(f, &[0.0], &[0.0], &[5.0], &Options::default());
        assert!(out.x[0] <= 1.0);
        assert!(out.f < -1.9);
    }
}
