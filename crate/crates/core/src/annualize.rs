//! Conversion of multi-year calibration data to a one-year step.

use crate::error::{Error, Result};
use crate::lbfgsb;
use crate::params::{validate_transfer, ExogenousPaths, Matrix3};

/// Largest entrywise error accepted from the principal matrix root.
pub const ROOT_TOLERANCE: f64 = 1e-6;

/// Largest entrywise error accepted when the principal root is not a valid
/// transfer matrix and a nonnegative fit is used instead. The DICE2016R2
/// matrix has no nonnegative fifth root; its best fit sits near 4e-4.
pub const FIT_TOLERANCE: f64 = 1e-3;

/// Interpolates coarse paths to annual resolution.
///
/// Node values are copied exactly. Population, productivity, emissions
/// intensity and backstop cost are interpolated geometrically (constant growth
/// rate within a period); land-use emissions and exogenous forcing linearly.
pub fn annualize_paths(coarse: &ExogenousPaths) -> Result<ExogenousPaths> {
    coarse.validate()?;
    let step = coarse.step_years as usize;
    let geometric = |s: &[f64]| interpolate(s, step, |a, b, f| a * (b / a).powf(f));
    let linear = |s: &[f64]| interpolate(s, step, |a, b, f| a + (b - a) * f);
    let annual = ExogenousPaths {
        start_year: coarse.start_year,
        step_years: 1,
        population: geometric(&coarse.population),
        productivity: geometric(&coarse.productivity),
        emissions_intensity: geometric(&coarse.emissions_intensity),
        land_emissions: linear(&coarse.land_emissions),
        exogenous_forcing: linear(&coarse.exogenous_forcing),
        backstop_cost_fraction: geometric(&coarse.backstop_cost_fraction),
    };
    annual.validate()?;
    Ok(annual)
}

fn interpolate(nodes: &[f64], step: usize, blend: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity((nodes.len() - 1) * step + 1);
    for w in nodes.windows(2) {
        out.push(w[0]);
        for j in 1..step {
            out.push(blend(w[0], w[1], j as f64 / step as f64));
        }
    }
    out.extend(nodes.last());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    PrincipalRoot,
    NonnegativeFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarbonCycleFit {
    pub matrix: Matrix3,
    /// Largest entrywise error of `matrix^steps` against the input.
    pub residual: f64,
    pub method: RootMethod,
}

/// Annual carbon transfer matrix from a five-year one.
pub fn annualize_carbon_cycle(phi5: &Matrix3) -> Result<CarbonCycleFit> {
    transfer_matrix_root(phi5, 5)
}

/// A transfer matrix `P` with `P^steps ~= phi`, columns summing to one.
///
/// The principal root is used when it has no negative entries; otherwise the
/// closest nonnegative column-stochastic matrix in the least-squares sense.
pub fn transfer_matrix_root(phi: &Matrix3, steps: u32) -> Result<CarbonCycleFit> {
    validate_transfer("carbon_transfer", phi, 1e-9)?;
    let principal = principal_root(phi, steps);
    if let Some(root) = principal {
        if root.iter().flatten().all(|&v| v >= -1e-14) {
            let matrix = renormalize(root.map(|r| r.map(|v| v.max(0.0))));
            let residual = max_abs_diff(&mat_pow(&matrix, steps), phi);
            if residual < ROOT_TOLERANCE {
                return Ok(CarbonCycleFit {
                    matrix,
                    residual,
                    method: RootMethod::PrincipalRoot,
                });
            }
        }
    }

    let start = principal.unwrap_or_else(|| {
        let mut m = identity();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += (phi[i][j] - m[i][j]) / steps as f64;
            }
        }
        m
    });
    let matrix = renormalize(nonnegative_fit(phi, steps, &start));
    let residual = max_abs_diff(&mat_pow(&matrix, steps), phi);
    if residual > FIT_TOLERANCE {
        return Err(Error::Calibration {
            what: "no transfer matrix reproduces the carbon cycle".into(),
            residual,
        });
    }
    Ok(CarbonCycleFit {
        matrix,
        residual,
        method: RootMethod::NonnegativeFit,
    })
}

/// Principal p-th root via the coupled inverse Newton iteration
/// `X <- X M, N <- M^p N` with `M = ((p+1) I - N) / p`, which drives `X` to
/// `A^(-1/p)`; the root is then `A X^(p-1)`.
/// Returns `None` when the iteration does not settle.
fn principal_root(a: &Matrix3, p: u32) -> Option<Matrix3> {
    let pf = p as f64;
    let mut x = identity();
    let mut n = *a;
    for _ in 0..200 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = -n[i][j] / pf + if i == j { (pf + 1.0) / pf } else { 0.0 };
            }
        }
        x = mat_mul(&x, &m);
        n = mat_mul(&mat_pow(&m, p), &n);
        if !n.iter().flatten().all(|v| v.is_finite()) {
            return None;
        }
        if max_abs_diff(&n, &identity()) < 1e-15 {
            break;
        }
    }
    let root = mat_mul(a, &mat_pow(&x, p - 1));
    (max_abs_diff(&mat_pow(&root, p), a) < 1e-10).then_some(root)
}

/// Minimizes `||P^p - A||_F^2` over column-stochastic P with a per-column
/// softmax parametrization.
fn nonnegative_fit(a: &Matrix3, p: u32, start: &Matrix3) -> Matrix3 {
    let mut z0 = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            z0[3 * i + j] = start[i][j].max(1e-9).ln();
        }
    }
    let objective = |z: &[f64], grad: &mut [f64]| -> f64 {
        let pm = softmax_columns(z);
        let pp = mat_pow(&pm, p);
        let mut r = [[0.0; 3]; 3];
        let mut f = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = pp[i][j] - a[i][j];
                f += r[i][j] * r[i][j];
            }
        }
        // dF/dP = sum_k (P^T)^k (2R) (P^T)^(p-1-k)
        let pt = transpose(&pm);
        let g2 = r.map(|row| row.map(|v| 2.0 * v));
        let mut dp = [[0.0; 3]; 3];
        for k in 0..p {
            let term = mat_mul(&mat_mul(&mat_pow(&pt, k), &g2), &mat_pow(&pt, p - 1 - k));
            for i in 0..3 {
                for j in 0..3 {
                    dp[i][j] += term[i][j];
                }
            }
        }
        for j in 0..3 {
            let inner: f64 = (0..3).map(|l| pm[l][j] * dp[l][j]).sum();
            for i in 0..3 {
                grad[3 * i + j] = pm[i][j] * (dp[i][j] - inner);
            }
        }
        f
    };
    let opts = lbfgsb::Options {
        memory: 9,
        max_iterations: 5000,
        pg_tolerance: 1e-15,
        max_backtracks: 60,
    };
    let inf = [f64::INFINITY; 9];
    let neg = [f64::NEG_INFINITY; 9];
    let out = lbfgsb::minimize(objective, &z0, &neg, &inf, &opts);
    softmax_columns(&out.x)
}

fn softmax_columns(z: &[f64]) -> Matrix3 {
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        let top = (0..3).map(|i| z[3 * i + j]).fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = (0..3).map(|i| (z[3 * i + j] - top).exp()).collect();
        let s: f64 = e.iter().sum();
        for i in 0..3 {
            m[i][j] = e[i] / s;
        }
    }
    m
}

/// Resets each diagonal entry so its column sums to one.
#[allow(clippy::needless_range_loop)]
fn renormalize(mut m: Matrix3) -> Matrix3 {
    for j in 0..3 {
        let off: f64 = (0..3).filter(|&i| i != j).map(|i| m[i][j]).sum();
        m[j][j] = 1.0 - off;
    }
    m
}

pub fn identity() -> Matrix3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_pow(a: &Matrix3, p: u32) -> Matrix3 {
    (0..p).fold(identity(), |acc, _| mat_mul(&acc, a))
}

pub fn mat_vec(a: &Matrix3, v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

fn transpose(a: &Matrix3) -> Matrix3 {
    [0, 1, 2].map(|i| [a[0][i], a[1][i], a[2][i]])
}

pub fn max_abs_diff(a: &Matrix3, b: &Matrix3) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
