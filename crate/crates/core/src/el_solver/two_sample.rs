use crate::error::{EmphiError, Result};
use crate::samples::TwoSampleData;

use super::inner::{inner_root, InnerRoot, MAX_ITER};
use super::{denominators, MultiplierFit};

const OUTER_TOL: f64 = 1e-12;
const GRID_POINTS: usize = 64;

/// Precision-weighted estimate of the common mean under `H0`:
/// `(m Xbar / var1 + n (Ybar - delta0) / var2) / (m / var1 + n / var2)`.
pub fn pooled_mean_estimate(data: &TwoSampleData, delta0: f64, var1: f64, var2: f64) -> f64 {
    let (m, n) = (data.m() as f64, data.n() as f64);
    let xbar = data.x.mean()[0];
    let ybar = data.y.mean()[0];
    let (a, b) = (m / var1, n / var2);
    (a * xbar + b * (ybar - delta0)) / (a + b)
}

struct Outer<'a> {
    x: &'a [f64],
    y_shifted: Vec<f64>,
    m: f64,
    n: f64,
}

impl Outer<'_> {
    fn eval(&self, mu: f64) -> Result<(f64, f64, InnerRoot, InnerRoot)> {
        let r1 = inner_root(self.x, mu)?;
        let r2 = inner_root(&self.y_shifted, mu)?;
        let g = self.m * r1.lambda + self.n * r2.lambda;
        let dg = self.m * r1.slope + self.n * r2.slope;
        Ok((g, dg, r1, r2))
    }
}

/// Solves the univariate system under `H0: delta = delta0`.
///
/// `g(mu) = m lambda1(mu) + n lambda2(mu)` is strictly decreasing on the
/// open interval where both inner problems are feasible, so its root is
/// bracketed and found by safeguarded Newton.
pub fn solve_h0_system(data: &TwoSampleData, delta0: f64) -> Result<MultiplierFit> {
    data.require_univariate()?;
    let x = data.x.values();
    let y_shifted: Vec<f64> = data.y.values().iter().map(|v| v - delta0).collect();
    let (xmin, xmax) = data.x.column_range(0);
    let (ymin, ymax) = (ymin_of(&y_shifted), ymax_of(&y_shifted));
    let lo = xmin.max(ymin);
    let hi = xmax.min(ymax);
    if !(lo < hi) {
        if lo == hi && xmin == xmax && ymin == ymax {
            // both samples constant at the same point
            return Ok(MultiplierFit::uniform(data, vec![lo], vec![delta0]));
        }
        return Err(EmphiError::InfeasibleDelta { delta0 });
    }

    let (m, n) = (data.m() as f64, data.n() as f64);
    let outer = Outer {
        x,
        y_shifted,
        m,
        n,
    };
    let range = data.combined_range().max(f64::MIN_POSITIVE);
    let g_scale = (m + n) / range;
    let (sx, sy) = (data.x.covariance()[0], data.y.covariance()[0]);
    let start = if sx > 0.0 && sy > 0.0 {
        pooled_mean_estimate(data, delta0, sx, sy)
    } else {
        (x.iter().sum::<f64>() + outer.y_shifted.iter().sum::<f64>()) / (m + n)
    };

    let shrink = 1e-9 * (hi - lo);
    let (mut a, mut b) = bracket(&outer, lo + shrink, hi - shrink)?;
    let mut mu = if start > a && start < b { start } else { 0.5 * (a + b) };
    for it in 1..=MAX_ITER {
        let (g, dg, r1, r2) = outer.eval(mu)?;
        let residual = g.abs() / g_scale;
        let bracket_done = b - a <= 4.0 * f64::EPSILON * mu.abs().max(range);
        if residual <= OUTER_TOL || bracket_done {
            return Ok(assemble(data, mu, delta0, r1.lambda, r2.lambda, residual, it));
        }
        if g > 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        let newton = mu - g / dg;
        let next = if newton > a && newton < b && dg < 0.0 {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - mu).abs() <= 4.0 * f64::EPSILON * mu.abs().max(range) {
            return Ok(assemble(data, mu, delta0, r1.lambda, r2.lambda, residual, it));
        }
        mu = next;
    }
    let (g, ..) = outer.eval(mu)?;
    Err(EmphiError::SolverDiverged {
        iterations: MAX_ITER,
        residual: g.abs() / g_scale,
    })
}

fn ymin_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn ymax_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Returns `(a, b)` with `g(a) > 0 > g(b)`, scanning a grid if the
/// endpoints do not already change sign.
fn bracket(outer: &Outer<'_>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let g = |mu: f64| outer.eval(mu).map(|e| e.0);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo > 0.0 && ghi < 0.0 {
        return Ok((lo, hi));
    }
    let mut prev = (lo, glo);
    for i in 1..=GRID_POINTS {
        let mu = lo + (hi - lo) * i as f64 / GRID_POINTS as f64;
        let gm = if i == GRID_POINTS { ghi } else { g(mu)? };
        if prev.1 >= 0.0 && gm <= 0.0 {
            return Ok((prev.0, mu));
        }
        prev = (mu, gm);
    }
    Err(EmphiError::SolverDiverged {
        iterations: GRID_POINTS,
        residual: glo.abs().min(ghi.abs()),
    })
}

fn assemble(
    data: &TwoSampleData,
    mu: f64,
    delta0: f64,
    lambda1: f64,
    lambda2: f64,
    residual: f64,
    iterations: usize,
) -> MultiplierFit {
    let x_denominators = denominators(data.x.rows(), &[lambda1], &[mu]);
    let y_denominators = denominators(data.y.rows(), &[lambda2], &[mu + delta0]);
    let (bm, bn) = (1.0 / data.m() as f64, 1.0 / data.n() as f64);
    MultiplierFit {
        lambda1: vec![lambda1],
        lambda2: vec![lambda2],
        mu_tilde: vec![mu],
        delta0: vec![delta0],
        p_weights: x_denominators.iter().map(|t| bm / t).collect(),
        q_weights: y_denominators.iter().map(|t| bn / t).collect(),
        x_denominators,
        y_denominators,
        residual_norm: residual,
        iterations,
    }
}
