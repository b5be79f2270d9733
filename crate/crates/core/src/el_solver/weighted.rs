//! Weighted empirical likelihood.
//!
//! Maximizes `(w1/m) sum log p_i + (w2/n) sum log q_j` subject to
//! `sum p_i = sum q_j = 1` and `sum q_j y_j - sum p_i x_i = delta0`.
//! With `v_i = (1 - w1, -x_i / w1 - delta0)` and
//! `w_j = (-w1, y_j / w2 - delta0)` the solution is
//! `p_i = (1/m) / (1 + l' v_i)`, `q_j = (1/n) / (1 + l' w_j)` where `l`
//! solves `(w1/m) sum v_i / (1 + l' v_i) + (w2/n) sum w_j / (1 + l' w_j) = 0`.

use crate::error::{EmphiError, Result};
use crate::samples::TwoSampleData;

use super::dual::solve_dual;

/// Equal population weights.
pub const DEFAULT_OMEGA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFit {
    pub lambda_star_w: [f64; 2],
    pub omega1: f64,
    pub delta0: f64,
    pub p_weights: Vec<f64>,
    pub q_weights: Vec<f64>,
    /// `1 + l' v_i`
    pub x_denominators: Vec<f64>,
    /// `1 + l' w_j`
    pub y_denominators: Vec<f64>,
    /// `(w1/m) sum v v' + (w2/n) sum w w'`, row-major.
    pub d: [[f64; 2]; 2],
    /// Second diagonal element of `D^-1`.
    pub c: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl WeightedFit {
    pub fn omega2(&self) -> f64 {
        1.0 - self.omega1
    }
}

pub fn solve_weighted(data: &TwoSampleData, delta0: f64) -> Result<WeightedFit> {
    solve_weighted_with(data, delta0, DEFAULT_OMEGA)
}

pub(crate) fn solve_weighted_with(data: &TwoSampleData, delta0: f64, omega1: f64) -> Result<WeightedFit> {
    data.require_univariate()?;
    if !(omega1 > 0.0 && omega1 < 1.0) {
        return Err(EmphiError::InvalidParameter(format!("omega1 = {omega1} outside (0, 1)")));
    }
    let omega2 = 1.0 - omega1;
    let (m, n) = (data.m(), data.n());
    let mut z = Vec::with_capacity(2 * (m + n));
    for x in data.x.values() {
        z.extend([1.0 - omega1, -x / omega1 - delta0]);
    }
    for y in data.y.values() {
        z.extend([-omega1, y / omega2 - delta0]);
    }
    let a: Vec<f64> = std::iter::repeat_n(omega1 / m as f64, m)
        .chain(std::iter::repeat_n(omega2 / n as f64, n))
        .collect();

    let mut d = [[0.0; 2]; 2];
    for (p, w) in z.chunks_exact(2).zip(&a) {
        for r in 0..2 {
            for c in 0..2 {
                d[r][c] += w * p[r] * p[c];
            }
        }
    }
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    if !(det > 1e-14 * d[0][0] * d[1][1]) {
        return Err(EmphiError::DegenerateSystem("weighted second-moment matrix is singular"));
    }
    let c = d[0][0] / det;

    let sol = solve_dual(&z, 2, &a, None).map_err(|e| {
        if e.is_infeasible() {
            EmphiError::InfeasibleDelta { delta0 }
        } else {
            e
        }
    })?;
    let (tv, tw) = sol.denominators.split_at(m);
    let (bm, bn) = (1.0 / m as f64, 1.0 / n as f64);
    Ok(WeightedFit {
        lambda_star_w: [sol.lambda[0], sol.lambda[1]],
        omega1,
        delta0,
        p_weights: tv.iter().map(|t| bm / t).collect(),
        q_weights: tw.iter().map(|t| bn / t).collect(),
        x_denominators: tv.to_vec(),
        y_denominators: tw.to_vec(),
        d,
        c,
        residual_norm: sol.residual,
        iterations: sol.iterations,
    })
}
