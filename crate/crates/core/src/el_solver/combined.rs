//! Pooled two-dimensional multiplier formulation.
//!
//! The `N = m + n` observations are mapped to points
//! `v_i = (1 - w1, x_i / w1 - delta)` and `w_j = (-w1, y_j / w2 - delta)`
//! and a single multiplier solves
//! `sum v_i / (1 + l' v_i) + sum w_j / (1 + l' w_j) = 0`.
//! The weights `(1/m) / (1 + l' v_i)` and `(1/n) / (1 + l' w_j)` are
//! reported as computed; they need not coincide with the nested solution.

use crate::error::{EmphiError, Result};
use crate::samples::TwoSampleData;

use super::dual::solve_dual;

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedFit {
    pub lambda_star: [f64; 2],
    pub v_points: Vec<[f64; 2]>,
    pub w_points: Vec<[f64; 2]>,
    pub p_weights: Vec<f64>,
    pub q_weights: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Solves the pooled system with `omega2 = 1 - omega1`.
pub fn solve_combined(data: &TwoSampleData, delta0: f64, omega1: f64) -> Result<CombinedFit> {
    data.require_univariate()?;
    if !(omega1 > 0.0 && omega1 < 1.0) {
        return Err(EmphiError::InvalidParameter(format!("omega1 = {omega1} outside (0, 1)")));
    }
    let omega2 = 1.0 - omega1;
    let v_points: Vec<[f64; 2]> = data
        .x
        .values()
        .iter()
        .map(|x| [1.0 - omega1, x / omega1 - delta0])
        .collect();
    let w_points: Vec<[f64; 2]> = data
        .y
        .values()
        .iter()
        .map(|y| [-omega1, y / omega2 - delta0])
        .collect();
    let z: Vec<f64> = v_points.iter().chain(&w_points).flatten().copied().collect();
    let ones = vec![1.0; data.total()];
    let sol = solve_dual(&z, 2, &ones, None).map_err(|e| {
        if e.is_infeasible() {
            EmphiError::InfeasibleDelta { delta0 }
        } else {
            e
        }
    })?;
    let (tv, tw) = sol.denominators.split_at(data.m());
    let (bm, bn) = (1.0 / data.m() as f64, 1.0 / data.n() as f64);
    Ok(CombinedFit {
        lambda_star: [sol.lambda[0], sol.lambda[1]],
        p_weights: tv.iter().map(|t| bm / t).collect(),
        q_weights: tw.iter().map(|t| bn / t).collect(),
        v_points,
        w_points,
        residual_norm: sol.residual,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_samples() {
        let data = TwoSampleData::univariate(vec![-1.0, 1.0], vec![-1.0, 1.0]).unwrap();
        let fit = solve_combined(&data, 0.0, 0.5).unwrap();
        let mut g = [0.0; 2];
        for p in fit.v_points.iter().chain(&fit.w_points) {
            let t = 1.0 + fit.lambda_star[0] * p[0] + fit.lambda_star[1] * p[1];
            assert!(t > 0.0);
            g[0] += p[0] / t;
            g[1] += p[1] / t;
        }
        assert!(g[0].abs() < 1e-8 && g[1].abs() < 1e-8);
    }

    #[test]
    fn separated_points_are_infeasible() {
        let data = TwoSampleData::univariate(vec![7.0, 8.0, 9.0], vec![8.0, 9.0, 10.0]).unwrap();
        assert!(matches!(
            solve_combined(&data, 0.4, 0.5),
            Err(EmphiError::InfeasibleDelta { .. })
        ));
    }
}
