//! Constrained empirical-likelihood solvers.
//!
//! Under `H0: delta = delta0` the two-sample problem maximizes
//! `sum log p_i + sum log q_j` subject to both weight vectors summing to one
//! and `sum p_i x_i = mu`, `sum q_j y_j = mu + delta0` for some common `mu`.
//! The optimum has the form
//!
//! ```text
//! p_i = (1/m) / (1 + lambda1 (x_i - mu)),   q_j = (1/n) / (1 + lambda2 (y_j - mu - delta0))
//! ```
//!
//! with `m lambda1 + n lambda2 = 0`. [`solve_h0_system`] finds it by a nested
//! scalar solve; [`solve_h0_system_multivariate`] handles `k`-vectors.
//! [`solve_weighted`] and [`solve_combined`] solve the two-dimensional
//! multiplier systems of the weighted and pooled formulations.

mod combined;
mod dual;
mod inner;
mod multivariate;
mod two_sample;
mod weighted;

pub use combined::{solve_combined, CombinedFit};
pub use inner::solve_inner_lambda;
pub use multivariate::solve_h0_system_multivariate;
pub use two_sample::{pooled_mean_estimate, solve_h0_system};
pub use weighted::{solve_weighted, WeightedFit};

use crate::samples::TwoSampleData;

/// Solution of the two-sample system under `H0`.
///
/// Scalar quantities are stored as length-`k` vectors; `k = 1` for
/// univariate data.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFit {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub delta0: Vec<f64>,
    pub p_weights: Vec<f64>,
    pub q_weights: Vec<f64>,
    /// `1 + lambda1' (x_i - mu)`, so that `p_i = (1/m) / x_denominators[i]`.
    pub x_denominators: Vec<f64>,
    /// `1 + lambda2' (y_j - mu - delta0)`.
    pub y_denominators: Vec<f64>,
    /// Largest scaled violation of `m lambda1 + n lambda2 = 0`.
    pub residual_norm: f64,
    /// Outer iterations.
    pub iterations: usize,
}

impl MultiplierFit {
    /// Recomputes `(p, q)` from the multipliers and `mu_tilde`.
    pub fn reconstruct_weights(&self, data: &TwoSampleData) -> (Vec<f64>, Vec<f64>) {
        let shifted: Vec<f64> = self
            .mu_tilde
            .iter()
            .zip(&self.delta0)
            .map(|(m, d)| m + d)
            .collect();
        let p = weights_from(data.x.rows(), data.m(), &self.lambda1, &self.mu_tilde);
        let q = weights_from(data.y.rows(), data.n(), &self.lambda2, &shifted);
        (p, q)
    }

    /// Scalar accessors for univariate fits.
    pub fn lambda1_scalar(&self) -> f64 {
        self.lambda1[0]
    }

    pub fn lambda2_scalar(&self) -> f64 {
        self.lambda2[0]
    }

    pub fn mu_scalar(&self) -> f64 {
        self.mu_tilde[0]
    }

    /// Fit at `delta0 = Ybar - Xbar`, where uniform weights are optimal.
    pub(crate) fn uniform(data: &TwoSampleData, mu: Vec<f64>, delta0: Vec<f64>) -> Self {
        let k = data.dim();
        Self {
            lambda1: vec![0.0; k],
            lambda2: vec![0.0; k],
            mu_tilde: mu,
            delta0,
            p_weights: vec![1.0 / data.m() as f64; data.m()],
            q_weights: vec![1.0 / data.n() as f64; data.n()],
            x_denominators: vec![1.0; data.m()],
            y_denominators: vec![1.0; data.n()],
            residual_norm: 0.0,
            iterations: 0,
        }
    }
}

pub(crate) fn denominators<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    lambda: &[f64],
    center: &[f64],
) -> Vec<f64> {
    rows.map(|r| {
        1.0 + r
            .iter()
            .zip(center)
            .zip(lambda)
            .map(|((x, c), l)| l * (x - c))
            .sum::<f64>()
    })
    .collect()
}

fn weights_from<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    size: usize,
    lambda: &[f64],
    center: &[f64],
) -> Vec<f64> {
    let base = 1.0 / size as f64;
    denominators(rows, lambda, center)
        .into_iter()
        .map(|t| base / t)
        .collect()
}
