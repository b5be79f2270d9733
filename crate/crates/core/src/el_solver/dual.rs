//! Weighted empirical-likelihood dual in `k` dimensions.
//!
//! Maximizes `G(lambda) = sum_i a_i log*(1 + lambda' z_i)` by damped Newton,
//! where `log*` is the logarithm continued quadratically below
//! `eps_i = a_i / sum(a)`. `G` is concave and finite everywhere, and its
//! stationary point solves `sum_i a_i z_i / (1 + lambda' z_i) = 0` whenever
//! every denominator ends up above `eps_i`. A denominator left in the
//! quadratic region means zero is not interior to the weighted hull of the
//! points.

use nalgebra::{DMatrix, DVector};

use crate::error::{EmphiError, Result};

use super::inner::MAX_ITER;

const GRAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub(crate) struct DualSolution {
    pub lambda: Vec<f64>,
    /// `1 + lambda' z_i`
    pub denominators: Vec<f64>,
    pub iterations: usize,
    /// `max_j |sum_i a_i z_ij / t_i|` relative to `sum_i a_i |z_ij|`.
    pub residual: f64,
}

#[inline]
fn log_star(t: f64, eps: f64) -> (f64, f64, f64) {
    if t >= eps {
        (t.ln(), 1.0 / t, -1.0 / (t * t))
    } else {
        let r = t / eps;
        (eps.ln() - 1.5 + 2.0 * r - 0.5 * r * r, (2.0 - r) / eps, -1.0 / (eps * eps))
    }
}

/// `z` is row-major with `weights.len()` rows of length `k`.
pub(crate) fn solve_dual(
    z: &[f64],
    k: usize,
    weights: &[f64],
    start: Option<&[f64]>,
) -> Result<DualSolution> {
    let count = weights.len();
    debug_assert_eq!(z.len(), count * k);
    let total: f64 = weights.iter().sum();
    let eps: Vec<f64> = weights.iter().map(|a| a / total).collect();

    let mut scale = vec![0.0; k];
    for (row, a) in z.chunks_exact(k).zip(weights) {
        for j in 0..k {
            scale[j] += a * row[j].abs();
        }
    }
    if scale.contains(&0.0) {
        return Err(EmphiError::DegenerateSystem("a coordinate is identically zero"));
    }

    let objective = |lambda: &DVector<f64>| -> f64 {
        z.chunks_exact(k)
            .zip(weights.iter().zip(&eps))
            .map(|(row, (a, e))| {
                let t = 1.0 + row.iter().zip(lambda.iter()).map(|(x, l)| x * l).sum::<f64>();
                a * log_star(t, *e).0
            })
            .sum()
    };

    let mut lambda = match start {
        Some(s) => DVector::from_column_slice(s),
        None => DVector::zeros(k),
    };
    let mut value = objective(&lambda);
    let mut residual = f64::INFINITY;
    for it in 0..=MAX_ITER {
        let mut grad = DVector::<f64>::zeros(k);
        let mut neg_hess = DMatrix::<f64>::zeros(k, k);
        let mut true_grad = DVector::<f64>::zeros(k);
        let mut in_region = true;
        let mut min_shift = f64::INFINITY;
        for (row, (a, e)) in z.chunks_exact(k).zip(weights.iter().zip(&eps)) {
            let shift = row.iter().zip(lambda.iter()).map(|(x, l)| x * l).sum::<f64>();
            let t = 1.0 + shift;
            min_shift = min_shift.min(shift);
            let (_, d1, d2) = log_star(t, *e);
            in_region &= t >= *e;
            for p in 0..k {
                grad[p] += a * d1 * row[p];
                true_grad[p] += a * row[p] / t;
                for q in 0..=p {
                    neg_hess[(p, q)] -= a * d2 * row[p] * row[q];
                }
            }
        }
        for p in 0..k {
            for q in 0..p {
                neg_hess[(q, p)] = neg_hess[(p, q)];
            }
        }
        // lambda' z_i >= 0 for every i separates zero from the hull
        if min_shift >= 0.0 && lambda.iter().any(|l| *l != 0.0) {
            return Err(EmphiError::CenterOutsideHull { center: f64::NAN });
        }
        residual = (0..k)
            .map(|j| true_grad[j].abs() / scale[j])
            .fold(0.0, f64::max);
        if in_region && residual <= GRAD_TOL {
            let lambda: Vec<f64> = lambda.iter().copied().collect();
            let denominators = z
                .chunks_exact(k)
                .map(|row| 1.0 + row.iter().zip(&lambda).map(|(x, l)| x * l).sum::<f64>())
                .collect();
            return Ok(DualSolution {
                lambda,
                denominators,
                iterations: it,
                residual,
            });
        }
        if it == MAX_ITER {
            break;
        }
        let chol = well_conditioned_cholesky(neg_hess)?;
        let step = chol.solve(&grad);
        let slope = grad.dot(&step);
        let mut s = 1.0;
        let mut accepted = false;
        if in_region && slope <= 1e-6 * total {
            // close enough for undamped Newton; the objective no longer
            // resolves the remaining ascent
            let trial = &lambda + &step;
            let inside = z.chunks_exact(k).zip(&eps).all(|(row, e)| {
                1.0 + row.iter().zip(trial.iter()).map(|(x, l)| x * l).sum::<f64>() >= *e
            });
            if inside {
                value = objective(&trial);
                lambda = trial;
                continue;
            }
        }
        for _ in 0..60 {
            let trial = &lambda + &step * s;
            let v = objective(&trial);
            if v >= value + 1e-4 * s * slope {
                lambda = trial;
                value = v;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            // no ascent left at working precision
            break;
        }
    }
    let outside = z
        .chunks_exact(k)
        .zip(&eps)
        .any(|(row, e)| 1.0 + row.iter().zip(lambda.iter()).map(|(x, l)| x * l).sum::<f64>() < *e);
    if outside {
        return Err(EmphiError::CenterOutsideHull { center: f64::NAN });
    }
    Err(EmphiError::SolverDiverged {
        iterations: MAX_ITER,
        residual,
    })
}

pub(crate) fn well_conditioned_cholesky(
    matrix: DMatrix<f64>,
) -> Result<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    let max_diag = matrix.diagonal().amax();
    let chol = matrix
        .cholesky()
        .ok_or(EmphiError::DegenerateSystem("points do not span the space"))?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if !(min_pivot > 1e-12 * max_diag) {
        return Err(EmphiError::DegenerateSystem("points do not span the space"));
    }
    Ok(chol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_scalar_solver_in_one_dimension() {
        let x = [0.2, 0.9, 1.4, 2.6, 3.1, 4.0];
        let c = 1.3;
        let z: Vec<f64> = x.iter().map(|v| v - c).collect();
        let dual = solve_dual(&z, 1, &[1.0; 6], None).unwrap();
        let scalar = super::super::inner::inner_root(&x, c).unwrap();
        assert!((dual.lambda[0] - scalar.lambda).abs() < 1e-12 * scalar.lambda.abs());
    }

    #[test]
    fn bivariate_root() {
        let z = [1.0, 0.2, -0.5, 1.0, -0.7, -0.9, 0.3, -0.1, 0.4, 0.6];
        let sol = solve_dual(&z, 2, &[1.0; 5], None).unwrap();
        let mut g = [0.0; 2];
        for (row, t) in z.chunks_exact(2).zip(&sol.denominators) {
            g[0] += row[0] / t;
            g[1] += row[1] / t;
            assert!(*t > 0.0);
        }
        assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn zero_outside_hull_is_reported() {
        // all points have positive first coordinate
        let z = [1.0, 0.2, 0.5, 1.0, 0.7, -0.9];
        assert!(matches!(
            solve_dual(&z, 2, &[1.0; 3], None),
            Err(EmphiError::CenterOutsideHull { .. })
        ));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let z = [1.0, 2.0, -1.0, -2.0, 0.5, 1.0];
        assert!(solve_dual(&z, 2, &[1.0; 3], None).is_err());
    }
}
