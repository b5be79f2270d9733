use nalgebra::{DMatrix, DVector};

use crate::error::{EmphiError, Result};
use crate::samples::{Sample, TwoSampleData};

use super::dual::solve_dual;
use super::inner::MAX_ITER;
use super::{denominators, MultiplierFit};

const OUTER_TOL: f64 = 1e-11;
const FD_STEP: f64 = 1e-6;

struct Problem<'a> {
    x: &'a Sample,
    y_shifted: Sample,
    k: usize,
    m: f64,
    n: f64,
}

impl Problem<'_> {
    fn inner(sample: &Sample, mu: &[f64], start: Option<&[f64]>) -> Result<Vec<f64>> {
        let k = sample.dim();
        let z: Vec<f64> = sample
            .rows()
            .flat_map(|r| r.iter().zip(mu).map(|(x, c)| x - c))
            .collect();
        let ones = vec![1.0; sample.len()];
        let sol = solve_dual(&z, k, &ones, start)?;
        Ok(sol.lambda)
    }

    /// `(g, lambda1, lambda2)`
    fn eval(&self, mu: &[f64], warm: Option<(&[f64], &[f64])>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let l1 = Self::inner(self.x, mu, warm.map(|w| w.0))?;
        let l2 = Self::inner(&self.y_shifted, mu, warm.map(|w| w.1))?;
        let g = l1.iter().zip(&l2).map(|(a, b)| self.m * a + self.n * b).collect();
        Ok((g, l1, l2))
    }

    fn feasible(&self, mu: &[f64]) -> bool {
        self.eval(mu, None).is_ok()
    }
}

fn pooled_start(data: &TwoSampleData, y_mean: &[f64]) -> Option<Vec<f64>> {
    let k = data.dim();
    let (m, n) = (data.m() as f64, data.n() as f64);
    let s1 = DMatrix::from_row_slice(k, k, &data.x.covariance()).try_inverse()?;
    let s2 = DMatrix::from_row_slice(k, k, &data.y.covariance()).try_inverse()?;
    let xbar = DVector::from_vec(data.x.mean());
    let ybar = DVector::from_column_slice(y_mean);
    let lhs = &s1 * m + &s2 * n;
    let rhs = &s1 * xbar * m + &s2 * ybar * n;
    lhs.lu().solve(&rhs).map(|v| v.iter().copied().collect())
}

/// Solves the `k`-dimensional system under `H0: delta = delta0` by Newton
/// on `g(mu) = m lambda1(mu) + n lambda2(mu)` with a finite-difference
/// Jacobian. Each `lambda(mu)` is a one-sample multiplier.
pub fn solve_h0_system_multivariate(data: &TwoSampleData, delta0: &[f64]) -> Result<MultiplierFit> {
    let k = data.dim();
    if delta0.len() != k {
        return Err(EmphiError::DimensionMismatch {
            expected: k,
            found: delta0.len(),
        });
    }
    let neg: Vec<f64> = delta0.iter().map(|d| -d).collect();
    let problem = Problem {
        x: &data.x,
        y_shifted: data.y.shifted(&neg),
        k,
        m: data.m() as f64,
        n: data.n() as f64,
    };
    let xbar = data.x.mean();
    let ymean = problem.y_shifted.mean();
    let delta_hat = data.delta_hat();
    if delta_hat.iter().zip(delta0).all(|(a, b)| a == b) && problem.feasible(&xbar) {
        return Ok(MultiplierFit::uniform(data, xbar, delta0.to_vec()));
    }

    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let (a, b) = data.x.column_range(j);
            let (c, d) = data.y.column_range(j);
            (b.max(d) - a.min(c)).max(f64::MIN_POSITIVE)
        })
        .collect();
    let total = problem.m + problem.n;
    let residual_of = |g: &[f64]| {
        g.iter()
            .zip(&scales)
            .map(|(v, s)| v.abs() * s / total)
            .fold(0.0, f64::max)
    };

    let average: Vec<f64> = xbar
        .iter()
        .zip(&ymean)
        .map(|(a, b)| (problem.m * a + problem.n * b) / total)
        .collect();
    let mut candidates = Vec::new();
    candidates.extend(pooled_start(data, &ymean));
    candidates.push(average);
    for i in 1..8 {
        let t = i as f64 / 8.0;
        candidates.push(xbar.iter().zip(&ymean).map(|(a, b)| a + t * (b - a)).collect());
    }
    let mut state = None;
    for mu in candidates {
        if let Ok(e) = problem.eval(&mu, None) {
            state = Some((mu, e));
            break;
        }
    }
    let Some((mut mu, (mut g, mut l1, mut l2))) = state else {
        return Err(EmphiError::InfeasibleDelta {
            delta0: delta0[0],
        });
    };

    let mut residual = residual_of(&g);
    for it in 1..=MAX_ITER {
        if residual <= OUTER_TOL {
            return Ok(assemble(data, &problem, mu, delta0, l1, l2, residual, it));
        }
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            let h = FD_STEP * scales[j];
            let mut plus = mu.clone();
            plus[j] += h;
            let mut minus = mu.clone();
            minus[j] -= h;
            let col = match (problem.eval(&plus, Some((&l1, &l2))), problem.eval(&minus, Some((&l1, &l2)))) {
                (Ok(p), Ok(q)) => p.0.iter().zip(&q.0).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>(),
                (Ok(p), Err(_)) => p.0.iter().zip(&g).map(|(a, b)| (a - b) / h).collect(),
                (Err(_), Ok(q)) => g.iter().zip(&q.0).map(|(a, b)| (a - b) / h).collect(),
                (Err(e), Err(_)) => return Err(e),
            };
            for (i, v) in col.into_iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        let step = jac
            .lu()
            .solve(&DVector::from_column_slice(&g))
            .ok_or(EmphiError::DegenerateSystem("singular outer Jacobian"))?;
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = mu.iter().zip(step.iter()).map(|(a, d)| a - s * d).collect();
            if let Ok((tg, t1, t2)) = problem.eval(&trial, Some((&l1, &l2))) {
                let tr = residual_of(&tg);
                if tr < (1.0 - 1e-4 * s) * residual {
                    mu = trial;
                    g = tg;
                    l1 = t1;
                    l2 = t2;
                    residual = tr;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            if residual <= 1e3 * OUTER_TOL {
                return Ok(assemble(data, &problem, mu, delta0, l1, l2, residual, it));
            }
            break;
        }
    }
    if residual <= OUTER_TOL {
        return Ok(assemble(data, &problem, mu, delta0, l1, l2, residual, MAX_ITER));
    }
    Err(EmphiError::SolverDiverged {
        iterations: MAX_ITER,
        residual,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    data: &TwoSampleData,
    problem: &Problem<'_>,
    mu: Vec<f64>,
    delta0: &[f64],
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
    residual: f64,
    iterations: usize,
) -> MultiplierFit {
    debug_assert_eq!(mu.len(), problem.k);
    let shifted: Vec<f64> = mu.iter().zip(delta0).map(|(a, b)| a + b).collect();
    let x_denominators = denominators(data.x.rows(), &lambda1, &mu);
    let y_denominators = denominators(data.y.rows(), &lambda2, &shifted);
    let (bm, bn) = (1.0 / problem.m, 1.0 / problem.n);
    MultiplierFit {
        p_weights: x_denominators.iter().map(|t| bm / t).collect(),
        q_weights: y_denominators.iter().map(|t| bn / t).collect(),
        lambda1,
        lambda2,
        mu_tilde: mu,
        delta0: delta0.to_vec(),
        x_denominators,
        y_denominators,
        residual_norm: residual,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> TwoSampleData {
        let x = Sample::from_rows(vec![0.1, 0.3, 1.2, -0.4, -0.8, 0.9, 0.5, -0.6], 2).unwrap();
        let y = Sample::from_rows(vec![1.0, 0.2, 1.9, 1.1, 0.4, -0.3, 1.5, 0.8], 2).unwrap();
        TwoSampleData::new(x, y).unwrap()
    }

    #[test]
    fn residual_substitution() {
        let data = data();
        let dh = data.delta_hat();
        let d0 = [dh[0] + 0.1, dh[1] - 0.05];
        let fit = solve_h0_system_multivariate(&data, &d0).unwrap();
        for j in 0..2 {
            let cx: f64 = data.x.rows().zip(&fit.p_weights).map(|(r, p)| p * (r[j] - fit.mu_tilde[j])).sum();
            let cy: f64 = data
                .y
                .rows()
                .zip(&fit.q_weights)
                .map(|(r, q)| q * (r[j] - fit.mu_tilde[j] - d0[j]))
                .sum();
            assert!(cx.abs() < 1e-8 && cy.abs() < 1e-8);
            assert!((4.0 * fit.lambda1[j] + 4.0 * fit.lambda2[j]).abs() < 1e-8);
        }
        assert!((fit.p_weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn point_estimate_gives_uniform_weights() {
        let data = data();
        let fit = solve_h0_system_multivariate(&data, &data.delta_hat()).unwrap();
        assert!(fit.lambda1.iter().chain(&fit.lambda2).all(|l| *l == 0.0));
        assert_eq!(fit.mu_tilde, data.x.mean());
    }

    #[test]
    fn collinear_sample_is_infeasible() {
        let x = Sample::from_rows(vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 2).unwrap();
        let y = Sample::from_rows(vec![0.0, 1.0, 1.0, 0.0, 2.0, 3.0, 3.0, 2.0], 2).unwrap();
        let data = TwoSampleData::new(x, y).unwrap();
        assert!(matches!(
            solve_h0_system_multivariate(&data, &[0.0, 5.0]),
            Err(EmphiError::InfeasibleDelta { .. })
        ));
    }
}
