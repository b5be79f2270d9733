//! One-sample empirical likelihood multiplier for a scalar mean constraint.

use crate::error::{EmphiError, Result};
use crate::samples::Sample;

pub(crate) const MAX_ITER: usize = 200;
const RESIDUAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub(crate) struct InnerRoot {
    pub lambda: f64,
    /// `d lambda / d center`, strictly negative.
    pub slope: f64,
}

/// Solves `sum (x_i - c) / (1 + lambda (x_i - c)) = 0`.
///
/// The root lies in `[-(1 - 1/m)/z_max, (1 - 1/m)/|z_min|]`, where every
/// implied weight is below one; the function is strictly decreasing there,
/// so Newton steps are kept inside a shrinking sign bracket and replaced by
/// bisection whenever they leave it.
pub(crate) fn inner_root(values: &[f64], center: f64) -> Result<InnerRoot> {
    let m = values.len() as f64;
    let (mut zmin, mut zmax, mut scale) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &x in values {
        let z = x - center;
        zmin = zmin.min(z);
        zmax = zmax.max(z);
        scale += z.abs();
    }
    if zmin == 0.0 && zmax == 0.0 {
        return Ok(InnerRoot {
            lambda: 0.0,
            slope: 0.0,
        });
    }
    if !(zmin < 0.0 && zmax > 0.0) {
        return Err(EmphiError::CenterOutsideHull { center });
    }
    let shrink = 1.0 - 1.0 / m;
    let mut lo = -shrink / zmax;
    let mut hi = shrink / -zmin;
    let mut lambda = 0.0;
    let mut f_last = f64::NAN;
    for _ in 0..MAX_ITER {
        let (mut f, mut df, mut inv2, mut size) = (0.0, 0.0, 0.0, 0.0);
        for &x in values {
            let z = x - center;
            let r = 1.0 / (1.0 + lambda * z);
            f += z * r;
            size += (z * r).abs();
            df -= z * z * r * r;
            inv2 += r * r;
        }
        f_last = f;
        let done = |lambda: f64| InnerRoot {
            lambda,
            slope: inv2 / df,
        };
        if f.abs() <= RESIDUAL_TOL * size {
            return Ok(done(lambda));
        }
        if f > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let newton = lambda - f / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - lambda).abs() <= 2.0 * f64::EPSILON * lambda.abs() || hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(done(next));
        }
        lambda = next;
    }
    Err(EmphiError::SolverDiverged {
        iterations: MAX_ITER,
        residual: f_last.abs() / scale,
    })
}

/// Lagrange multiplier of the one-sample problem
/// `max sum log p_i  s.t.  sum p_i = 1, sum p_i x_i = center`.
///
/// The implied weights are `p_i = (1/m) / (1 + lambda (x_i - center))`.
pub fn solve_inner_lambda(sample: &Sample, center: f64) -> Result<f64> {
    if sample.dim() != 1 {
        return Err(EmphiError::DimensionMismatch {
            expected: 1,
            found: sample.dim(),
        });
    }
    inner_root(sample.values(), center).map(|r| r.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_and_mean_centers_give_zero() {
        assert_eq!(solve_inner_lambda(&sample(&[-1.0, 1.0]), 0.0).unwrap(), 0.0);
        assert_eq!(solve_inner_lambda(&sample(&[0.0, 1.0, 2.0]), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn root_satisfies_both_forms() {
        let s = sample(&[0.0, 1.0, 2.0]);
        let l = solve_inner_lambda(&s, 0.8).unwrap();
        let (mut mean_eq, mut mass) = (0.0, 0.0);
        for &x in s.values() {
            let z = x - 0.8;
            mean_eq += z / (1.0 + l * z);
            mass += 1.0 / (1.0 + l * z);
        }
        assert!(mean_eq.abs() < 1e-14);
        assert!((mass / 3.0 - 1.0).abs() < 1e-14);
        // center below the mean pulls weight left: lambda > 0
        assert!(l > 0.0);
    }

    #[test]
    fn hull_violations() {
        let s = sample(&[0.0, 1.0, 2.0]);
        for c in [-0.5, 0.0, 2.0, 3.0] {
            assert!(matches!(
                solve_inner_lambda(&s, c),
                Err(EmphiError::CenterOutsideHull { .. })
            ));
        }
        let constant = sample(&[3.0, 3.0, 3.0]);
        assert_eq!(solve_inner_lambda(&constant, 3.0).unwrap(), 0.0);
        assert!(solve_inner_lambda(&constant, 3.1).is_err());
    }

    #[test]
    fn centers_near_the_hull_boundary() {
        let s = sample(&[0.0, 0.3, 1.1, 2.0, 5.0]);
        for c in [1e-9, 1e-6, 4.999_999, 5.0 - 1e-9] {
            let r = inner_root(s.values(), c).unwrap();
            let mass: f64 = s.values().iter().map(|x| 1.0 / (1.0 + r.lambda * (x - c))).sum();
            assert!((mass / 5.0 - 1.0).abs() < 1e-9, "center {c}: mass {mass}");
            assert!(s.values().iter().all(|x| 1.0 + r.lambda * (x - c) > 0.0));
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let s = sample(&[0.2, 0.9, 1.4, 2.6, 3.1, 4.0]);
        let c = 1.7;
        let h = 1e-6;
        let r = inner_root(s.values(), c).unwrap();
        let fd = (inner_root(s.values(), c + h).unwrap().lambda
            - inner_root(s.values(), c - h).unwrap().lambda)
            / (2.0 * h);
        assert!((r.slope - fd).abs() < 1e-6 * fd.abs());
        assert!(r.slope < 0.0);
    }
}
