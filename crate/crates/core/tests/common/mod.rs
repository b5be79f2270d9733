//! Independent primal oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Maximizes `sum a_i log p_i` subject to `A p = b` by infeasible-start
/// Newton on the primal. Returns the maximizer.
///
/// `constraints` holds the rows of `A`. The Hessian of the objective is
/// diagonal, so each step solves a small system in the dual variables only.
pub fn primal_max_log(a: &[f64], constraints: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let k = constraints.len();
    let amat = DMatrix::from_fn(k, n, |i, j| constraints[i][j]);
    let bvec = DVector::from_column_slice(b);
    let total: f64 = a.iter().sum();
    let mut p = DVector::from_fn(n, |i, _| a[i] / total);
    let mut nu = DVector::<f64>::zeros(k);

    let residual = |p: &DVector<f64>, nu: &DVector<f64>| -> f64 {
        // dual residual: -a/p + A' nu, primal residual: A p - b
        let rd = DVector::from_fn(n, |i, _| -a[i] / p[i]) + amat.transpose() * nu;
        let rp = &amat * p - &bvec;
        (rd.norm_squared() + rp.norm_squared()).sqrt()
    };

    for _ in 0..500 {
        let r = residual(&p, &nu);
        if r < 1e-13 {
            return Some(p.iter().copied().collect());
        }
        let hinv = DVector::from_fn(n, |i, _| p[i] * p[i] / a[i]);
        let grad = DVector::from_fn(n, |i, _| -a[i] / p[i]);
        let rp = &amat * &p - &bvec;
        // A H^-1 A' nu_new = A H^-1 (-grad) ... solved for the full dual
        // variable: [H A'; A 0] [dp; nu_new] = [-grad; -rp]
        let ah = DMatrix::from_fn(k, n, |i, j| amat[(i, j)] * hinv[j]);
        let s = &ah * amat.transpose();
        let rhs = -(&ah * &grad) + rp;
        let nu_new = s.lu().solve(&rhs)?;
        let dp = DVector::from_fn(n, |i, _| -hinv[i] * (grad[i] + (amat.transpose() * &nu_new)[i]));
        let dnu = &nu_new - &nu;
        let mut t = 1.0;
        while (0..n).any(|i| p[i] + t * dp[i] <= 0.0) {
            t *= 0.5;
        }
        loop {
            let p_new = &p + &dp * t;
            let nu_try = &nu + &dnu * t;
            if residual(&p_new, &nu_try) <= (1.0 - 0.01 * t) * r || t < 1e-12 {
                p = p_new;
                nu = nu_try;
                break;
            }
            t *= 0.5;
        }
    }
    let r = residual(&p, &nu);
    (r < 1e-9).then(|| p.iter().copied().collect())
}

/// `max sum log p_i` over the simplex with `sum p_i x_i = center`.
pub fn one_sample_max(x: &[f64], center: f64) -> Option<f64> {
    let ones = vec![1.0; x.len()];
    let p = primal_max_log(&ones, &[ones.clone(), x.to_vec()], &[1.0, center])?;
    Some(p.iter().map(|v| v.ln()).sum())
}

/// `max sum log p_i + sum log q_j` under `H0: delta = delta0`, with the
/// common mean eliminated: `sum p x - sum q y = -delta0`.
pub fn two_sample_max(x: &[f64], y: &[f64], delta0: f64) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let (m, n) = (x.len(), y.len());
    let a = vec![1.0; m + n];
    let mass_x: Vec<f64> = (0..m + n).map(|i| if i < m { 1.0 } else { 0.0 }).collect();
    let mass_y: Vec<f64> = (0..m + n).map(|i| if i < m { 0.0 } else { 1.0 }).collect();
    let means: Vec<f64> = x.iter().copied().chain(y.iter().map(|v| -v)).collect();
    let w = primal_max_log(&a, &[mass_x, mass_y, means], &[1.0, 1.0, -delta0])?;
    let value = w.iter().map(|v| v.ln()).sum();
    Some((value, w[..m].to_vec(), w[m..].to_vec()))
}

/// Profile of the two-sample log likelihood over a grid of common means.
pub fn grid_profile_max(x: &[f64], y: &[f64], delta0: f64, points: usize) -> f64 {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min).max(y.iter().map(|v| v - delta0).fold(f64::INFINITY, f64::min));
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(y.iter().map(|v| v - delta0).fold(f64::NEG_INFINITY, f64::max));
    let ys: Vec<f64> = y.iter().map(|v| v - delta0).collect();
    (1..points)
        .filter_map(|i| {
            let mu = lo + (hi - lo) * i as f64 / points as f64;
            Some(one_sample_max(x, mu)? + one_sample_max(&ys, mu)?)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Small deterministic generator for test data (SplitMix64 + Box-Muller).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normals(&mut self, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        (0..n).map(|_| mean + sd * self.normal()).collect()
    }
}
