//! Test statistics for `H0: delta = delta0`.
//!
//! All empirical statistics are functions of the denominators
//! `u_i = 1 / (m p_i)` and `v_j = 1 / (n q_j)` of a solved fit. Each is
//! asymptotically chi-square with `k` degrees of freedom under `H0`.

use std::fmt;
use std::str::FromStr;

use crate::divergence::{PhiSpec, GAMMA_POLE_EPS};
use crate::divergence::HSpec;
use crate::el_solver::{self, MultiplierFit, WeightedFit};
use crate::error::{EmphiError, Result};
use crate::samples::TwoSampleData;
use crate::special::chi2_sf;

/// A test statistic for the difference of means.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    /// Power-divergence statistic `T_gamma`, evaluated by its closed forms.
    PowerGamma(f64),
    /// Empirical phi-divergence statistic `T_phi`.
    Phi(PhiSpec),
    /// Empirical log-likelihood ratio.
    LogLik,
    /// Square of the two-sample z statistic.
    ZTest,
    /// Weighted phi-divergence statistic, calibrated to chi-square(1).
    Weighted(PhiSpec),
    /// `h(T_phi) / h'(0)`.
    HPhi { phi: PhiSpec, h: HSpec },
}

impl Statistic {
    /// Renyi statistic of order `a`, paired with the power divergence
    /// `gamma = a - 1`.
    pub fn renyi(a: f64) -> Result<Self> {
        Ok(Statistic::HPhi {
            phi: PhiSpec::Power(a - 1.0),
            h: HSpec::renyi(a)?,
        })
    }

    /// The six power-divergence statistics followed by the z-test.
    pub fn study_set() -> Vec<Statistic> {
        crate::STUDY_GAMMAS
            .iter()
            .map(|g| Statistic::PowerGamma(*g))
            .chain(std::iter::once(Statistic::ZTest))
            .collect()
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    fn needs_fit(&self) -> bool {
        matches!(
            self,
            Statistic::PowerGamma(_) | Statistic::Phi(_) | Statistic::LogLik | Statistic::HPhi { .. }
        )
    }

    /// Evaluates the statistic at `delta0` for univariate data.
    pub fn evaluate(&self, data: &TwoSampleData, delta0: f64) -> Result<TestOutcome> {
        self.evaluate_at(data, &[delta0])
    }

    /// Evaluates the statistic at a `k`-vector `delta0`. Only the
    /// phi-divergence statistics are defined for `k > 1`.
    pub fn evaluate_at(&self, data: &TwoSampleData, delta0: &[f64]) -> Result<TestOutcome> {
        let mut cache = FitCache::default();
        self.evaluate_cached(data, delta0, &mut cache)
    }

    fn evaluate_cached(&self, data: &TwoSampleData, delta0: &[f64], cache: &mut FitCache) -> Result<TestOutcome> {
        match self {
            Statistic::ZTest => {
                scalar_delta(data, delta0)?;
                z_test(data, delta0[0])
            }
            Statistic::Weighted(spec) => {
                let d0 = scalar_delta(data, delta0)?;
                let wfit = cache.weighted(data, d0)?;
                s_phi_weighted(wfit, spec, data)
            }
            _ => {
                let fit = cache.h0(data, delta0)?;
                match self {
                    Statistic::PowerGamma(g) => Ok(t_gamma_from_fit(fit, *g)),
                    Statistic::Phi(spec) => t_phi(fit, spec, data),
                    Statistic::LogLik => Ok(ell(fit)),
                    Statistic::HPhi { phi, h } => t_h_phi(&t_phi(fit, phi, data)?, h),
                    Statistic::ZTest | Statistic::Weighted(_) => unreachable!(),
                }
            }
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn phi_label(spec: &PhiSpec) -> String {
            match spec {
                PhiSpec::Power(g) => format!("gamma={}", fmt_param(*g)),
                PhiSpec::KullbackLeibler => "kl".into(),
                PhiSpec::Custom { .. } => "custom".into(),
            }
        }
        match self {
            Statistic::PowerGamma(g) => write!(f, "gamma={}", fmt_param(*g)),
            Statistic::Phi(spec) => write!(f, "phi({})", phi_label(spec)),
            Statistic::LogLik => f.write_str("loglik"),
            Statistic::ZTest => f.write_str("z"),
            Statistic::Weighted(spec) => write!(f, "weighted({})", phi_label(spec)),
            Statistic::HPhi { phi, h } => match h {
                HSpec::Renyi(a) => write!(f, "renyi(a={};{})", fmt_param(*a), phi_label(phi)),
                HSpec::Identity => write!(f, "h=id({})", phi_label(phi)),
                HSpec::Custom { .. } => write!(f, "h=custom({})", phi_label(phi)),
            },
        }
    }
}

fn fmt_param(v: f64) -> String {
    if (v - 2.0 / 3.0).abs() < 1e-12 {
        "2/3".into()
    } else {
        format!("{v}")
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (parse_real(a)?, parse_real(b)?);
        return Ok(a / b);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| EmphiError::InvalidParameter(format!("cannot parse {s:?} as a number")))
}

/// Accepts `gamma:<g>`, `z`, `loglik`, `kl`, `weighted`, `weighted:<g>`,
/// `renyi:<a>`; numbers may be written as fractions such as `2/3`.
impl FromStr for Statistic {
    type Err = EmphiError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s.as_str(), None),
        };
        match (name, arg) {
            ("gamma", Some(g)) => Ok(Statistic::PowerGamma(parse_real(g)?)),
            ("z" | "t" | "ztest", None) => Ok(Statistic::ZTest),
            ("loglik" | "ell", None) => Ok(Statistic::LogLik),
            ("kl", None) => Ok(Statistic::Phi(PhiSpec::KullbackLeibler)),
            ("weighted", None) => Ok(Statistic::Weighted(PhiSpec::KullbackLeibler)),
            ("weighted", Some(g)) => Ok(Statistic::Weighted(PhiSpec::Power(parse_real(g)?))),
            ("renyi", Some(a)) => Statistic::renyi(parse_real(a)?),
            _ => Err(EmphiError::InvalidParameter(format!("unknown statistic {s:?}"))),
        }
    }
}

fn scalar_delta(data: &TwoSampleData, delta0: &[f64]) -> Result<f64> {
    data.require_univariate()?;
    match delta0 {
        [d] => Ok(*d),
        _ => Err(EmphiError::DimensionMismatch {
            expected: 1,
            found: delta0.len(),
        }),
    }
}

#[derive(Default)]
struct FitCache {
    h0: Option<MultiplierFit>,
    weighted: Option<WeightedFit>,
}

impl FitCache {
    fn h0(&mut self, data: &TwoSampleData, delta0: &[f64]) -> Result<&MultiplierFit> {
        if self.h0.is_none() {
            self.h0 = Some(fit_h0(data, delta0)?);
        }
        Ok(self.h0.as_ref().unwrap())
    }

    fn weighted(&mut self, data: &TwoSampleData, delta0: f64) -> Result<&WeightedFit> {
        if self.weighted.is_none() {
            self.weighted = Some(el_solver::solve_weighted(data, delta0)?);
        }
        Ok(self.weighted.as_ref().unwrap())
    }
}

/// Solves the null system, dispatching on the data dimension.
pub fn fit_h0(data: &TwoSampleData, delta0: &[f64]) -> Result<MultiplierFit> {
    if delta0.len() != data.dim() {
        return Err(EmphiError::DimensionMismatch {
            expected: data.dim(),
            found: delta0.len(),
        });
    }
    if data.dim() == 1 {
        el_solver::solve_h0_system(data, delta0[0])
    } else {
        el_solver::solve_h0_system_multivariate(data, delta0)
    }
}

/// Evaluates several statistics at one `delta0`, sharing the solved fits.
/// Each entry fails independently.
pub fn evaluate_many(stats: &[Statistic], data: &TwoSampleData, delta0: f64) -> Vec<Result<TestOutcome>> {
    let mut cache = FitCache::default();
    let mut h0_error: Option<EmphiError> = None;
    stats
        .iter()
        .map(|s| {
            if s.needs_fit() {
                if let Some(e) = &h0_error {
                    return Err(clone_error(e));
                }
                let r = s.evaluate_cached(data, &[delta0], &mut cache);
                if cache.h0.is_none() {
                    if let Err(e) = &r {
                        h0_error = Some(clone_error(e));
                    }
                }
                r
            } else {
                s.evaluate_cached(data, &[delta0], &mut cache)
            }
        })
        .collect()
}

fn clone_error(e: &EmphiError) -> EmphiError {
    match e {
        EmphiError::InfeasibleDelta { delta0 } => EmphiError::InfeasibleDelta { delta0: *delta0 },
        EmphiError::CenterOutsideHull { center } => EmphiError::CenterOutsideHull { center: *center },
        EmphiError::SolverDiverged { iterations, residual } => EmphiError::SolverDiverged {
            iterations: *iterations,
            residual: *residual,
        },
        EmphiError::DegenerateSystem(s) => EmphiError::DegenerateSystem(s),
        other => EmphiError::Domain(other.to_string()),
    }
}

/// Result of a test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub df: usize,
    /// Upper chi-square tail probability of `statistic`.
    pub p_value: f64,
    pub kind: Statistic,
}

impl TestOutcome {
    fn new(statistic: f64, df: usize, kind: Statistic) -> Self {
        // rounding can leave tiny negatives near the point estimate
        let statistic = statistic.max(0.0);
        Self {
            statistic,
            df,
            p_value: chi2_sf(statistic, df),
            kind,
        }
    }
}

fn all_denominators(fit: &MultiplierFit) -> impl Iterator<Item = &f64> {
    fit.x_denominators.iter().chain(&fit.y_denominators)
}

/// `T_phi = (2 / phi''(1)) (sum m p_i phi(1/(m p_i)) + sum n q_j phi(1/(n q_j)))`.
pub fn t_phi(fit: &MultiplierFit, spec: &PhiSpec, data: &TwoSampleData) -> Result<TestOutcome> {
    debug_assert_eq!(fit.p_weights.len(), data.m());
    let sum: f64 = all_denominators(fit).map(|u| spec.eval_unchecked(*u) / u).sum();
    let value = 2.0 / spec.second_derivative_at_one() * sum;
    if !value.is_finite() {
        return Err(EmphiError::Domain(format!("phi-divergence statistic is {value}")));
    }
    Ok(TestOutcome::new(value, fit.lambda1.len(), Statistic::Phi(spec.clone())))
}

/// Empirical log-likelihood ratio
/// `2 (sum log(1 + l1 (x_i - mu)) + sum log(1 + l2 (y_j - mu - delta0)))`.
pub fn ell(fit: &MultiplierFit) -> TestOutcome {
    let value = 2.0 * all_denominators(fit).map(|u| u.ln()).sum::<f64>();
    TestOutcome::new(value, fit.lambda1.len(), Statistic::LogLik)
}

/// Power-divergence statistic at `delta0` by its closed forms.
pub fn t_gamma(data: &TwoSampleData, delta0: f64, gamma: f64) -> Result<TestOutcome> {
    let fit = el_solver::solve_h0_system(data, delta0)?;
    Ok(t_gamma_from_fit(&fit, gamma))
}

/// `2 / (g (g + 1)) (sum (m p_i)^-g + sum (n q_j)^-g - N)`, with the
/// limits `2 sum log(1/(m p_i)) + ...` at `g = 0` and
/// `2 (sum m p_i log(m p_i) + ...)` at `g = -1`.
pub fn t_gamma_from_fit(fit: &MultiplierFit, gamma: f64) -> TestOutcome {
    let value = if gamma.abs() < GAMMA_POLE_EPS {
        2.0 * all_denominators(fit).map(|u| u.ln()).sum::<f64>()
    } else if (gamma + 1.0).abs() < GAMMA_POLE_EPS {
        -2.0 * all_denominators(fit).map(|u| u.ln() / u).sum::<f64>()
    } else {
        let s: f64 = all_denominators(fit).map(|u| (gamma * u.ln()).exp_m1()).sum();
        2.0 / (gamma * (gamma + 1.0)) * s
    };
    TestOutcome::new(value, fit.lambda1.len(), Statistic::PowerGamma(gamma))
}

/// `S1^2 / m + S2^2 / n`.
pub fn contrast_variance(data: &TwoSampleData) -> f64 {
    let (m, n) = (data.m() as f64, data.n() as f64);
    data.x.covariance()[0] / m + data.y.covariance()[0] / n
}

/// `(Xbar - Ybar + delta0)^2 / (S1^2/m + S2^2/n)`.
pub fn z_test(data: &TwoSampleData, delta0: f64) -> Result<TestOutcome> {
    data.require_univariate()?;
    let v = contrast_variance(data);
    if !(v > 0.0) {
        return Err(EmphiError::ZeroVariance);
    }
    let diff = data.x.mean()[0] - data.y.mean()[0] + delta0;
    Ok(TestOutcome::new(diff * diff / v, 1, Statistic::ZTest))
}

/// Uncalibrated weighted statistic
/// `(2 / phi''(1)) (sum (w1/m) phi(u_i)/u_i + sum (w2/n) phi(v_j)/v_j)`.
pub fn s_phi_raw(wfit: &WeightedFit, spec: &PhiSpec) -> f64 {
    let (m, n) = (wfit.x_denominators.len() as f64, wfit.y_denominators.len() as f64);
    let term = |u: &f64| spec.eval_unchecked(*u) / u;
    let sx: f64 = wfit.x_denominators.iter().map(term).sum();
    let sy: f64 = wfit.y_denominators.iter().map(term).sum();
    2.0 / spec.second_derivative_at_one() * (wfit.omega1 / m * sx + wfit.omega2() / n * sy)
}

/// Weighted statistic `S_phi / (c (S1^2/m + S2^2/n))`.
///
/// Near the null `S_phi` behaves like `c (Ybar - Xbar - delta0)^2`, so the
/// extra variance factor is what makes the ratio chi-square(1).
pub fn s_phi_weighted(wfit: &WeightedFit, spec: &PhiSpec, data: &TwoSampleData) -> Result<TestOutcome> {
    if !(wfit.c > 0.0) {
        return Err(EmphiError::DegenerateSystem("non-positive scaling constant"));
    }
    let v = contrast_variance(data);
    if !(v > 0.0) {
        return Err(EmphiError::ZeroVariance);
    }
    let value = s_phi_raw(wfit, spec) / (wfit.c * v);
    Ok(TestOutcome::new(value, 1, Statistic::Weighted(spec.clone())))
}

/// `h(T_phi) / h'(0)`.
pub fn t_h_phi(base: &TestOutcome, hspec: &HSpec) -> Result<TestOutcome> {
    let value = hspec.eval(base.statistic)? / hspec.derivative_at_zero();
    let phi = match &base.kind {
        Statistic::Phi(spec) => spec.clone(),
        Statistic::PowerGamma(g) => PhiSpec::Power(*g),
        Statistic::LogLik => PhiSpec::KullbackLeibler,
        other => {
            return Err(EmphiError::InvalidParameter(format!(
                "h transform needs a phi-divergence statistic, got {other}"
            )))
        }
    };
    Ok(TestOutcome::new(
        value,
        base.df,
        Statistic::HPhi {
            phi,
            h: hspec.clone(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::reid_vapor_pressure;

    #[test]
    fn closed_forms_match_phi_sums() {
        let data = reid_vapor_pressure();
        let fit = el_solver::solve_h0_system(&data, 0.3).unwrap();
        for g in crate::STUDY_GAMMAS {
            let a = t_gamma_from_fit(&fit, g).statistic;
            let b = t_phi(&fit, &PhiSpec::Power(g), &data).unwrap().statistic;
            assert!((a - b).abs() <= 1e-9 * b, "gamma {g}: {a} vs {b}");
        }
        let kl = t_phi(&fit, &PhiSpec::KullbackLeibler, &data).unwrap().statistic;
        assert!((ell(&fit).statistic - kl).abs() <= 1e-10 * kl);
    }

    #[test]
    fn gamma_branches_are_continuous() {
        let data = reid_vapor_pressure();
        let fit = el_solver::solve_h0_system(&data, 0.4).unwrap();
        let fit2 = el_solver::solve_h0_system(&data, 0.2).unwrap();
        for f in [&fit, &fit2] {
            let at0 = t_gamma_from_fit(f, 0.0).statistic;
            assert!((t_gamma_from_fit(f, 1e-6).statistic - at0).abs() < 1e-5 * at0.max(1.0));
            let atm1 = t_gamma_from_fit(f, -1.0).statistic;
            assert!((t_gamma_from_fit(f, -1.0 + 1e-6).statistic - atm1).abs() < 1e-5 * atm1.max(1.0));
        }
    }

    #[test]
    fn z_statistic_arithmetic() {
        let data = TwoSampleData::univariate(vec![0.0, 2.0], vec![5.0, 7.0]).unwrap();
        assert_eq!(z_test(&data, 5.0).unwrap().statistic, 0.0);
        let same = TwoSampleData::univariate(vec![1.0, 1.0], vec![3.0, 3.0]).unwrap();
        assert!(matches!(z_test(&same, 0.0), Err(EmphiError::ZeroVariance)));
    }

    #[test]
    fn weighted_kl_is_weighted_log_likelihood() {
        let data = reid_vapor_pressure();
        let wfit = el_solver::solve_weighted(&data, 0.3).unwrap();
        let raw = s_phi_raw(&wfit, &PhiSpec::KullbackLeibler);
        let (m, n) = (data.m() as f64, data.n() as f64);
        let direct = -2.0
            * (0.5 / m * wfit.p_weights.iter().map(|p| (m * p).ln()).sum::<f64>()
                + 0.5 / n * wfit.q_weights.iter().map(|q| (n * q).ln()).sum::<f64>());
        assert!((raw - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["gamma:-1", "gamma:2/3", "z", "loglik", "kl", "weighted", "weighted:1", "renyi:2"] {
            let stat: Statistic = s.parse().unwrap();
            assert!(!stat.label().is_empty());
        }
        assert_eq!("gamma:2/3".parse::<Statistic>().unwrap(), Statistic::PowerGamma(2.0 / 3.0));
        assert!("renyi:1".parse::<Statistic>().is_err());
        assert!("pearson".parse::<Statistic>().is_err());
    }

    #[test]
    fn renyi_small_order_tends_to_the_base() {
        let data = reid_vapor_pressure();
        let fit = el_solver::solve_h0_system(&data, 0.4).unwrap();
        let base = t_phi(&fit, &PhiSpec::Power(0.0), &data).unwrap();
        let r = t_h_phi(&base, &HSpec::renyi(1e-6).unwrap()).unwrap();
        assert!((r.statistic - base.statistic).abs() <= 1e-5 * base.statistic);
    }
}
