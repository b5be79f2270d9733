//! Convex `phi` functions and increasing `h` transforms that index the
//! family of test statistics.

use std::fmt;
use std::sync::Arc;

use crate::error::{EmphiError, Result};

/// Distance to the poles `gamma = 0` and `gamma = -1` below which the
/// power family switches to its closed-form logarithmic limits.
pub const GAMMA_POLE_EPS: f64 = 1e-8;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A member of the `phi` family.
#[derive(Clone)]
pub enum PhiSpec {
    /// Cressie-Read power divergence
    /// `phi(x) = (x^(1+g) - x - g(x-1)) / (g(1+g))`.
    Power(f64),
    /// `phi(x) = x log x - x + 1`, the `gamma = 0` member.
    KullbackLeibler,
    /// User supplied convex `phi` with its exact second derivative at 1.
    Custom {
        phi: ScalarFn,
        second_derivative_at_one: f64,
    },
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Power(g) => write!(f, "Power({g})"),
            PhiSpec::KullbackLeibler => f.write_str("KullbackLeibler"),
            PhiSpec::Custom {
                second_derivative_at_one,
                ..
            } => write!(f, "Custom {{ phi''(1) = {second_derivative_at_one} }}"),
        }
    }
}

impl PartialEq for PhiSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PhiSpec::Power(a), PhiSpec::Power(b)) => a == b,
            (PhiSpec::KullbackLeibler, PhiSpec::KullbackLeibler) => true,
            (PhiSpec::Custom { phi: a, .. }, PhiSpec::Custom { phi: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl PhiSpec {
    /// Validates a custom `phi`: `phi(1) = 0`, `phi''(1) > 0` and midpoint
    /// convexity on a log-spaced grid over `(0, inf)`.
    pub fn custom(phi: ScalarFn, second_derivative_at_one: f64) -> Result<Self> {
        if !(second_derivative_at_one > 0.0 && second_derivative_at_one.is_finite()) {
            return Err(EmphiError::InvalidParameter(format!(
                "phi''(1) must be positive, got {second_derivative_at_one}"
            )));
        }
        if phi(1.0).abs() > 1e-12 {
            return Err(EmphiError::InvalidParameter(format!(
                "phi(1) must be 0, got {}",
                phi(1.0)
            )));
        }
        let grid: Vec<f64> = (0..=80).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 80.0)).collect();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = phi(0.5 * (a + b));
            let chord = 0.5 * (phi(a) + phi(b));
            if mid > chord + 1e-12 * (1.0 + chord.abs()) {
                return Err(EmphiError::InvalidParameter(format!(
                    "phi is not convex between {a} and {b}"
                )));
            }
        }
        Ok(PhiSpec::Custom {
            phi,
            second_derivative_at_one,
        })
    }

    /// `phi''(1)`; equal to 1 for every power-family member.
    pub fn second_derivative_at_one(&self) -> f64 {
        match self {
            PhiSpec::Power(_) | PhiSpec::KullbackLeibler => 1.0,
            PhiSpec::Custom {
                second_derivative_at_one,
                ..
            } => *second_derivative_at_one,
        }
    }

    /// Power index, with Kullback-Leibler reported as `gamma = 0`.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            PhiSpec::Power(g) => Some(*g),
            PhiSpec::KullbackLeibler => Some(0.0),
            PhiSpec::Custom { .. } => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(EmphiError::Domain(format!("phi evaluated at {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    /// `phi(x)` for `x > 0` without the domain check; used on solver output
    /// where positivity is an invariant.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            PhiSpec::Power(g) => power_phi(*g, x),
            PhiSpec::KullbackLeibler => power_phi(0.0, x),
            PhiSpec::Custom { phi, .. } => phi(x),
        }
    }
}

/// `phi_gamma(x)` written so that neither pole loses precision:
/// near `gamma = 0` the `x^gamma - 1` term goes through `expm1`, near
/// `gamma = -1` the `x^(1+gamma) - 1` term does.
pub fn power_phi(gamma: f64, x: f64) -> f64 {
    let lx = x.ln();
    if gamma.abs() < GAMMA_POLE_EPS {
        x * lx - x + 1.0
    } else if (gamma + 1.0).abs() < GAMMA_POLE_EPS {
        x - 1.0 - lx
    } else if gamma.abs() <= (gamma + 1.0).abs() {
        (x * (gamma * lx).exp_m1() - gamma * (x - 1.0)) / (gamma * (1.0 + gamma))
    } else {
        let e = 1.0 + gamma;
        ((e * lx).exp_m1() - e * (x - 1.0)) / (gamma * e)
    }
}

pub fn phi_eval(spec: &PhiSpec, x: f64) -> Result<f64> {
    spec.eval(x)
}

/// Increasing transform `h` of an (h, phi)-divergence.
#[derive(Clone)]
pub enum HSpec {
    /// `h(t) = log(a(a-1)t + 1) / (a(a-1))`, `a` not in {0, 1}.
    Renyi(f64),
    Identity,
    Custom { h: ScalarFn, derivative_at_zero: f64 },
}

impl fmt::Debug for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSpec::Renyi(a) => write!(f, "Renyi({a})"),
            HSpec::Identity => f.write_str("Identity"),
            HSpec::Custom {
                derivative_at_zero, ..
            } => write!(f, "Custom {{ h'(0) = {derivative_at_zero} }}"),
        }
    }
}

impl PartialEq for HSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (HSpec::Renyi(a), HSpec::Renyi(b)) => a == b,
            (HSpec::Identity, HSpec::Identity) => true,
            (HSpec::Custom { h: a, .. }, HSpec::Custom { h: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl HSpec {
    pub fn renyi(a: f64) -> Result<Self> {
        if a == 0.0 || a == 1.0 || !a.is_finite() {
            return Err(EmphiError::InvalidParameter(format!(
                "Renyi order must differ from 0 and 1, got {a}"
            )));
        }
        Ok(HSpec::Renyi(a))
    }

    /// Validates `h(0) = 0`, `h'(0) > 0` and monotonicity on a grid.
    pub fn custom(h: ScalarFn, derivative_at_zero: f64) -> Result<Self> {
        if !(derivative_at_zero > 0.0 && derivative_at_zero.is_finite()) {
            return Err(EmphiError::InvalidParameter(format!(
                "h'(0) must be positive, got {derivative_at_zero}"
            )));
        }
        if h(0.0) != 0.0 {
            return Err(EmphiError::InvalidParameter("h(0) must be 0".into()));
        }
        let mut prev = 0.0;
        for i in 1..=200 {
            let v = h(i as f64 * 0.25);
            if v <= prev {
                return Err(EmphiError::InvalidParameter(format!(
                    "h is not increasing near {}",
                    i as f64 * 0.25
                )));
            }
            prev = v;
        }
        Ok(HSpec::Custom {
            h,
            derivative_at_zero,
        })
    }

    pub fn derivative_at_zero(&self) -> f64 {
        match self {
            HSpec::Renyi(_) | HSpec::Identity => 1.0,
            HSpec::Custom {
                derivative_at_zero, ..
            } => *derivative_at_zero,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            HSpec::Identity => Ok(t),
            HSpec::Renyi(a) => {
                let c = a * (a - 1.0);
                let argument = c * t + 1.0;
                if !(argument > 0.0) {
                    return Err(EmphiError::RenyiDomain {
                        statistic: t,
                        argument,
                    });
                }
                Ok((c * t).ln_1p() / c)
            }
            HSpec::Custom { h, .. } => Ok(h(t)),
        }
    }
}

pub fn h_eval(spec: &HSpec, t: f64) -> Result<f64> {
    spec.eval(t)
}
