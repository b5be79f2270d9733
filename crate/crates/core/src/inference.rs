//! Confidence intervals for `delta` by inverting a test statistic.

use crate::error::{EmphiError, Result};
use crate::samples::TwoSampleData;
use crate::special::{chi2_upper_quantile, normal_quantile};
use crate::statistics::{contrast_variance, Statistic};

const MAX_EXPANSIONS: usize = 64;
const SCAN_POINTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Chi-square critical value the statistic is compared against.
    pub threshold: f64,
    /// Statistic evaluations spent on the search.
    pub evaluations: usize,
    pub kind: Statistic,
    /// Set when the interior scan found a point above the threshold.
    pub interior_crossing: bool,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.lower <= delta && delta <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Bisection stops once the bracket is narrower than this; defaults to
    /// `1e-4` times the pooled sample range.
    pub tol_delta: Option<f64>,
    /// Re-evaluates the statistic on a grid inside the interval.
    pub interior_scan: bool,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            tol_delta: None,
            interior_scan: true,
        }
    }
}

/// Default bisection tolerance for `data`.
pub fn default_tolerance(data: &TwoSampleData) -> f64 {
    1e-4 * data.combined_range()
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.5 && level < 1.0) {
        return Err(EmphiError::InvalidParameter(format!("level {level} outside (0.5, 1)")));
    }
    Ok(())
}

/// `{delta : T(delta) <= chi2_{1, 1 - level}}` by bisection outward from
/// `Ybar - Xbar`.
pub fn invert_ci(data: &TwoSampleData, stat: &Statistic, level: f64) -> Result<IntervalEstimate> {
    invert_ci_with(data, stat, level, &InversionOptions::default())
}

pub fn invert_ci_with(
    data: &TwoSampleData,
    stat: &Statistic,
    level: f64,
    options: &InversionOptions,
) -> Result<IntervalEstimate> {
    data.require_univariate()?;
    check_level(level)?;
    let threshold = chi2_upper_quantile(1.0 - level, 1)?;
    let tol = options.tol_delta.unwrap_or_else(|| default_tolerance(data));
    if !(tol > 0.0) {
        return Err(EmphiError::InvalidParameter(format!("bisection tolerance {tol}")));
    }
    let mut evaluations = 0;
    let mut value = |delta: f64| -> Result<f64> {
        evaluations += 1;
        match stat.evaluate(data, delta) {
            Ok(t) => Ok(t.statistic),
            // the likelihood is zero there: reject
            Err(e) if e.is_infeasible() || matches!(e, EmphiError::RenyiDomain { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let center = data.delta_hat()[0];
    let at_center = value(center)?;
    if !(at_center <= threshold) {
        return Err(EmphiError::InversionFailed {
            statistic: at_center,
            threshold,
        });
    }
    let spread = contrast_variance(data).sqrt();
    let step0 = if spread > 0.0 { spread } else { data.combined_range().max(tol) };

    let mut ends = [0.0; 2];
    for (end, sign) in ends.iter_mut().zip([-1.0, 1.0]) {
        let mut inside = center;
        let mut step = step0;
        let mut outside = None;
        for _ in 0..MAX_EXPANSIONS {
            let trial = center + sign * step;
            if value(trial)? > threshold {
                outside = Some(trial);
                break;
            }
            inside = trial;
            step *= 2.0;
        }
        let mut outside = outside.ok_or(EmphiError::InversionFailed {
            statistic: at_center,
            threshold,
        })?;
        while (outside - inside).abs() > tol {
            let mid = 0.5 * (inside + outside);
            if value(mid)? > threshold {
                outside = mid;
            } else {
                inside = mid;
            }
        }
        *end = 0.5 * (inside + outside);
    }

    let [lower, upper] = ends;
    let mut interior_crossing = false;
    if options.interior_scan {
        for i in 1..SCAN_POINTS {
            let d = lower + (upper - lower) * i as f64 / SCAN_POINTS as f64;
            if value(d)? > threshold {
                interior_crossing = true;
                log::warn!("{stat}: statistic exceeds the threshold at {d} inside ({lower}, {upper})");
                break;
            }
        }
    }
    Ok(IntervalEstimate {
        lower,
        upper,
        level,
        threshold,
        evaluations,
        kind: stat.clone(),
        interior_crossing,
    })
}

/// `Ybar - Xbar -/+ z_{(1 - level)/2} sqrt(S1^2/m + S2^2/n)`.
pub fn ci_closed_form_z(data: &TwoSampleData, level: f64) -> Result<IntervalEstimate> {
    data.require_univariate()?;
    check_level(level)?;
    let z = normal_quantile(0.5 + 0.5 * level)?;
    let half = z * contrast_variance(data).sqrt();
    let center = data.delta_hat()[0];
    Ok(IntervalEstimate {
        lower: center - half,
        upper: center + half,
        level,
        threshold: z * z,
        evaluations: 0,
        kind: Statistic::ZTest,
        interior_crossing: false,
    })
}
