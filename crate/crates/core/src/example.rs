//! Confidence intervals for the bundled Reid vapor pressure data.

use crate::error::Result;
use crate::inference::{invert_ci, IntervalEstimate};
use crate::samples::reid_vapor_pressure;
use crate::statistics::Statistic;

/// Intervals for the six power-divergence statistics and the z-test, in
/// that order.
pub fn reid_intervals(level: f64) -> Result<Vec<IntervalEstimate>> {
    let data = reid_vapor_pressure();
    Statistic::study_set()
        .iter()
        .map(|s| invert_ci(&data, s, level))
        .collect()
}
