//! Monte Carlo estimates of coverage, interval width and power.
//!
//! Replication `r` draws its data from stream `r` of a ChaCha generator
//! keyed by the scenario seed, so every estimate is a deterministic
//! function of the scenario, the statistics and `R`, whether replications
//! run sequentially or on the rayon pool.

mod exec;
mod population;

pub use exec::Execution;
pub use population::{replication_rng, sample_population, Marginal, Population};

use crate::error::{EmphiError, Result};
use crate::inference::{invert_ci_with, InversionOptions};
use crate::samples::{Sample, TwoSampleData};
use crate::special::chi2_upper_quantile;
use crate::statistics::{evaluate_many, Statistic};

use population::standard_normals;

/// Smallest replication count accepted by the estimators.
pub const MIN_REPLICATIONS: usize = 100;

/// One simulation design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub population: Population,
    pub m: usize,
    pub n: usize,
    /// Null value tested in power curves; coverage is always evaluated at
    /// the true difference.
    pub delta0: f64,
    pub level: f64,
    pub seed: u64,
}

impl Scenario {
    /// `X ~ N(1, 1.5)`, `Y ~ N(1, 1.5)`.
    pub fn normal_case(m: usize, n: usize, seed: u64) -> Self {
        Self {
            population: Population::Normal {
                mu: 1.0,
                var1: 1.5,
                var2: 1.5,
                delta: 0.0,
            },
            m,
            n,
            delta0: 0.0,
            level: 0.95,
            seed,
        }
    }

    /// `X ~ lognormal(1.1, 0.4)`, `Y ~ lognormal(1.2, 0.2)`; equal means.
    pub fn lognormal_case(m: usize, n: usize, seed: u64) -> Self {
        Self {
            population: Population::LogNormal {
                vartheta1: 1.1,
                theta1: 0.4,
                vartheta2: 1.2,
                theta2: 0.2,
            },
            m,
            n,
            delta0: 0.0,
            level: 0.95,
            seed,
        }
    }

    /// The six `(m, n)` designs of the simulation study.
    pub const DESIGNS: [(usize, usize); 6] = [(15, 30), (30, 15), (30, 30), (30, 60), (60, 30), (60, 60)];

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(EmphiError::InvalidParameter(format!(
                "sample sizes ({}, {}) must be at least 2",
                self.m, self.n
            )));
        }
        if !(self.level > 0.5 && self.level < 1.0) {
            return Err(EmphiError::InvalidParameter(format!("level {} outside (0.5, 1)", self.level)));
        }
        self.population.validate()
    }

    /// Data of replication `rep`.
    pub fn draw(&self, rep: usize) -> Result<TwoSampleData> {
        draw_with(&self.population, self.m, self.n, self.seed, rep)
    }
}

fn draw_with(population: &Population, m: usize, n: usize, seed: u64, rep: usize) -> Result<TwoSampleData> {
    let mut rng = replication_rng(seed, rep as u64);
    let zx = standard_normals(&mut rng, m);
    let zy = standard_normals(&mut rng, n);
    let (fx, fy) = (population.x_marginal(), population.y_marginal());
    let x = Sample::new(zx.into_iter().map(|z| fx.transform(z)).collect())?;
    let y = Sample::new(zy.into_iter().map(|z| fy.transform(z)).collect())?;
    TwoSampleData::new(x, y)
}

/// Estimate for one statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct StatEstimate {
    pub kind: Statistic,
    /// Coverage in percent, mean interval width, or rejection rate.
    pub estimate: f64,
    pub stderr: f64,
    /// Replications that entered the estimate.
    pub replications_used: usize,
    /// Replications lost to solver or inversion failures.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scenario: Scenario,
    pub replications: usize,
    pub rows: Vec<StatEstimate>,
}

impl SimResult {
    pub fn get(&self, kind: &Statistic) -> Option<&StatEstimate> {
        self.rows.iter().find(|r| &r.kind == kind)
    }
}

fn check_replications(r: usize) -> Result<()> {
    if r < MIN_REPLICATIONS {
        return Err(EmphiError::InvalidParameter(format!(
            "R = {r}; at least {MIN_REPLICATIONS} replications are required"
        )));
    }
    Ok(())
}

/// At most 0.1% of the replications may fail.
fn check_failures(failures: usize, replications: usize) -> Result<()> {
    let allowed = replications / 1000;
    if failures > allowed {
        return Err(EmphiError::ExcessiveFailures {
            failures,
            replications,
            allowed,
        });
    }
    Ok(())
}

/// Sum by recursive halving, which keeps rounding error logarithmic in the
/// length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Clone, Copy, PartialEq)]
enum Outcome {
    Accept,
    Reject,
    Failed,
}

fn classify(results: Vec<Result<crate::statistics::TestOutcome>>, threshold: f64) -> Vec<Outcome> {
    results
        .into_iter()
        .map(|r| match r {
            Ok(t) if t.statistic <= threshold => Outcome::Accept,
            Ok(_) => Outcome::Reject,
            Err(e) if e.is_infeasible() || matches!(e, EmphiError::RenyiDomain { .. }) => Outcome::Reject,
            Err(_) => Outcome::Failed,
        })
        .collect()
}

fn proportion_rows(
    stats: &[Statistic],
    outcomes: &[Vec<Outcome>],
    target: Outcome,
    scale: f64,
) -> Result<Vec<StatEstimate>> {
    let r = outcomes.len();
    stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let failures = outcomes.iter().filter(|o| o[i] == Outcome::Failed).count();
            check_failures(failures, r)?;
            // failures count as non-coverage and as non-rejection
            let hits = outcomes.iter().filter(|o| o[i] == target).count();
            let p = hits as f64 / r as f64;
            Ok(StatEstimate {
                kind: s.clone(),
                estimate: scale * p,
                stderr: scale * (p * (1.0 - p) / r as f64).sqrt(),
                replications_used: r,
                failures,
            })
        })
        .collect()
}

/// Coverage `100 (1/R) sum I(T_r <= chi2_{1, 1-level})`, with each
/// statistic evaluated at the true difference.
pub fn simulate_coverage(sc: &Scenario, stats: &[Statistic], r: usize) -> Result<SimResult> {
    simulate_coverage_with(sc, stats, r, Execution::default())
}

pub fn simulate_coverage_with(sc: &Scenario, stats: &[Statistic], r: usize, exec: Execution) -> Result<SimResult> {
    sc.validate()?;
    check_replications(r)?;
    let threshold = chi2_upper_quantile(1.0 - sc.level, 1)?;
    let delta = sc.population.true_delta();
    let outcomes = exec.map(r, |rep| -> Result<Vec<Outcome>> {
        let data = sc.draw(rep)?;
        Ok(classify(evaluate_many(stats, &data, delta), threshold))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        scenario: *sc,
        replications: r,
        rows: proportion_rows(stats, &outcomes, Outcome::Accept, 100.0)?,
    })
}

/// Mean width of the inverted intervals. Replications whose inversion
/// fails are counted and left out of the mean.
pub fn simulate_width(sc: &Scenario, stats: &[Statistic], r: usize) -> Result<SimResult> {
    simulate_width_with(sc, stats, r, Execution::default())
}

pub fn simulate_width_with(sc: &Scenario, stats: &[Statistic], r: usize, exec: Execution) -> Result<SimResult> {
    sc.validate()?;
    check_replications(r)?;
    let options = InversionOptions {
        tol_delta: None,
        interior_scan: false,
    };
    let widths = exec.map(r, |rep| -> Result<Vec<Option<f64>>> {
        let data = sc.draw(rep)?;
        Ok(stats
            .iter()
            .map(|s| invert_ci_with(&data, s, sc.level, &options).ok().map(|ci| ci.width()))
            .collect())
    });
    let widths = widths.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ok: Vec<f64> = widths.iter().filter_map(|w| w[i]).collect();
            let failures = r - ok.len();
            check_failures(failures, r)?;
            let k = ok.len() as f64;
            let mean = pairwise_sum(&ok) / k;
            let dev: Vec<f64> = ok.iter().map(|w| (w - mean) * (w - mean)).collect();
            let var = pairwise_sum(&dev) / (k - 1.0);
            Ok(StatEstimate {
                kind: s.clone(),
                estimate: mean,
                stderr: (var / k).sqrt(),
                replications_used: ok.len(),
                failures,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        scenario: *sc,
        replications: r,
        rows,
    })
}

/// Rejection rate of `H0: delta = sc.delta0` at one true difference.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPoint {
    pub delta: f64,
    pub kind: Statistic,
    /// Fraction of rejections at level `1 - sc.level`.
    pub rejection_rate: f64,
    pub stderr: f64,
    pub failures: usize,
}

/// Power of each statistic at every true difference in `delta_grid`.
///
/// Replication `r` reuses the same standard normal draws at every grid
/// point, which smooths the curves.
pub fn power_curve(sc: &Scenario, stats: &[Statistic], delta_grid: &[f64], r: usize) -> Result<Vec<PowerPoint>> {
    power_curve_with(sc, stats, delta_grid, r, Execution::default())
}

pub fn power_curve_with(
    sc: &Scenario,
    stats: &[Statistic],
    delta_grid: &[f64],
    r: usize,
    exec: Execution,
) -> Result<Vec<PowerPoint>> {
    sc.validate()?;
    check_replications(r)?;
    let threshold = chi2_upper_quantile(1.0 - sc.level, 1)?;
    let mut points = Vec::with_capacity(delta_grid.len() * stats.len());
    for &delta in delta_grid {
        let population = sc.population.displaced(delta)?;
        let outcomes = exec.map(r, |rep| -> Result<Vec<Outcome>> {
            let data = draw_with(&population, sc.m, sc.n, sc.seed, rep)?;
            Ok(classify(evaluate_many(stats, &data, sc.delta0), threshold))
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        for row in proportion_rows(stats, &outcomes, Outcome::Reject, 1.0)? {
            points.push(PowerPoint {
                delta,
                kind: row.kind,
                rejection_rate: row.estimate,
                stderr: row.stderr,
                failures: row.failures,
            });
        }
    }
    Ok(points)
}
