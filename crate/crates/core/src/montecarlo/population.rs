use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{EmphiError, Result};
use crate::samples::Sample;

/// A univariate distribution, drawn as a transform of a standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Normal { mean: f64, variance: f64 },
    /// `exp(Z)` with `Z ~ N(vartheta, theta)`; `theta` is a variance.
    LogNormal { vartheta: f64, theta: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mean, variance } => mean.is_finite() && variance > 0.0 && variance.is_finite(),
            Marginal::LogNormal { vartheta, theta } => vartheta.is_finite() && theta > 0.0 && theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(EmphiError::InvalidParameter(format!("invalid population {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Normal { mean, .. } => mean,
            Marginal::LogNormal { vartheta, theta } => (vartheta + 0.5 * theta).exp(),
        }
    }

    #[inline]
    pub fn transform(&self, z: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, variance } => mean + variance.sqrt() * z,
            Marginal::LogNormal { vartheta, theta } => (vartheta + theta.sqrt() * z).exp(),
        }
    }
}

/// Independent draws from `dist`.
pub fn sample_population<R: Rng + ?Sized>(dist: &Marginal, size: usize, rng: &mut R) -> Result<Sample> {
    dist.validate()?;
    let values = standard_normals(rng, size).into_iter().map(|z| dist.transform(z)).collect();
    Sample::new(values)
}

pub(crate) fn standard_normals<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Vec<f64> {
    (0..size).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Generator for replication `rep`: stream `rep` of the ChaCha key derived
/// from `seed`, so draws do not depend on scheduling.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// The two populations of a simulation design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Population {
    /// `X ~ N(mu, var1)`, `Y ~ N(mu + delta, var2)`.
    Normal { mu: f64, var1: f64, var2: f64, delta: f64 },
    /// `X ~ lognormal(vartheta1, theta1)`, `Y ~ lognormal(vartheta2, theta2)`.
    LogNormal {
        vartheta1: f64,
        theta1: f64,
        vartheta2: f64,
        theta2: f64,
    },
}

impl Population {
    pub fn x_marginal(&self) -> Marginal {
        match *self {
            Population::Normal { mu, var1, .. } => Marginal::Normal { mean: mu, variance: var1 },
            Population::LogNormal { vartheta1, theta1, .. } => Marginal::LogNormal {
                vartheta: vartheta1,
                theta: theta1,
            },
        }
    }

    pub fn y_marginal(&self) -> Marginal {
        match *self {
            Population::Normal { mu, var2, delta, .. } => Marginal::Normal {
                mean: mu + delta,
                variance: var2,
            },
            Population::LogNormal { vartheta2, theta2, .. } => Marginal::LogNormal {
                vartheta: vartheta2,
                theta: theta2,
            },
        }
    }

    /// `E[Y] - E[X]`.
    pub fn true_delta(&self) -> f64 {
        self.y_marginal().mean() - self.x_marginal().mean()
    }

    pub fn validate(&self) -> Result<()> {
        self.x_marginal().validate()?;
        self.y_marginal().validate()
    }

    /// The same design with mean difference `delta`.
    ///
    /// Normal populations shift `Y`. Lognormal populations scale both
    /// parameters of `Y` by
    /// `k = log(delta + exp(vartheta1 + theta1/2)) / (vartheta2 + theta2/2)`,
    /// which gives `E[Y] = E[X] + delta`.
    pub fn displaced(&self, delta: f64) -> Result<Population> {
        match *self {
            Population::Normal { mu, var1, var2, .. } => Ok(Population::Normal { mu, var1, var2, delta }),
            Population::LogNormal {
                vartheta1,
                theta1,
                vartheta2,
                theta2,
            } => {
                let ex = (vartheta1 + 0.5 * theta1).exp();
                let k = (delta + ex).ln() / (vartheta2 + 0.5 * theta2);
                if !(delta > -ex) || !(k > 0.0) {
                    return Err(EmphiError::InvalidParameter(format!(
                        "delta = {delta} outside the lognormal displacement domain"
                    )));
                }
                Ok(Population::LogNormal {
                    vartheta1,
                    theta1,
                    vartheta2: k * vartheta2,
                    theta2: k * theta2,
                })
            }
        }
    }
}
