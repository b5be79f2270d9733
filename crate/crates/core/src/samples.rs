//! Observations for the two-sample problem.
//!
//! A [`Sample`] holds `len` observations of dimension `dim` in row-major
//! order. Files are read as CSV or whitespace separated text with one
//! observation per row; a first line that does not parse as numbers is
//! treated as a header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{EmphiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    dim: usize,
}

impl Sample {
    /// Builds a univariate sample.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_rows(values, 1)
    }

    /// Builds a sample of `dim`-vectors from row-major `values`.
    pub fn from_rows(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(EmphiError::DimensionMismatch {
                expected: dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmphiError::NonFinite { row: pos / dim });
        }
        let len = values.len() / dim;
        if len < 2 {
            return Err(EmphiError::TooFewObservations { len });
        }
        Ok(Self { values, dim })
    }

    pub fn from_vectors(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(EmphiError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_rows(values, dim)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All coordinates, row-major. For `dim == 1` these are the observations.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Component-wise minimum and maximum of column `j`.
    pub fn column_range(&self, j: usize) -> (f64, f64) {
        self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r[j]), hi.max(r[j]))
        })
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for r in self.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Unbiased covariance matrix (divisor `len - 1`), row-major `dim x dim`.
    pub fn covariance(&self) -> Vec<f64> {
        let mean = self.mean();
        let d = self.dim;
        let mut cov = vec![0.0; d * d];
        for r in self.rows() {
            for a in 0..d {
                let da = r[a] - mean[a];
                for b in 0..d {
                    cov[a * d + b] += da * (r[b] - mean[b]);
                }
            }
        }
        let denom = (self.len() - 1) as f64;
        cov.iter_mut().for_each(|c| *c /= denom);
        cov
    }

    /// Shifts every observation by `t` (component-wise).
    pub fn shifted(&self, t: &[f64]) -> Sample {
        let values = self
            .values
            .chunks_exact(self.dim)
            .flat_map(|r| r.iter().zip(t).map(|(v, s)| v + s))
            .collect();
        Sample {
            values,
            dim: self.dim,
        }
    }

    pub fn scaled(&self, factor: f64) -> Sample {
        Sample {
            values: self.values.iter().map(|v| v * factor).collect(),
            dim: self.dim,
        }
    }
}

/// Mean and unbiased variance (or covariance matrix for `dim > 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Summary {
    /// Univariate shortcut: `(mean, variance)`.
    pub fn scalar(&self) -> (f64, f64) {
        (self.mean[0], self.variance[0])
    }
}

pub fn summary(s: &Sample) -> Summary {
    Summary {
        mean: s.mean(),
        variance: s.covariance(),
    }
}

/// Population 1 (`x`, mean `mu`) and population 2 (`y`, mean `mu + delta`).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    pub x: Sample,
    pub y: Sample,
}

impl TwoSampleData {
    pub fn new(x: Sample, y: Sample) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(EmphiError::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn univariate(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(Sample::new(x)?, Sample::new(y)?)
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Total sample size `N = m + n`.
    pub fn total(&self) -> usize {
        self.m() + self.n()
    }

    /// Estimate `m / N` of the limiting sample fraction.
    pub fn fraction(&self) -> f64 {
        self.m() as f64 / self.total() as f64
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Point estimate `Ybar - Xbar` of `delta` (component-wise).
    pub fn delta_hat(&self) -> Vec<f64> {
        self.y
            .mean()
            .iter()
            .zip(self.x.mean())
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Range of the pooled univariate observations.
    pub fn combined_range(&self) -> f64 {
        let (a, b) = self.x.column_range(0);
        let (c, d) = self.y.column_range(0);
        b.max(d) - a.min(c)
    }

    pub(crate) fn require_univariate(&self) -> Result<()> {
        if self.dim() != 1 {
            return Err(EmphiError::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Parses delimited text into a sample. `origin` is used in error messages.
pub fn parse_sample(text: &str, origin: &Path) -> Result<Sample> {
    let mut values = Vec::new();
    let mut dim: Option<usize> = None;
    let mut first_content_line = true;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            tokens.iter().map(|t| t.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if first_content_line => {
                first_content_line = false;
                continue;
            }
            Err(_) => {
                let token = tokens
                    .iter()
                    .find(|t| t.parse::<f64>().is_err())
                    .unwrap_or(&"")
                    .to_string();
                return Err(EmphiError::Parse {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    token,
                });
            }
        };
        first_content_line = false;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(EmphiError::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                })
            }
            _ => {}
        }
        values.extend(row);
    }
    match dim {
        Some(d) => Sample::from_rows(values, d),
        None => Err(EmphiError::TooFewObservations { len: 0 }),
    }
}

pub fn load_sample(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EmphiError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_sample(&text, path)
}

pub fn load_two_samples(path_x: impl AsRef<Path>, path_y: impl AsRef<Path>) -> Result<TwoSampleData> {
    TwoSampleData::new(load_sample(path_x)?, load_sample(path_y)?)
}

/// Renders a sample as comma separated rows. `f64`'s `Display` is the
/// shortest representation that parses back to the same bits.
pub fn format_sample(s: &Sample) -> String {
    let mut out = String::new();
    for r in s.rows() {
        for (j, v) in r.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_sample(s: &Sample, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_sample(s)).map_err(|source| EmphiError::Io {
        path: path.to_path_buf(),
        source,
    })
}

const REID_FIELD: &str = include_str!("../data/reid_vapor_field.csv");
const REID_LAB: &str = include_str!("../data/reid_vapor_lab.csv");

/// Field (`x`, m = 30) and lab (`y`, n = 15) Reid vapor pressure
/// measurements for a reformulated gasoline.
pub fn reid_vapor_pressure() -> TwoSampleData {
    let x = parse_sample(REID_FIELD, Path::new("reid_vapor_field.csv"))
        .expect("bundled field data is valid");
    let y = parse_sample(REID_LAB, Path::new("reid_vapor_lab.csv"))
        .expect("bundled lab data is valid");
    TwoSampleData::new(x, y).expect("bundled data share a dimension")
}
