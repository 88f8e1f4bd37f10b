//! Generative models addressed through their quantile functions.
//!
//! Every model is sampled by inverse transform, `X_i = F^{-1}(U_i)`, so a
//! sample is a deterministic function of its uniform stream. Quantiles take
//! the uniform together with its complement (see [`Sampler::quantile_pair`])
//! to stay accurate deep in the upper tail.

mod moments;
mod population;
mod student_t;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use moments::{moment_profile, Moment, MomentProfile};
pub use population::{
    population_bound_check, rho_oracle, trimmed_population, BoundCheck, CheckStatus,
    PopulationBoundReport, TrimmedPopulation, BOUND_TOLERANCE,
};

use crate::error::{domain, Error, Result};
use crate::gaussian;
use crate::rng::{Seed, UniformStream};
use student_t::StudentT;

/// A generative distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
    StudentT { dof: f64, location: f64, scale: f64 },
    /// Pareto with tail index `shape` and minimum `scale`; `centered`
    /// subtracts the mean (requires `shape > 1`).
    Pareto { shape: f64, scale: f64, centered: bool },
    LogNormal { log_mean: f64, log_sd: f64 },
    /// Uniform law on the listed values (with multiplicity).
    Empirical { values: Vec<f64> },
}

impl DistributionSpec {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        Self::Uniform { low, high }.validated()
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::Normal { mean, sd }.validated()
    }

    /// Standard Student-t (location 0, scale 1).
    pub fn student_t(dof: f64) -> Result<Self> {
        Self::StudentT { dof, location: 0.0, scale: 1.0 }.validated()
    }

    pub fn pareto(shape: f64, scale: f64, centered: bool) -> Result<Self> {
        Self::Pareto { shape, scale, centered }.validated()
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        Self::LogNormal { log_mean, log_sd }.validated()
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Self::Empirical { values }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be finite, got {v}"))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                domain(format!("{name} must be positive and finite, got {v}"))
            }
        }
        match *self {
            Self::Uniform { low, high } => {
                finite("low", low)?;
                finite("high", high)?;
                if !(low < high) {
                    return domain(format!("uniform requires low < high, got {low} >= {high}"));
                }
            }
            Self::Normal { mean, sd } => {
                finite("mean", mean)?;
                positive("sd", sd)?;
            }
            Self::StudentT { dof, location, scale } => {
                positive("dof", dof)?;
                finite("location", location)?;
                positive("scale", scale)?;
            }
            Self::Pareto { shape, scale, centered } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
                if centered && shape <= 1.0 {
                    return domain(format!("centered pareto requires shape > 1, got {shape}"));
                }
            }
            Self::LogNormal { log_mean, log_sd } => {
                finite("log_mean", log_mean)?;
                positive("log_sd", log_sd)?;
            }
            Self::Empirical { ref values } => {
                if values.is_empty() {
                    return domain("empirical distribution needs at least one value");
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::InvalidSample { index: i, value: v.to_string() });
                }
            }
        }
        Ok(())
    }

    /// Precomputes the quantile function.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let law = match *self {
            Self::Uniform { low, high } => Law::Uniform { low, high },
            Self::Normal { mean, sd } => Law::Normal { mean, sd },
            Self::StudentT { dof, location, scale } => Law::StudentT { t: StudentT::new(dof), location, scale },
            Self::Pareto { shape, scale, centered } => Law::Pareto {
                inv_shape: 1.0 / shape,
                scale,
                shift: if centered { shape * scale / (shape - 1.0) } else { 0.0 },
            },
            Self::LogNormal { log_mean, log_sd } => Law::LogNormal { log_mean, log_sd },
            Self::Empirical { ref values } => {
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                Law::Empirical { sorted }
            }
        };
        Ok(Sampler { law })
    }

    /// Generalized inverse `F^{-1}(u) = inf{t : F(t) >= u}` for `0 < u < 1`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return domain(format!("quantile requires 0 < u < 1, got {u}"));
        }
        Ok(self.sampler()?.quantile_pair(u, 1.0 - u))
    }

    /// `n` draws `F^{-1}(U_i)` from stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: Seed) -> Result<Vec<f64>> {
        self.sample_stream(n, seed, 0)
    }

    pub fn sample_stream(&self, n: usize, seed: Seed, stream: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        Ok(self.sampler()?.draw(n, seed, stream))
    }

    /// The mean, or `None` when it is undefined.
    pub fn mean(&self) -> Option<f64> {
        moments::mean_of(self)
    }

    /// Whether the law is symmetric about some center, and that center.
    pub fn symmetry_center(&self) -> Option<f64> {
        match *self {
            Self::Uniform { low, high } => Some(0.5 * (low + high)),
            Self::Normal { mean, .. } => Some(mean),
            Self::StudentT { location, .. } => Some(location),
            _ => None,
        }
    }

    /// Half-width of the support around the mean when the support is bounded.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Self::Uniform { low, high } => Some(0.5 * (high - low)),
            Self::Empirical { ref values } => {
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                Some(values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max))
            }
            _ => None,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Self::Normal { mean, sd } => write!(f, "normal:{mean},{sd}"),
            Self::StudentT { dof, location, scale } => {
                if location == 0.0 && scale == 1.0 {
                    write!(f, "t:{dof}")
                } else {
                    write!(f, "t:{dof},{location},{scale}")
                }
            }
            Self::Pareto { shape, scale, centered } => {
                write!(f, "pareto:{shape},{scale}")?;
                if centered {
                    write!(f, ",centered")?;
                }
                Ok(())
            }
            Self::LogNormal { log_mean, log_sd } => write!(f, "lognormal:{log_mean},{log_sd}"),
            Self::Empirical { ref values } => write!(f, "empirical(n={})", values.len()),
        }
    }
}

/// Parses `family:params`, e.g. `normal:0,1`, `t:3`, `pareto:3,1,centered`,
/// `lognormal:0,1`, `uniform:0,1`. Empirical laws are built from data with
/// [`DistributionSpec::empirical`].
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let fields: Vec<&str> = rest.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
        let centered = fields.last() == Some(&"centered");
        let numbers: Vec<&str> = if centered { fields[..fields.len() - 1].to_vec() } else { fields };
        let nums = numbers
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Domain(format!("bad number {f:?} in distribution {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let arity = |allowed: &[usize]| -> Result<()> {
            if allowed.contains(&nums.len()) {
                Ok(())
            } else {
                domain(format!("distribution {s:?}: expected {allowed:?} parameters, got {}", nums.len()))
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "uniform" => {
                arity(&[0, 2])?;
                if nums.is_empty() {
                    Self::uniform(0.0, 1.0)
                } else {
                    Self::uniform(nums[0], nums[1])
                }
            }
            "normal" | "gaussian" => {
                arity(&[0, 2])?;
                if nums.is_empty() {
                    Self::normal(0.0, 1.0)
                } else {
                    Self::normal(nums[0], nums[1])
                }
            }
            "t" | "student_t" | "student-t" => {
                arity(&[1, 3])?;
                if nums.len() == 1 {
                    Self::student_t(nums[0])
                } else {
                    Self::StudentT { dof: nums[0], location: nums[1], scale: nums[2] }.validated()
                }
            }
            "pareto" => {
                arity(&[1, 2])?;
                Self::pareto(nums[0], nums.get(1).copied().unwrap_or(1.0), centered)
            }
            "lognormal" => {
                arity(&[0, 2])?;
                if nums.is_empty() {
                    Self::lognormal(0.0, 1.0)
                } else {
                    Self::lognormal(nums[0], nums[1])
                }
            }
            "point" | "constant" => {
                arity(&[1])?;
                Self::empirical(vec![nums[0]])
            }
            other => domain(format!("unknown distribution family {other:?}")),
        }
    }
}

/// Reads newline-delimited decimal numbers. Blank lines and lines starting
/// with `#` are skipped. With `column = Some(j)` each line is split on commas
/// and field `j` (0-indexed) is read. Only `.` is accepted as decimal
/// separator.
pub fn parse_values(text: &str, column: Option<usize>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = match column {
            Some(j) => line.split(',').nth(j).map(str::trim).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("missing column {j} in {line:?}"),
            })?,
            None => line,
        };
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("cannot parse {field:?} as a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { line: i + 1, message: format!("non-finite value {field:?}") });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, message: "no values found".into() });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Law {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
    StudentT { t: StudentT, location: f64, scale: f64 },
    Pareto { inv_shape: f64, scale: f64, shift: f64 },
    LogNormal { log_mean: f64, log_sd: f64 },
    Empirical { sorted: Vec<f64> },
}

/// A distribution with its quantile function precomputed.
#[derive(Debug, Clone)]
pub struct Sampler {
    law: Law,
}

fn std_normal_pair(u: f64, uc: f64) -> f64 {
    if u < 0.5 {
        -gaussian::upper_quantile(u)
    } else {
        gaussian::upper_quantile(uc)
    }
}

impl Sampler {
    /// `F^{-1}(u)` where `uc = 1 - u` is supplied separately; whichever of the
    /// two is smaller determines the precision.
    pub fn quantile_pair(&self, u: f64, uc: f64) -> f64 {
        match self.law {
            Law::Uniform { low, high } => {
                if u <= 0.5 {
                    low + (high - low) * u
                } else {
                    high - (high - low) * uc
                }
            }
            Law::Normal { mean, sd } => mean + sd * std_normal_pair(u, uc),
            Law::StudentT { ref t, location, scale } => location + scale * t.quantile(u, uc),
            Law::Pareto { inv_shape, scale, shift } => scale * uc.powf(-inv_shape) - shift,
            Law::LogNormal { log_mean, log_sd } => (log_mean + log_sd * std_normal_pair(u, uc)).exp(),
            Law::Empirical { ref sorted } => {
                let m = sorted.len();
                let idx = if u <= 0.5 {
                    (u * m as f64).ceil() as usize
                } else {
                    m - (uc * m as f64).floor() as usize
                };
                sorted[idx.clamp(1, m) - 1]
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.quantile_pair(u, 1.0 - u)
    }

    /// Fills `out` with `F^{-1}(U_i)` read from stream `stream` of `seed`.
    pub fn fill(&self, out: &mut [f64], seed: Seed, stream: u64) {
        let mut s = UniformStream::new(seed, stream);
        for slot in out.iter_mut() {
            let u = s.next_open01();
            *slot = self.quantile_pair(u, 1.0 - u);
        }
    }

    pub fn draw(&self, n: usize, seed: Seed, stream: u64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill(&mut out, seed, stream);
        out
    }

    pub(crate) fn is_empirical(&self) -> Option<&[f64]> {
        match self.law {
            Law::Empirical { ref sorted } => Some(sorted),
            _ => None,
        }
    }
}
