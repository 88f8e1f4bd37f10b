//! Adversarial replacement of a fraction of a sample, and the order-statistic
//! sandwich that bounds what it can do to a trimmed mean.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimators::{trimmed_mean, OrderedSample, TrimSpec};
use crate::rng::{Seed, UniformStream};

/// `floor(eps n)`, tolerant of `eps` values that are not exact in binary
/// (`0.29 * 100` evaluates to `28.999...`).
pub fn contaminated_count(eps: f64, n: usize) -> usize {
    let v = eps * n as f64;
    let nearest = v.round();
    if (v - nearest).abs() <= 8.0 * f64::EPSILON * nearest.max(1.0) {
        nearest as usize
    } else {
        v.floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    None,
    LargePositive { magnitude: f64 },
    LargeNegative { magnitude: f64 },
    /// Negates the points of largest absolute value.
    SignFlip,
    /// Moves points to the clean `(n-k)`-th order statistic, the largest value
    /// a `k`-trimmed mean still keeps.
    BoundaryAdversary { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub eps: f64,
    pub strategy: Strategy,
}

impl ContaminationSpec {
    pub fn new(eps: f64, strategy: Strategy) -> Result<Self> {
        let spec = Self { eps, strategy };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.eps) {
            return domain(format!("contamination fraction must lie in [0, 1/2), got {}", self.eps));
        }
        match self.strategy {
            Strategy::LargePositive { magnitude } | Strategy::LargeNegative { magnitude } if !magnitude.is_finite() => {
                domain(format!("contamination magnitude must be finite, got {magnitude}"))
            }
            _ => Ok(()),
        }
    }

    pub fn count(&self, n: usize) -> usize {
        contaminated_count(self.eps, n)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Strategy::None => write!(f, "none"),
            Strategy::LargePositive { magnitude } => write!(f, "large_positive:{magnitude}"),
            Strategy::LargeNegative { magnitude } => write!(f, "large_negative:{magnitude}"),
            Strategy::SignFlip => write!(f, "sign_flip"),
            Strategy::BoundaryAdversary { k } => write!(f, "boundary_adversary:{k}"),
        }
    }
}

/// Parses `none`, `large_positive:M`, `large_negative:M`, `sign_flip`, `boundary_adversary:K`.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let need = |what: &str| -> Result<&str> {
            arg.ok_or_else(|| Error::Domain(format!("strategy {name} needs a {what} argument")))
        };
        let magnitude = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::Domain(format!("invalid magnitude {v:?}")))
        };
        let strategy = match name.replace('-', "_").as_str() {
            "none" => Strategy::None,
            "large_positive" => Strategy::LargePositive { magnitude: magnitude(need("magnitude")?)? },
            "large_negative" => Strategy::LargeNegative { magnitude: magnitude(need("magnitude")?)? },
            "sign_flip" => Strategy::SignFlip,
            "boundary_adversary" => {
                let k = need("k")?;
                Strategy::BoundaryAdversary {
                    k: k.parse().map_err(|_| Error::Domain(format!("invalid trimming level {k:?}")))?,
                }
            }
            other => return domain(format!("unknown contamination strategy {other:?}")),
        };
        if arg.is_some() && matches!(strategy, Strategy::None | Strategy::SignFlip) {
            return domain(format!("strategy {name} takes no argument"));
        }
        Ok(strategy)
    }
}

/// `m` distinct indices below `n`, by a partial Fisher-Yates shuffle.
fn choose_positions(n: usize, m: usize, rng: &mut UniformStream) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + rng.next_below((n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx
}

/// Replaces `floor(eps n)` entries of `sample` using stream 0 of `seed`.
pub fn contaminate(sample: &[f64], spec: &ContaminationSpec, seed: Seed) -> Result<Vec<f64>> {
    contaminate_stream(sample, spec, seed, 0)
}

pub fn contaminate_stream(sample: &[f64], spec: &ContaminationSpec, seed: Seed, stream: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = sample.len();
    let m = spec.count(n);
    let mut out = sample.to_vec();
    if m == 0 {
        return Ok(out);
    }
    let mut rng = UniformStream::new(seed, stream);
    match spec.strategy {
        Strategy::None => {}
        Strategy::LargePositive { magnitude } => {
            for i in choose_positions(n, m, &mut rng) {
                out[i] = magnitude;
            }
        }
        Strategy::LargeNegative { magnitude } => {
            for i in choose_positions(n, m, &mut rng) {
                out[i] = -magnitude;
            }
        }
        Strategy::SignFlip => {
            let mut idx: Vec<usize> = (0..n).collect();
            // Ties in magnitude are broken by position, so the choice is deterministic.
            idx.sort_by(|&a, &b| sample[b].abs().total_cmp(&sample[a].abs()).then(a.cmp(&b)));
            for &i in &idx[..m] {
                out[i] = -sample[i];
            }
        }
        Strategy::BoundaryAdversary { k } => {
            if k >= n {
                return domain(format!("boundary adversary needs k < n, got k={k}, n={n}"));
            }
            let mut sorted = sample.to_vec();
            sorted.sort_by(f64::total_cmp);
            let target = sorted[n - k - 1];
            for i in choose_positions(n, m, &mut rng) {
                out[i] = target;
            }
        }
    }
    Ok(out)
}

fn check_sandwich_args(clean: &OrderedSample<f64>, contaminated: &OrderedSample<f64>, m: usize) -> Result<()> {
    if clean.len() != contaminated.len() {
        return domain(format!(
            "clean and contaminated samples differ in size ({} vs {})",
            clean.len(),
            contaminated.len()
        ));
    }
    if 2 * m >= clean.len() {
        return domain(format!("contaminated count {m} is at least half of n={}", clean.len()));
    }
    Ok(())
}

/// Whether `X_(i-m) <= X^eps_(i) <= X_(i+m)` for every `m < i <= n - m`.
pub fn order_stats_sandwiched(clean: &OrderedSample<f64>, contaminated: &OrderedSample<f64>, eps: f64) -> Result<bool> {
    let n = clean.len();
    let m = contaminated_count(eps, n);
    check_sandwich_args(clean, contaminated, m)?;
    let (x, y) = (clean.values(), contaminated.values());
    Ok((m..n - m).all(|i| x[i - m] <= y[i] && y[i] <= x[i + m]))
}

/// Checks that the contaminated `(k1, k2)`-trimmed mean lies between the clean
/// `(k1 - m, k2 + m)` and `(k1 + m, k2 - m)` trimmed means, `m = floor(eps n)`.
pub fn sandwich_holds(
    clean: &OrderedSample<f64>,
    contaminated: &OrderedSample<f64>,
    eps: f64,
    k1: usize,
    k2: usize,
) -> Result<bool> {
    let n = clean.len();
    let m = contaminated_count(eps, n);
    if clean.len() != contaminated.len() {
        return domain("clean and contaminated samples differ in size");
    }
    if k1.min(k2) < m {
        return domain(format!("sandwich needs min(k1, k2) >= floor(eps n) = {m}, got k1={k1}, k2={k2}"));
    }
    TrimSpec::new(k1, k2).check(n)?;
    let lower = trimmed_mean(clean, TrimSpec::new(k1 - m, k2 + m))?;
    let middle = trimmed_mean(contaminated, TrimSpec::new(k1, k2))?;
    let upper = trimmed_mean(clean, TrimSpec::new(k1 + m, k2 - m))?;
    Ok(lower <= middle && middle <= upper)
}
