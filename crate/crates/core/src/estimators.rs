//! Trimmed means and the two baselines they are compared against.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// A nonempty, sorted sample of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample<T> {
    values: Vec<T>,
}

impl<T: Scalar> OrderedSample<T> {
    /// Validates and sorts `values`. Ties keep their input order.
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return domain("sample is empty");
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::InvalidSample { index, value: format!("{:?}", values[index]) });
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The `i`-th order statistic, 1-based.
    pub fn order_stat(&self, i: usize) -> T {
        self.values[i - 1]
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }
}

/// Convenience wrapper around [`OrderedSample::new`].
pub fn order<T: Scalar>(sample: &[T]) -> Result<OrderedSample<T>> {
    OrderedSample::new(sample.to_vec())
}

/// Numbers of smallest (`k1`) and largest (`k2`) order statistics to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrimSpec {
    pub k1: usize,
    pub k2: usize,
}

impl TrimSpec {
    pub fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }

    pub fn symmetric(k: usize) -> Self {
        Self { k1: k, k2: k }
    }

    pub fn check(self, n: usize) -> Result<()> {
        if self.k1.checked_add(self.k2).is_none_or(|t| t >= n) {
            return domain(format!("trimming k1={} k2={} leaves nothing of n={n}", self.k1, self.k2));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedSummary<T> {
    pub mean: T,
    /// Divides by the retained count, no Bessel correction.
    pub variance: T,
    /// `X_(n-k2+1) - X_(k1)`; `None` when either side is untrimmed.
    pub width: Option<T>,
    pub retained: usize,
}

fn kept<T: Scalar>(s: &OrderedSample<T>, t: TrimSpec) -> Result<&[T]> {
    t.check(s.len())?;
    Ok(&s.values[t.k1..s.len() - t.k2])
}

fn mean_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / T::from_count(xs.len())
}

pub fn trimmed_mean<T: Scalar>(s: &OrderedSample<T>, t: TrimSpec) -> Result<T> {
    Ok(mean_of(kept(s, t)?))
}

pub fn trimmed_summary<T: Scalar>(s: &OrderedSample<T>, t: TrimSpec) -> Result<TrimmedSummary<T>> {
    let xs = kept(s, t)?;
    let mean = mean_of(xs);
    let variance = xs.iter().fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean)) / T::from_count(xs.len());
    let n = s.len();
    // The upper index n - k2 + 1 is at most n because k2 >= 1 here.
    let width = (t.k1 >= 1 && t.k2 >= 1).then(|| s.order_stat(n - t.k2 + 1) - s.order_stat(t.k1));
    Ok(TrimmedSummary { mean, variance, width, retained: xs.len() })
}

/// Median of contiguous block means. Blocks follow input order; the first
/// `n % blocks` blocks get one extra point.
pub fn median_of_means<T: Scalar>(sample: &[T], blocks: usize) -> Result<T> {
    let n = sample.len();
    if blocks == 0 || blocks > n {
        return domain(format!("median of means needs 1 <= blocks <= n, got blocks={blocks}, n={n}"));
    }
    if let Some(index) = sample.iter().position(|v| !v.is_finite_value()) {
        return Err(Error::InvalidSample { index, value: format!("{:?}", sample[index]) });
    }
    let (base, extra) = (n / blocks, n % blocks);
    let mut means = Vec::with_capacity(blocks);
    let mut start = 0;
    for b in 0..blocks {
        let len = base + usize::from(b < extra);
        means.push(mean_of(&sample[start..start + len]));
        start += len;
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite block means"));
    let mid = blocks / 2;
    Ok(if blocks % 2 == 1 {
        means[mid]
    } else {
        (means[mid - 1] + means[mid]) / T::from_count(2)
    })
}

/// Catoni's narrowest influence function `sign(x) ln(1 + |x| + x^2/2)`.
pub fn catoni_psi<T: Float>(x: T) -> T {
    let half = T::from(0.5).expect("float constant");
    let a = x.abs();
    (a + half * a * a).ln_1p().copysign(x)
}

const CATONI_MAX_ITER: usize = 10_000;

/// Root of `sum_i psi((x_i - theta) / scale)`, located by bisection on
/// `[min x, max x]` until the bracket is narrower than `tol`.
pub fn catoni<T: Float + Scalar>(sample: &[T], scale: T, tol: T) -> Result<T> {
    if sample.len() < 2 {
        return domain("catoni estimator needs at least two points");
    }
    if !(scale > T::zero()) || !Float::is_finite(scale) {
        return domain(format!("catoni scale must be positive, got {scale:?}"));
    }
    if !(tol > T::zero()) {
        return domain(format!("catoni tolerance must be positive, got {tol:?}"));
    }
    if let Some(index) = sample.iter().position(|v| !Float::is_finite(*v)) {
        return Err(Error::InvalidSample { index, value: format!("{:?}", sample[index]) });
    }
    // Summing in sorted order makes the result independent of input order.
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
    let score = |theta: T| xs.iter().fold(T::zero(), |acc, &x| acc + catoni_psi((x - theta) / scale));
    let (mut lo, mut hi) = (xs[0], xs[xs.len() - 1]);
    if lo == hi {
        return Ok(lo);
    }
    let two = T::from(2.0).expect("float constant");
    for _ in 0..CATONI_MAX_ITER {
        if hi - lo <= tol {
            return Ok((lo + hi) / two);
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let s = score(mid);
        if s > T::zero() {
            lo = mid;
        } else if s < T::zero() {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Err(Error::Numeric("catoni bisection did not converge".into()))
}
