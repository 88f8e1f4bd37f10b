//! Standard normal distribution function, its inverse, and the Gaussian tail
//! perturbation bounds.
//!
//! The upper tail `1 - Φ(x)` is evaluated directly (never as `1 - Φ`), so
//! far-tail values keep full relative precision:
//!
//! * `|x| < 3`: a positive-term series for `erf`, free of cancellation;
//! * `|x| >= 3`: the continued fraction for the Mills ratio, evaluated with
//!   the modified Lentz algorithm.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const SERIES_CUTOFF: f64 = 3.0;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            domain(format!("probability must lie in [0, 1], got {value}"))
        }
    }

    /// Accepts only the open interval `(0, 1)`.
    pub fn new_open(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            domain(format!("probability must lie in (0, 1), got {value}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `erf(z)` for moderate `z >= 0` via
/// `erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_n 2^n z^(2n+1) / (2n+1)!!`.
fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-z2).exp() * sum
}

/// Mills ratio `(1 - Φ(x)) / φ(x)` for `x >= SERIES_CUTOFF`, from the
/// continued fraction `1 / (x + 1/(x + 2/(x + 3/(x + ...))))`.
fn mills_ratio_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Upper tail `1 - Φ(x)` for `x >= 0`.
fn upper_tail_nonneg(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        0.5 - 0.5 * erf_series(x * FRAC_1_SQRT_2)
    } else {
        std_normal_pdf(x) * mills_ratio_cf(x)
    }
}

/// `ln(1 - Φ(x))` for `x >= 0`, finite for every finite `x`.
fn ln_upper_tail_nonneg(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        upper_tail_nonneg(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio_cf(x).ln()
    }
}

/// `Φ(x)` without argument validation; NaN propagates.
pub(crate) fn cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - upper_tail_nonneg(x)
    } else {
        upper_tail_nonneg(-x)
    }
}

/// `1 - Φ(x)` without argument validation.
pub(crate) fn sf(x: f64) -> f64 {
    if x >= 0.0 {
        upper_tail_nonneg(x)
    } else {
        1.0 - upper_tail_nonneg(-x)
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        domain(format!("argument must be finite, got {x}"))
    }
}

/// Standard normal distribution function `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> Result<Probability> {
    check_finite(x)?;
    Ok(Probability(cdf(x)))
}

/// Standard normal survival function `1 - Φ(x)`, accurate in relative terms
/// far into the upper tail.
pub fn std_normal_sf(x: f64) -> Result<Probability> {
    check_finite(x)?;
    Ok(Probability(sf(x)))
}

/// Solves `1 - Φ(x) = q` for `q` in `(0, 1/2]`, returning `x >= 0`.
fn upper_tail_inverse(q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    // Rational starting point accurate to about 5e-4.
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = t
        - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
            / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t);
    x = x.max(0.0);
    let target = q.ln();
    // Newton on ln(1 - Φ(x)), whose derivative is -φ(x) / (1 - Φ(x)).
    for _ in 0..60 {
        let ln_q = ln_upper_tail_nonneg(x);
        let mills = (ln_q + 0.5 * x * x + LN_SQRT_2PI).exp();
        let step = (ln_q - target) * mills;
        let next = (x + step).max(0.0);
        if (next - x).abs() <= 1e-15 * x.max(1.0) {
            return next;
        }
        x = next;
    }
    upper_tail_inverse_bisect(q)
}

fn upper_tail_inverse_bisect(q: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while upper_tail_nonneg(hi) > q {
        hi *= 2.0;
    }
    let target = q.ln();
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if ln_upper_tail_nonneg(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse of `Φ` on the open interval `(0, 1)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("normal quantile requires 0 < p < 1, got {p}"));
    }
    Ok(quantile(p))
}

/// Unchecked inverse used on the sampling hot path; `p` must lie in `(0, 1)`.
pub(crate) fn quantile(p: f64) -> f64 {
    if p < 0.5 {
        -upper_tail_inverse(p)
    } else {
        upper_tail_inverse(1.0 - p)
    }
}

/// Inverse of `1 - Φ`: the `x` with upper tail mass `q`.
pub(crate) fn upper_quantile(q: f64) -> f64 {
    if q <= 0.5 {
        upper_tail_inverse(q)
    } else {
        -upper_tail_inverse(1.0 - q)
    }
}

/// Multiplicative bounds `(e^{-3|h| m}, e^{3|h| m})`, `m = max(x, 1)`, on the
/// ratio `(1 - Φ(x + h)) / (1 - Φ(x))`. Valid for `x >= 0` and
/// `|h| <= 1 / (3m)`.
pub fn tail_perturbation_bounds(x: f64, h: f64) -> Result<(f64, f64)> {
    check_finite(x)?;
    check_finite(h)?;
    if x < 0.0 {
        return domain(format!("tail perturbation requires x >= 0, got {x}"));
    }
    let m = x.max(1.0);
    let limit = 1.0 / (3.0 * m);
    if h.abs() > limit {
        return domain(format!(
            "tail perturbation requires |h| <= 1/(3 max{{x,1}}) = {limit}, got |h| = {}",
            h.abs()
        ));
    }
    let e = 3.0 * h.abs() * m;
    Ok(((-e).exp(), e.exp()))
}

/// The exact ratio `(1 - Φ(x + h)) / (1 - Φ(x))`.
pub fn tail_ratio(x: f64, h: f64) -> Result<f64> {
    check_finite(x)?;
    check_finite(h)?;
    Ok(sf(x + h) / sf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson integral of the density on `[0, x]`; independent of
    /// the series/continued-fraction evaluation.
    fn simpson_cdf(x: f64) -> f64 {
        let n = 20_000;
        let h = x.abs() / n as f64;
        let mut s = std_normal_pdf(0.0) + std_normal_pdf(x.abs());
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * std_normal_pdf(i as f64 * h);
        }
        let half = s * h / 3.0;
        if x >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    fn simpson_sf(x: f64) -> f64 {
        let n = 400_000;
        let b = x + 40.0;
        let h = (b - x) / n as f64;
        let mut s = std_normal_pdf(x) + std_normal_pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * std_normal_pdf(x + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_fixtures() {
        assert_eq!(std_normal_cdf(0.0).unwrap().get(), 0.5);
        assert!((std_normal_cdf(1.96).unwrap().get() - 0.975_002_104_851_779_6).abs() < 1e-12);
        assert!((std_normal_cdf(-1.96).unwrap().get() - 0.024_997_895_148_220_4).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_quadrature_oracle() {
        let mut x = -8.0;
        while x <= 8.0 {
            let got = std_normal_cdf(x).unwrap().get();
            assert!((got - simpson_cdf(x)).abs() < 1e-12, "x = {x}");
            x += 0.125;
        }
    }

    #[test]
    fn far_tail_relative_accuracy() {
        for &x in &[3.0, 4.5, 6.0, 8.0, 12.0] {
            let got = std_normal_sf(x).unwrap().get();
            let want = simpson_sf(x);
            assert!(((got - want) / want).abs() < 1e-10, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn symmetry_and_monotonicity() {
        let mut prev = 0.0;
        let mut x = -8.0;
        while x <= 8.0 {
            let c = cdf(x);
            assert!(c >= prev);
            assert!((c + cdf(-x) - 1.0).abs() < 1e-12);
            prev = c;
            x += 0.01;
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn quantile_fixtures() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((std_normal_quantile(0.025).unwrap() + 1.959_963_984_540_054).abs() < 1e-9);
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(std_normal_quantile(p).is_err());
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = std_normal_quantile(p).unwrap();
            assert!((cdf(x) - p).abs() <= 1e-10);
        }
        for &p in &[1e-12, 1e-9, 1e-6, 1.0 - 1e-6, 1.0 - 1e-9, 1.0 - 1e-12] {
            let x = std_normal_quantile(p).unwrap();
            assert!((cdf(x) - p).abs() <= 1e-10);
        }
        // Deep lower tail, relative accuracy.
        for &q in &[1e-20, 1e-100, 1e-300] {
            let x = upper_quantile(q);
            assert!(((sf(x) - q) / q).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip() {
        let mut x = -6.0;
        while x <= 6.0 {
            let back = std_normal_quantile(cdf(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x = {x}");
            x += 0.05;
        }
    }

    #[test]
    fn perturbation_fixtures() {
        assert_eq!(tail_perturbation_bounds(0.0, 0.0).unwrap(), (1.0, 1.0));
        let (lo, hi) = tail_perturbation_bounds(2.0, 0.1).unwrap();
        assert!((lo - 0.548_811_636_094_026_4).abs() < 1e-12);
        assert!((hi - 1.822_118_800_390_509).abs() < 1e-12);
        let r = tail_ratio(2.0, 0.1).unwrap();
        assert!((r - 0.785_244_701_152).abs() < 1e-9);
        assert!(lo <= r && r <= hi);
    }

    #[test]
    fn perturbation_precondition() {
        let err = tail_perturbation_bounds(2.0, 0.2).unwrap_err();
        assert!(err.to_string().contains("1/(3 max{x,1})"));
        assert!(tail_perturbation_bounds(-1.0, 0.0).is_err());
        assert!(tail_perturbation_bounds(0.5, 1.0 / 3.0).is_ok());
    }

    #[test]
    fn perturbation_grid_contains_true_ratio() {
        for i in 0..=10 {
            let x = 0.5 * i as f64;
            let m = f64::max(x, 1.0);
            for h in [1.0 / (6.0 * m), 1.0 / (3.0 * m)] {
                for h in [h, -h] {
                    let (lo, hi) = tail_perturbation_bounds(x, h).unwrap();
                    let r = tail_ratio(x, h).unwrap();
                    assert!(lo <= r && r <= hi, "x={x} h={h}");
                }
            }
        }
    }
}
