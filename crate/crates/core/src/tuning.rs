//! Trimming-parameter planners and confidence intervals.
//!
//! Every planner returns the trimming level, the rule that turns a scale
//! (`sigma` or the trimmed-sample `sigma_hat`) into a half-width, and the
//! failure probability the corresponding theorem guarantees.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimators::{trimmed_summary, OrderedSample, TrimSpec};
use crate::gaussian;

/// Default for the unspecified universal constant of the precise-CI regime.
pub const DEFAULT_C_UNIVERSAL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `k = ceil(x^2/2)`, constants `(3 sqrt 2 + 8, 4 + 4 sqrt 2)`.
    ThmAll,
    /// Same `k`, constants `(a sqrt 2, 1 + a)` under a moment condition.
    ThmSharper,
    /// One `k_*` for every `x <= sqrt(2 k_*)`, constants `(1, 1)`.
    ThmMultiple,
    /// Gaussian-accurate tails with `sigma_hat`.
    ThmPrecise,
    /// Adversarial contamination.
    ThmContaminated,
}

/// How a plan turns a scale into a half-width at level `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HalfWidthRule {
    /// `(c1 + c2 x) sigma / sqrt(n)` with the population `sigma`.
    Constants { c1: f64, c2: f64 },
    /// `x sigma_hat / sqrt(n)` with the trimmed-sample standard deviation.
    EmpiricalSigma,
    /// The rate is known only up to an unspecified constant.
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePlan {
    pub regime: Regime,
    pub n: usize,
    pub x: f64,
    pub trim: TrimSpec,
    pub rule: HalfWidthRule,
    /// `a`, `gamma` or `d` depending on the regime.
    pub certificate: Option<f64>,
    pub failure_bound: f64,
    pub feasible: bool,
}

impl ConfidencePlan {
    /// Half-width for a known scale; `None` when the rule has no explicit constants.
    pub fn half_width(&self, sigma: f64) -> Option<f64> {
        let root_n = (self.n as f64).sqrt();
        match self.rule {
            HalfWidthRule::Constants { c1, c2 } => Some((c1 + c2 * self.x) * sigma / root_n),
            HalfWidthRule::EmpiricalSigma => Some(self.x * sigma / root_n),
            HalfWidthRule::Unspecified => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.center).abs() <= self.half_width
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    Ok(())
}

fn check_moment_condition(p: f64, kappa: f64) -> Result<()> {
    if !(p > 2.0) || !p.is_finite() {
        return domain(format!("moment order p must be finite and > 2, got {p}"));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return domain(format!("kappa must be finite and >= 1, got {kappa}"));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    Ok(())
}

/// `ceil(x^2 / 2)`.
pub fn k_for_tail(x: f64) -> Result<usize> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("x must be positive and finite, got {x}"));
    }
    // x = sqrt(2m) should give exactly m; squaring can overshoot by an ulp.
    let half_sq = x * x / 2.0;
    let nearest = half_sq.round();
    let k = if (half_sq - nearest).abs() <= 4.0 * f64::EPSILON * nearest { nearest } else { half_sq.ceil() };
    Ok(k as usize)
}

/// Largest admissible `x` for the all-distributions bound at sample size `n`:
/// `sqrt(n / (sqrt 2 + 1)^2 - 2)`, or `None` if no `x > 0` is admissible.
pub fn thm_all_max_x(n: usize) -> Option<f64> {
    let v = n as f64 / ((SQRT_2 + 1.0) * (SQRT_2 + 1.0)) - 2.0;
    (v > 0.0).then(|| v.sqrt())
}

fn check_thm_all_range(x: f64, n: usize) -> Result<()> {
    check_n(n)?;
    let max = thm_all_max_x(n);
    match max {
        Some(m) if x > 0.0 && x <= m => Ok(()),
        Some(m) => domain(format!("x must lie in (0, sqrt(n/(sqrt2+1)^2 - 2)] = (0, {m}] for n={n}, got {x}")),
        None => domain(format!("n={n} is too small: sqrt(n/(sqrt2+1)^2 - 2) is undefined")),
    }
}

fn gaussian_failure(x: f64) -> f64 {
    (4.0 * (-x * x / 2.0).exp()).min(1.0)
}

/// Trimming at `k(x)` with the distribution-free constants.
pub fn plan_all_subgaussian(x: f64, n: usize, sigma: f64) -> Result<(ConfidencePlan, f64)> {
    check_thm_all_range(x, n)?;
    check_sigma(sigma)?;
    let plan = ConfidencePlan {
        regime: Regime::ThmAll,
        n,
        x,
        trim: TrimSpec::symmetric(k_for_tail(x)?),
        rule: HalfWidthRule::Constants { c1: 3.0 * SQRT_2 + 8.0, c2: 4.0 + 4.0 * SQRT_2 },
        certificate: None,
        failure_bound: gaussian_failure(x),
        feasible: true,
    };
    let hw = plan.half_width(sigma).expect("explicit constants");
    Ok((plan, hw))
}

/// Smallest `a` allowed by the moment condition of the sharper bound.
pub fn sharper_a_min(x: f64, n: usize, p: f64, kappa: f64) -> f64 {
    let n = n as f64;
    let r = (1.0 + x) / n.sqrt();
    216.0 * SQRT_2 * (1.0 + x) * (1.0 + x) / n + 24.0 * kappa * r.powf((p - 2.0) / (2.0 * p - 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum SharperOutcome {
    Feasible { plan: ConfidencePlan, half_width: f64 },
    Infeasible { a_min: f64 },
}

pub fn plan_sharper(x: f64, n: usize, p: f64, kappa: f64, sigma: f64) -> Result<SharperOutcome> {
    check_thm_all_range(x, n)?;
    check_moment_condition(p, kappa)?;
    check_sigma(sigma)?;
    let a = sharper_a_min(x, n, p, kappa);
    if a >= 1.0 {
        return Ok(SharperOutcome::Infeasible { a_min: a });
    }
    let plan = ConfidencePlan {
        regime: Regime::ThmSharper,
        n,
        x,
        trim: TrimSpec::symmetric(k_for_tail(x)?),
        rule: HalfWidthRule::Constants { c1: a * SQRT_2, c2: 1.0 + a },
        certificate: Some(a),
        failure_bound: gaussian_failure(x),
        feasible: true,
    };
    let half_width = plan.half_width(sigma).expect("explicit constants");
    Ok(SharperOutcome::Feasible { plan, half_width })
}

/// Left side of the condition on `k_*` for the multiple-level bound.
pub fn multiple_condition(n: usize, k: usize, p: f64, kappa: f64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    432.0 * k.powf(1.5) / n
        + 24.0 * SQRT_2 * kappa * k.powf((3.0 * p - 4.0) / (4.0 * p - 4.0)) / n.powf((p - 2.0) / (4.0 * p - 4.0))
}

/// Largest `k_* >= 1` with `multiple_condition(n, k_*, p, kappa) <= 1`.
pub fn k_multiple(n: usize, p: f64, kappa: f64) -> Result<Option<usize>> {
    check_n(n)?;
    check_moment_condition(p, kappa)?;
    let ok = |k: usize| multiple_condition(n, k, p, kappa) <= 1.0;
    if !ok(1) {
        return Ok(None);
    }
    // 432 k^{3/2} / n alone exceeds 1 past (n/432)^{2/3}.
    let mut lo = 1usize;
    let mut hi = ((n as f64 / 432.0).powf(2.0 / 3.0).ceil() as usize).max(1) + 1;
    while ok(hi) {
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Plan for a given `x` using `k_multiple`; `None` when no `k_*` exists.
pub fn plan_multiple(x: f64, n: usize, p: f64, kappa: f64) -> Result<Option<ConfidencePlan>> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("x must be positive and finite, got {x}"));
    }
    let Some(k) = k_multiple(n, p, kappa)? else {
        return Ok(None);
    };
    let max_x = (2.0 * k as f64).sqrt();
    if x > max_x {
        return domain(format!("x must satisfy x <= sqrt(2 k_*) = {max_x} (k_*={k}), got {x}"));
    }
    Ok(Some(ConfidencePlan {
        regime: Regime::ThmMultiple,
        n,
        x,
        trim: TrimSpec::symmetric(k),
        rule: HalfWidthRule::Constants { c1: 1.0, c2: 1.0 },
        certificate: None,
        failure_bound: gaussian_failure(x),
        feasible: true,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminatedPlan {
    pub k: usize,
    pub d: f64,
    pub feasible: bool,
}

/// `k = floor(eps n) + ceil(ln(4/alpha))` and the ratio `d` of the side condition.
pub fn k_contaminated(n: usize, eps: f64, alpha: f64) -> Result<ContaminatedPlan> {
    check_n(n)?;
    if !(0.0..0.5).contains(&eps) {
        return domain(format!("eps must lie in [0, 1/2), got {eps}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let m = crate::contamination::contaminated_count(eps, n) as f64;
    let l = (4.0 / alpha).ln().ceil();
    let k = (m + l) as usize;
    let d = ((2.0 * m + 2.0 * l - 1.0).sqrt() + l.sqrt()).powi(2) / n as f64;
    let feasible = d < 1.0 && 2 * k < n;
    Ok(ContaminatedPlan { k, d, feasible })
}

pub fn plan_contaminated(n: usize, eps: f64, alpha: f64) -> Result<ConfidencePlan> {
    let c = k_contaminated(n, eps, alpha)?;
    Ok(ConfidencePlan {
        regime: Regime::ThmContaminated,
        n,
        x: (2.0 * (4.0 / alpha).ln()).sqrt(),
        trim: TrimSpec::symmetric(c.k),
        rule: HalfWidthRule::Unspecified,
        certificate: Some(c.d),
        failure_bound: alpha,
        feasible: c.feasible,
    })
}

/// `kappa k^{(7p-8)/(4p-4)} / n^{(p-2)/(4p-4)}`.
pub fn precise_gamma(n: usize, k: usize, p: f64, kappa: f64) -> f64 {
    kappa * (k as f64).powf((7.0 * p - 8.0) / (4.0 * p - 4.0)) / (n as f64).powf((p - 2.0) / (4.0 * p - 4.0))
}

/// Two-sided plan at level `alpha`: `x` solves `1 - Phi(x) = alpha / 2`.
pub fn precise_ci_plan(
    n: usize,
    alpha: f64,
    delta: f64,
    p: f64,
    kappa: f64,
    c_universal: f64,
) -> Result<ConfidencePlan> {
    check_n(n)?;
    check_moment_condition(p, kappa)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    if !(c_universal > 0.0) || !c_universal.is_finite() {
        return domain(format!("universal constant must be positive, got {c_universal}"));
    }
    let tail = alpha / 2.0;
    let x = gaussian::upper_quantile(tail);
    let k = ((4.0 / (delta * tail)).ln().ceil() as usize).max(2);
    let gamma = precise_gamma(n, k, p, kappa);
    Ok(ConfidencePlan {
        regime: Regime::ThmPrecise,
        n,
        x,
        trim: TrimSpec::symmetric(k),
        rule: HalfWidthRule::EmpiricalSigma,
        certificate: Some(gamma),
        failure_bound: alpha,
        feasible: gamma < 1.0 / c_universal,
    })
}

/// Interval `trimmed mean ± x sigma_hat / sqrt(n)` for an empirical-sigma plan.
pub fn ci_from_sample(s: &OrderedSample<f64>, plan: &ConfidencePlan) -> Result<Interval> {
    if plan.rule != HalfWidthRule::EmpiricalSigma {
        return domain("interval from data needs a plan whose width uses the trimmed-sample sigma");
    }
    let n = s.len();
    if 2 * plan.trim.k1.max(plan.trim.k2) >= n {
        return domain(format!("2k = {} must be below n = {n}", 2 * plan.trim.k1.max(plan.trim.k2)));
    }
    let t = trimmed_summary(s, plan.trim)?;
    Ok(Interval { center: t.mean, half_width: plan.x * t.variance.sqrt() / (n as f64).sqrt() })
}

/// `(1 - xi)^{-3/2} - 1 + sqrt(2) v / (1 - xi)`.
pub fn h_function(xi_star: f64, v: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&xi_star) {
        return domain(format!("xi_star must lie in [0, 1), got {xi_star}"));
    }
    if !(v >= 0.0) || !v.is_finite() {
        return domain(format!("v must be finite and >= 0, got {v}"));
    }
    let s = 1.0 - xi_star;
    Ok(s.powf(-1.5) - 1.0 + SQRT_2 * v / s)
}

/// `6 kappa (k/n)^{(p-2)/(4p-4)}`.
pub fn v_star(n: usize, k: usize, p: f64, kappa: f64) -> Result<f64> {
    check_moment_condition(p, kappa)?;
    if !(k >= 1 && k < n) {
        return domain(format!("v_* needs 1 <= k < n, got k={k}, n={n}"));
    }
    Ok(6.0 * kappa * (k as f64 / n as f64).powf((p - 2.0) / (4.0 * p - 4.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::order;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn k_for_tail_fixtures() {
        assert_eq!(k_for_tail(SQRT_2).unwrap(), 1);
        assert_eq!(k_for_tail(2.0).unwrap(), 2);
        assert_eq!(k_for_tail(3.0).unwrap(), 5);
        assert_eq!(k_for_tail(2.0000001).unwrap(), 3);
        assert!(k_for_tail(0.0).is_err());
        assert!(k_for_tail(-1.0).is_err());
    }

    #[test]
    fn all_subgaussian_fixtures() {
        let c = 3.0 * SQRT_2 + 8.0 + (4.0 + 4.0 * SQRT_2) * 2.0;
        let (plan, hw) = plan_all_subgaussian(2.0, 400, 1.0).unwrap();
        assert!(close(hw, c / 20.0, 1e-14));
        assert!((hw - 1.5778).abs() < 1e-4);
        assert_eq!(plan.trim, TrimSpec::symmetric(2));
        assert!(close(plan.failure_bound, 4.0 * (-2.0f64).exp(), 1e-14));
        let (_, hw) = plan_all_subgaussian(1.0, 10_000, 2.0).unwrap();
        assert!((hw - 0.43799).abs() < 1e-5, "{hw}");
    }

    #[test]
    fn all_subgaussian_range_boundary() {
        let m = thm_all_max_x(100).unwrap();
        assert!(plan_all_subgaussian(m, 100, 1.0).is_ok());
        let err = plan_all_subgaussian(m * (1.0 + 1e-12), 100, 1.0).unwrap_err();
        assert!(err.to_string().contains("sqrt(n/(sqrt2+1)^2 - 2)"));
        assert!(thm_all_max_x(11).is_none());
        assert!(plan_all_subgaussian(1.0, 11, 1.0).is_err());
    }

    #[test]
    fn sharper_fixtures() {
        match plan_sharper(1.0, 1_000_000, 4.0, 1.0, 1.0).unwrap() {
            SharperOutcome::Infeasible { a_min } => {
                let want = 216.0 * SQRT_2 * 4.0 / 1e6 + 24.0 * (2.0f64 / 1e3).cbrt();
                assert!(close(a_min, want, 1e-13));
                assert!((a_min - 3.03).abs() < 0.005);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        match plan_sharper(1.0, 10_000_000_000, 4.0, 1.0, 1.0).unwrap() {
            SharperOutcome::Feasible { plan, half_width } => {
                let a = plan.certificate.unwrap();
                assert!((a - 0.651).abs() < 5e-4, "{a}");
                assert!(close(half_width, (a * SQRT_2 + (1.0 + a)) / 1e5, 1e-13));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        let mut prev = f64::INFINITY;
        for e in 3..15 {
            let a = sharper_a_min(1.0, 10usize.pow(e), 4.0, 1.0);
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn multiple_fixtures() {
        assert_eq!(k_multiple(1_000_000, 4.0, 1.0).unwrap(), None);
        assert!((multiple_condition(1_000_000, 1, 4.0, 1.0) - 3.39).abs() < 0.01);
        assert_eq!(k_multiple(2_000_000_000, 4.0, 1.0).unwrap(), Some(1));
        assert!((multiple_condition(2_000_000_000, 1, 4.0, 1.0) - 0.956).abs() < 1e-3);
        assert!((multiple_condition(2_000_000_000, 2, 4.0, 1.0) - 1.52).abs() < 0.01);
        let plan = plan_multiple(1.0, 2_000_000_000, 4.0, 1.0).unwrap().unwrap();
        assert_eq!(plan.trim.k1, 1);
        assert!(plan_multiple(1.5, 2_000_000_000, 4.0, 1.0).is_err());
        assert!(plan_multiple(1.0, 1_000_000, 4.0, 1.0).unwrap().is_none());
    }

    #[test]
    fn multiple_binary_search_matches_scan() {
        for &(n, p, kappa) in &[
            (10_000_000_000usize, 4.0, 1.0),
            (1_000_000_000_000, 3.0, 1.2),
            (500_000_000_000, 6.0, 1.0),
            (1_000_000, 50.0, 1.0),
        ] {
            let scan = (1..=10_000).take_while(|&k| multiple_condition(n, k, p, kappa) <= 1.0).last();
            assert_eq!(k_multiple(n, p, kappa).unwrap(), scan, "n={n} p={p}");
        }
        let mut prev = None;
        for e in 6..14 {
            let k = k_multiple(10usize.pow(e), 4.0, 1.0).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn contaminated_fixtures() {
        let c = k_contaminated(1000, 0.01, 0.05).unwrap();
        assert_eq!(c.k, 15);
        let want = (29f64.sqrt() + 5f64.sqrt()).powi(2) / 1000.0;
        assert!(close(c.d, want, 1e-14));
        assert!((c.d - 0.0581).abs() < 5e-5);
        assert!(c.feasible);
        assert_eq!(k_contaminated(1000, 0.0, 0.05).unwrap().k, 5);
        assert_eq!(k_contaminated(1000, 1e-9, 0.05).unwrap().k, 5);
        let c = k_contaminated(30, 0.4, 0.01).unwrap();
        assert_eq!(c.k, 18);
        assert!(!c.feasible);
        assert!(k_contaminated(30, 0.5, 0.01).is_err());
        assert!(k_contaminated(30, 0.1, 0.0).is_err());
    }

    #[test]
    fn precise_plan_fixtures() {
        let plan = precise_ci_plan(1_000_000, 0.05, 0.1, 4.0, 3f64.powf(0.25), 10.0).unwrap();
        assert!((plan.x - 1.959964).abs() < 1e-6);
        assert_eq!(plan.trim, TrimSpec::symmetric(8));
        let gamma = plan.certificate.unwrap();
        assert!(close(gamma, 3f64.powf(0.25) * 3.2, 1e-12), "{gamma}");
        assert!(!plan.feasible);
        // The plan's k_* makes 4 e^{-k} at most delta (1 - Phi(x)).
        for (alpha, delta) in [(0.05, 0.1), (1e-6, 0.5), (0.3, 0.01)] {
            let plan = precise_ci_plan(1000, alpha, delta, 4.0, 1.0, 10.0).unwrap();
            let tail = gaussian::sf(plan.x);
            assert!(4.0 * (-(plan.trim.k1 as f64)).exp() <= delta * tail * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gamma_exponent_identity() {
        for p in [2.001f64, 2.5, 3.0, 4.0, 7.5, 100.0] {
            let lhs = 2.0 - p / (4.0 * p - 4.0);
            let rhs = (7.0 * p - 8.0) / (4.0 * p - 4.0);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn ci_from_sample_fixtures() {
        let plan = ConfidencePlan {
            regime: Regime::ThmPrecise,
            n: 100,
            x: 1.959964,
            trim: TrimSpec::symmetric(2),
            rule: HalfWidthRule::EmpiricalSigma,
            certificate: Some(0.0),
            failure_bound: 0.05,
            feasible: true,
        };
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let ci = ci_from_sample(&order(&v).unwrap(), &plan).unwrap();
        assert_eq!(ci.center, 50.5);
        let var: f64 = (3..=98).map(|i| (i as f64 - 50.5).powi(2)).sum::<f64>() / 96.0;
        // 96 consecutive integers: variance (96^2 - 1) / 12.
        assert!((var - (96.0 * 96.0 - 1.0) / 12.0).abs() < 1e-9);
        assert!(close(ci.half_width, 1.959964 * var.sqrt() / 10.0, 1e-12));
        assert!((ci.half_width - 5.4313).abs() < 1e-4);

        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let ci2 = ci_from_sample(&order(&doubled).unwrap(), &plan).unwrap();
        assert!(close(ci2.half_width, 2.0 * ci.half_width, 1e-12));

        let c = ci_from_sample(&order(&vec![3.0; 100]).unwrap(), &plan).unwrap();
        assert_eq!(c.half_width, 0.0);
        assert!(c.contains(3.0));
        assert!(ci_from_sample(&order(&[1.0, 2.0, 3.0, 4.0]).unwrap(), &plan).is_err());
    }

    #[test]
    fn h_and_v_star() {
        assert_eq!(h_function(0.0, 0.0).unwrap(), 0.0);
        assert!((h_function(0.5, 1.0).unwrap() - (4.0 * SQRT_2 - 1.0)).abs() < 1e-12);
        assert!((h_function(0.5, 0.0).unwrap() - (2.0 * SQRT_2 - 1.0)).abs() < 1e-12);
        assert!(h_function(1.0, 0.0).is_err());
        assert!(h_function(0.2, 0.3).unwrap() < h_function(0.3, 0.3).unwrap());
        assert!(h_function(0.2, 0.3).unwrap() < h_function(0.2, 0.4).unwrap());

        let v = v_star(10_000, 1, 4.0, 1.0).unwrap();
        assert!((v - 6.0 * 1e-4f64.powf(1.0 / 6.0)).abs() < 1e-14);
        assert!((v - 1.29266).abs() < 1e-5);
        assert!((v_star(10_000, 1, 4.0, 2.0).unwrap() - 2.0 * v).abs() < 1e-14);
        assert!(v_star(10, 10, 4.0, 1.0).is_err());
    }

    #[test]
    fn planners_are_monotone() {
        for &x in &[0.5, 1.0, 2.0, 3.0] {
            let mut prev = f64::INFINITY;
            for n in [200usize, 1000, 10_000, 100_000] {
                let (plan, hw) = plan_all_subgaussian(x, n, 1.0).unwrap();
                assert!(hw <= prev);
                assert!(plan.failure_bound <= gaussian_failure(x));
                prev = hw;
            }
        }
        let n = 100_000;
        let mut prev = (0.0, 0.0);
        for &x in &[0.5, 1.0, 2.0, 3.0] {
            let (plan, hw) = plan_all_subgaussian(x, n, 1.0).unwrap();
            assert!(hw >= prev.0);
            assert!(plan.failure_bound <= 1.0);
            prev = (hw, plan.failure_bound);
        }
        let mut prev = 1.0f64;
        for alpha in [0.3, 0.1, 0.01, 1e-4] {
            let plan = precise_ci_plan(10_000, alpha, 0.1, 4.0, 1.0, 10.0).unwrap();
            assert!(plan.x >= gaussian::upper_quantile(prev / 2.0));
            prev = alpha;
        }
    }
}
