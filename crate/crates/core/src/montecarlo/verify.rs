//! Simulation and deterministic checks of the concentration inequalities.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{quantile_sorted, try_run_replicates, EstimatorSpec, TailEstimate};
use crate::contamination::{contaminate_stream, order_stats_sandwiched, sandwich_holds, ContaminationSpec, Strategy};
use crate::distributions::{
    moment_profile, population_bound_check, rho_oracle, CheckStatus, DistributionSpec, Moment, BOUND_TOLERANCE,
};
use crate::error::{domain, Result};
use crate::estimators::{trimmed_mean, OrderedSample, TrimSpec};
use crate::gaussian::{tail_perturbation_bounds, tail_ratio};
use crate::rng::{aux_stream, sample_stream, Seed, UniformStream};
use crate::tuning::{k_contaminated, k_for_tail, k_multiple, thm_all_max_x};

/// Slack for deterministic comparisons, relative to `max(1, |rhs|)`.
pub const DETERMINISTIC_TOLERANCE: f64 = BOUND_TOLERANCE;

/// `x` grid `0, 0.5, ..., 5` for the Gaussian tail perturbation check.
pub const DEFAULT_PERTURBATION_X: [f64; 11] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum InequalityCase {
    /// `P(Zbar - mu >= z sigma / sqrt(n) + z^2 Delta / (12 n)) <= exp(-z^2/2)`, bounded laws.
    Bernstein { dist: DistributionSpec, n: usize, z: f64 },
    /// `P(U_(k) > (sqrt(k-1) + sqrt(t))^2 / n) <= exp(-t)`.
    OrderStatUpper { n: usize, k: usize, t: f64 },
    /// `P(U_(k) < (sqrt(k) - sqrt(t))^2 / n) <= exp(-2t)`, for `t <= k`.
    OrderStatLower { n: usize, k: usize, t: f64 },
    /// Deviations of the empirical standard deviation, bounded laws.
    EmpiricalVariance { dist: DistributionSpec, n: usize, z: f64 },
    /// `P(Xi > (sqrt(k1+k2-1) + sqrt(t))^2 / n) <= exp(-t)`.
    XiConcentration { n: usize, k1: usize, k2: usize, t: f64 },
    /// Tail of the trimmed width in terms of `nu_p` and `rho_p`.
    WidthTail { dist: DistributionSpec, n: usize, k1: usize, k2: usize, p: f64, t: f64 },
    /// `P(Delta_{n,k} > 12 v sigma sqrt(n/k)) <= exp(-k)`; `v` defaults to the smallest admissible value.
    WidthCorollary { dist: DistributionSpec, n: usize, k: usize, v: Option<f64> },
    /// Distribution-free sub-Gaussian tail at `k = ceil(x^2/2)`.
    ThmAllTail { dist: DistributionSpec, n: usize, x: f64 },
    /// Multiple-level tail at the largest admissible `k_*`.
    ThmMultipleTail { dist: DistributionSpec, n: usize, p: f64, x: f64 },
    /// Contaminated trimmed mean stays inside the clean sandwich in every replicate.
    ThmContaminated { dist: DistributionSpec, n: usize, eps: f64, alpha: f64, strategy: Option<Strategy> },
    /// Tail ratio of Phi under a shift, on an `x` grid.
    GaussianPerturbation { x_grid: Vec<f64> },
    /// Trimmed population bias, variance and moment bounds on an `(a, b)` grid.
    PopulationBounds { dist: DistributionSpec, ab: Vec<(f64, f64)>, p_list: Vec<f64>, q: f64 },
}

impl InequalityCase {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Bernstein { .. } => "bernstein",
            Self::OrderStatUpper { .. } => "order_stat_upper",
            Self::OrderStatLower { .. } => "order_stat_lower",
            Self::EmpiricalVariance { .. } => "empirical_variance",
            Self::XiConcentration { .. } => "xi_concentration",
            Self::WidthTail { .. } => "width_tail",
            Self::WidthCorollary { .. } => "width_corollary",
            Self::ThmAllTail { .. } => "thm_all_tail",
            Self::ThmMultipleTail { .. } => "thm_multiple_tail",
            Self::ThmContaminated { .. } => "thm_contaminated",
            Self::GaussianPerturbation { .. } => "gaussian_perturbation",
            Self::PopulationBounds { .. } => "population_bounds",
        }
    }

    /// Whether the case needs simulation (as opposed to deterministic evaluation).
    pub fn is_empirical(&self) -> bool {
        !matches!(self, Self::GaussianPerturbation { .. } | Self::PopulationBounds { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    ViolatedBeyondMcError,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality: String,
    pub params: BTreeMap<String, Value>,
    pub p_hat: Option<f64>,
    pub cp_low: Option<f64>,
    pub cp_high: Option<f64>,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
    pub exceed_count: Option<usize>,
    pub reps: Option<usize>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// Exact probability of the event, when it has a closed form.
    pub exact: Option<f64>,
    pub note: Option<String>,
}

impl BoundReport {
    fn base(id: &str, params: BTreeMap<String, Value>, seed: Seed) -> Self {
        Self {
            inequality: id.into(),
            params,
            p_hat: None,
            cp_low: None,
            cp_high: None,
            bound: None,
            verdict: Verdict::NotApplicable,
            seed: seed.0,
            exceed_count: None,
            reps: None,
            lhs: None,
            rhs: None,
            exact: None,
            note: None,
        }
    }

    fn not_applicable(id: &str, params: BTreeMap<String, Value>, seed: Seed, why: impl Into<String>) -> Self {
        Self { note: Some(why.into()), ..Self::base(id, params, seed) }
    }

    fn empirical(id: &str, params: BTreeMap<String, Value>, seed: Seed, tail: TailEstimate, bound: f64) -> Self {
        let verdict = if tail.cp_low > bound { Verdict::ViolatedBeyondMcError } else { Verdict::Consistent };
        Self {
            p_hat: Some(tail.p_hat),
            cp_low: Some(tail.cp_low),
            cp_high: Some(tail.cp_high),
            bound: Some(bound),
            verdict,
            exceed_count: Some(tail.exceed_count),
            reps: Some(tail.reps),
            ..Self::base(id, params, seed)
        }
    }

    fn deterministic(id: &str, params: BTreeMap<String, Value>, seed: Seed, lhs: f64, rhs: f64) -> Self {
        let ok = lhs <= rhs + DETERMINISTIC_TOLERANCE * rhs.abs().max(1.0);
        Self {
            bound: Some(rhs),
            lhs: Some(lhs),
            rhs: Some(rhs),
            verdict: if ok { Verdict::Consistent } else { Verdict::ViolatedBeyondMcError },
            ..Self::base(id, params, seed)
        }
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::ViolatedBeyondMcError
    }
}

fn params<const N: usize>(entries: [(&str, Value); N]) -> BTreeMap<String, Value> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn simulate_event<F>(reps: usize, workers: Option<usize>, event: F) -> Result<TailEstimate>
where
    F: Fn(u64) -> Result<bool> + Sync + Send,
{
    if reps == 0 {
        return domain("reps must be positive");
    }
    let hits = try_run_replicates(reps, workers, event)?;
    TailEstimate::from_counts(hits.into_iter().filter(|&h| h).count(), reps)
}

/// `U_(k)` (1-based) of `n` uniforms from replicate `r`.
fn uniform_order_stat(n: usize, k: usize, seed: Seed, r: u64) -> f64 {
    let mut s = UniformStream::new(seed, sample_stream(r));
    let mut u: Vec<f64> = (0..n).map(|_| s.next_open01()).collect();
    *u.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

fn sorted_draw(sampler: &crate::distributions::Sampler, n: usize, seed: Seed, r: u64) -> Vec<f64> {
    let mut x = sampler.draw(n, seed, sample_stream(r));
    x.sort_unstable_by(f64::total_cmp);
    x
}

fn check_n_k(n: usize, k: usize) -> Result<()> {
    if !(k >= 1 && k <= n) {
        return domain(format!("need 1 <= k <= n, got k={k}, n={n}"));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

/// Mean and standard deviation, or the reason they are unavailable.
fn mean_sigma(dist: &DistributionSpec) -> std::result::Result<(f64, f64), String> {
    let prof = moment_profile(dist, &[2.0]).map_err(|e| e.to_string())?;
    match (prof.mean, prof.sigma) {
        (None, _) => Err(format!("{dist} has no mean")),
        (_, Moment::Infinite) => Err(format!("{dist} has infinite variance")),
        (Some(m), Moment::Finite(s)) => Ok((m, s)),
    }
}

/// Evaluates `case` with `reps` replicates from `seed`. Grid cases return one
/// report per grid point.
pub fn verify(case: &InequalityCase, reps: usize, seed: Seed, workers: Option<usize>) -> Result<Vec<BoundReport>> {
    let id = case.id();
    match case {
        InequalityCase::OrderStatUpper { n, k, t } => {
            let (n, k, t) = (*n, *k, *t);
            check_n_k(n, k)?;
            check_positive("t", t)?;
            let threshold = (((k - 1) as f64).sqrt() + t.sqrt()).powi(2) / n as f64;
            let ps = params([("n", json!(n)), ("k", json!(k)), ("t", json!(t)), ("threshold", json!(threshold))]);
            let tail = simulate_event(reps, workers, |r| Ok(uniform_order_stat(n, k, seed, r) > threshold))?;
            let mut rep = BoundReport::empirical(id, ps, seed, tail, (-t).exp());
            // U_(k) > lambda iff fewer than k uniforms fall below lambda.
            rep.exact = Some(super::binomial_cdf(k - 1, n, threshold.min(1.0)));
            Ok(vec![rep])
        }
        InequalityCase::OrderStatLower { n, k, t } => {
            let (n, k, t) = (*n, *k, *t);
            check_n_k(n, k)?;
            check_positive("t", t)?;
            let threshold = ((k as f64).sqrt() - t.sqrt()).powi(2) / n as f64;
            let ps = params([("n", json!(n)), ("k", json!(k)), ("t", json!(t)), ("threshold", json!(threshold))]);
            if t > k as f64 {
                return Ok(vec![BoundReport::not_applicable(
                    id,
                    ps,
                    seed,
                    format!("lower-tail display needs t <= k (sqrt(k) - sqrt(t) >= 0), got t={t}, k={k}"),
                )]);
            }
            let tail = simulate_event(reps, workers, |r| Ok(uniform_order_stat(n, k, seed, r) < threshold))?;
            let mut rep = BoundReport::empirical(id, ps, seed, tail, (-2.0 * t).exp());
            rep.exact = Some(1.0 - super::binomial_cdf(k - 1, n, threshold));
            Ok(vec![rep])
        }
        InequalityCase::XiConcentration { n, k1, k2, t } => {
            let (n, k1, k2, t) = (*n, *k1, *k2, *t);
            if k1 == 0 || k2 == 0 || k1 + k2 >= n {
                return domain(format!("need k1, k2 >= 1 and k1 + k2 < n, got k1={k1}, k2={k2}, n={n}"));
            }
            check_positive("t", t)?;
            let threshold = (((k1 + k2 - 1) as f64).sqrt() + t.sqrt()).powi(2) / n as f64;
            let ps = params([
                ("n", json!(n)),
                ("k1", json!(k1)),
                ("k2", json!(k2)),
                ("t", json!(t)),
                ("threshold", json!(threshold)),
            ]);
            let tail = simulate_event(reps, workers, |r| {
                let mut s = UniformStream::new(seed, sample_stream(r));
                let mut u: Vec<f64> = (0..n).map(|_| s.next_open01()).collect();
                let (_, lo, rest) = u.select_nth_unstable_by(k1 - 1, f64::total_cmp);
                let lo = *lo;
                // U_(n-k2+1) is the (n - k2 - k1 + 1)-th smallest of the rest.
                let hi = *rest.select_nth_unstable_by(n - k2 - k1, f64::total_cmp).1;
                Ok(1.0 - hi + lo > threshold)
            })?;
            let mut rep = BoundReport::empirical(id, ps, seed, tail, (-t).exp());
            // Xi has the law of U_(k1+k2).
            rep.exact = Some(super::binomial_cdf(k1 + k2 - 1, n, threshold.min(1.0)));
            Ok(vec![rep])
        }
        InequalityCase::Bernstein { dist, n, z } => {
            let (n, z) = (*n, *z);
            check_n_k(n, 1)?;
            check_positive("z", z)?;
            let ps = params([("dist", json!(dist.to_string())), ("n", json!(n)), ("z", json!(z))]);
            let Some(delta) = dist.support_radius() else {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, "needs a bounded law")]);
            };
            let (mu, sigma) = match mean_sigma(dist) {
                Ok(v) => v,
                Err(why) => return Ok(vec![BoundReport::not_applicable(id, ps, seed, why)]),
            };
            let nf = n as f64;
            let threshold = z * sigma / nf.sqrt() + z * z * delta / (12.0 * nf);
            let sampler = dist.sampler()?;
            let tail = simulate_event(reps, workers, |r| {
                let x = sampler.draw(n, seed, sample_stream(r));
                Ok(x.iter().sum::<f64>() / nf - mu >= threshold)
            })?;
            let mut ps = ps;
            ps.insert("threshold".into(), json!(threshold));
            Ok(vec![BoundReport::empirical(id, ps, seed, tail, (-z * z / 2.0).exp())])
        }
        InequalityCase::EmpiricalVariance { dist, n, z } => {
            let (n, z) = (*n, *z);
            check_n_k(n, 1)?;
            check_positive("z", z)?;
            let base = params([("dist", json!(dist.to_string())), ("n", json!(n)), ("z", json!(z))]);
            let Some(delta) = dist.support_radius() else {
                return Ok(vec![BoundReport::not_applicable(id, base, seed, "needs a bounded law")]);
            };
            let (mu, sigma) = match mean_sigma(dist) {
                Ok(v) if v.1 > 0.0 => v,
                Ok(_) => return Ok(vec![BoundReport::not_applicable(id, base, seed, "needs sigma > 0")]),
                Err(why) => return Ok(vec![BoundReport::not_applicable(id, base, seed, why)]),
            };
            let nf = n as f64;
            let t_known = z * delta / nf.sqrt() + z * z * delta * delta / (12.0 * nf * sigma);
            let t_sample = 2.0 * t_known;
            let sampler = dist.sampler()?;
            let pairs = try_run_replicates(reps, workers, |r| {
                let x = sampler.draw(n, seed, sample_stream(r));
                let known = (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / nf).sqrt();
                let m = x.iter().sum::<f64>() / nf;
                let sample = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / nf).sqrt();
                Ok(((known - sigma).abs() > t_known, (sample - sigma).abs() > t_sample))
            })?;
            let count = |f: fn(&(bool, bool)) -> bool| pairs.iter().filter(|p| f(p)).count();
            let mut out = Vec::new();
            for (name, threshold, hits, bound) in [
                ("known_mean", t_known, count(|p| p.0), 2.0 * (-z * z / 2.0).exp()),
                ("sample_mean", t_sample, count(|p| p.1), 4.0 * (-z * z / 2.0).exp()),
            ] {
                let mut ps = base.clone();
                ps.insert("statistic".into(), json!(name));
                ps.insert("threshold".into(), json!(threshold));
                out.push(BoundReport::empirical(id, ps, seed, TailEstimate::from_counts(hits, reps)?, bound));
            }
            Ok(out)
        }
        InequalityCase::WidthTail { dist, n, k1, k2, p, t } => {
            let (n, k1, k2, p, t) = (*n, *k1, *k2, *p, *t);
            if k1 == 0 || k2 == 0 || k1 + k2 >= n {
                return domain(format!("need k1, k2 >= 1 and k1 + k2 < n, got k1={k1}, k2={k2}, n={n}"));
            }
            check_positive("t", t)?;
            if !(p >= 1.0) || !p.is_finite() {
                return domain(format!("p must be finite and >= 1, got {p}"));
            }
            let ps = params([
                ("dist", json!(dist.to_string())),
                ("n", json!(n)),
                ("k1", json!(k1)),
                ("k2", json!(k2)),
                ("p", json!(p)),
                ("t", json!(t)),
            ]);
            let prof = moment_profile(dist, &[p])?;
            let Some(Moment::Finite(nu)) = prof.nu(p).filter(|_| prof.mean.is_some()) else {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, format!("nu_{p} is not finite"))]);
            };
            let kmin = k1.min(k2) as f64;
            let nf = n as f64;
            let xi = (2f64.powf(p) / t.powf(p) * kmin / nf).min(1.0);
            let rho = if nu > 0.0 { rho_oracle(dist, p, xi)? } else { 0.0 };
            let bound = (E * 2f64.powf(p) * rho.powf(p) / t.powf(p)).powf(kmin);
            let threshold = t * nu * (nf / kmin).powf(1.0 / p);
            let sampler = dist.sampler()?;
            let tail = simulate_event(reps, workers, |r| {
                let x = sorted_draw(&sampler, n, seed, r);
                Ok(x[n - k2] - x[k1 - 1] > threshold)
            })?;
            let mut ps = ps;
            ps.insert("threshold".into(), json!(threshold));
            ps.insert("rho".into(), json!(rho));
            Ok(vec![BoundReport::empirical(id, ps, seed, tail, bound)])
        }
        InequalityCase::WidthCorollary { dist, n, k, v } => {
            let (n, k) = (*n, *k);
            if k == 0 || 2 * k >= n {
                return domain(format!("need 1 <= k < n/2, got k={k}, n={n}"));
            }
            let mut ps = params([("dist", json!(dist.to_string())), ("n", json!(n)), ("k", json!(k))]);
            let (_, sigma) = match mean_sigma(dist) {
                Ok(v) => v,
                Err(why) => return Ok(vec![BoundReport::not_applicable(id, ps, seed, why)]),
            };
            let ratio = k as f64 / n as f64;
            let rho2 = |v: f64| -> Result<f64> {
                if sigma == 0.0 {
                    return Ok(0.0);
                }
                rho_oracle(dist, 2.0, (ratio / (36.0 * v * v)).min(1.0))
            };
            let admissible = |v: f64| -> Result<bool> { Ok(E / 6.0 * rho2(v)? <= v) };
            let v = match v {
                Some(v) => {
                    check_positive("v", *v)?;
                    if !admissible(*v)? {
                        ps.insert("v".into(), json!(v));
                        return Ok(vec![BoundReport::not_applicable(
                            id,
                            ps,
                            seed,
                            "v does not satisfy (e/6) rho_2(k / (36 v^2 n)) <= v",
                        )]);
                    }
                    *v
                }
                None => {
                    // The left side decreases and the right side increases in v;
                    // v = e/6 always works because rho <= 1.
                    let (mut lo, mut hi) = (0.0, E / 6.0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if admissible(mid)? {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    hi
                }
            };
            let threshold = 12.0 * v * sigma * (n as f64 / k as f64).sqrt();
            ps.insert("v".into(), json!(v));
            ps.insert("threshold".into(), json!(threshold));
            let sampler = dist.sampler()?;
            let tail = simulate_event(reps, workers, |r| {
                let x = sorted_draw(&sampler, n, seed, r);
                Ok(x[n - k] - x[k - 1] > threshold)
            })?;
            Ok(vec![BoundReport::empirical(id, ps, seed, tail, (-(k as f64)).exp())])
        }
        InequalityCase::ThmAllTail { dist, n, x } => {
            let (n, x) = (*n, *x);
            check_positive("x", x)?;
            let mut ps = params([("dist", json!(dist.to_string())), ("n", json!(n)), ("x", json!(x))]);
            let (mu, sigma) = match mean_sigma(dist) {
                Ok(v) => v,
                Err(why) => return Ok(vec![BoundReport::not_applicable(id, ps, seed, why)]),
            };
            match thm_all_max_x(n) {
                Some(m) if x <= m => {}
                _ => {
                    return Ok(vec![BoundReport::not_applicable(
                        id,
                        ps,
                        seed,
                        format!("x must be at most sqrt(n/(sqrt2+1)^2 - 2) for n={n}"),
                    )])
                }
            }
            let k = k_for_tail(x)?;
            let threshold = (3.0 * SQRT_2 + 8.0 + (4.0 + 4.0 * SQRT_2) * x) * sigma / (n as f64).sqrt();
            ps.insert("k".into(), json!(k));
            ps.insert("threshold".into(), json!(threshold));
            let tail = trimmed_tail(dist, n, k, mu, threshold, reps, seed, workers)?;
            Ok(vec![BoundReport::empirical(id, ps, seed, tail, 4.0 * (-x * x / 2.0).exp())])
        }
        InequalityCase::ThmMultipleTail { dist, n, p, x } => {
            let (n, p, x) = (*n, *p, *x);
            check_positive("x", x)?;
            let mut ps = params([("dist", json!(dist.to_string())), ("n", json!(n)), ("p", json!(p)), ("x", json!(x))]);
            if !(p > 2.0) {
                return domain(format!("p must exceed 2, got {p}"));
            }
            let prof = moment_profile(dist, &[p])?;
            let (Some(mu), Moment::Finite(sigma), Some(Moment::Finite(kappa))) = (prof.mean, prof.sigma, prof.kappa(p))
            else {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, format!("kappa_(2,{p}) is not finite"))]);
            };
            let kappa = kappa.max(1.0);
            ps.insert("kappa".into(), json!(kappa));
            let Some(k) = k_multiple(n, p, kappa)? else {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, "no k_* >= 1 satisfies the condition at this n")]);
            };
            ps.insert("k".into(), json!(k));
            if x > (2.0 * k as f64).sqrt() {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, "x exceeds sqrt(2 k_*)")]);
            }
            let threshold = (1.0 + x) * sigma / (n as f64).sqrt();
            ps.insert("threshold".into(), json!(threshold));
            let tail = trimmed_tail(dist, n, k, mu, threshold, reps, seed, workers)?;
            Ok(vec![BoundReport::empirical(id, ps, seed, tail, 4.0 * (-x * x / 2.0).exp())])
        }
        InequalityCase::ThmContaminated { dist, n, eps, alpha, strategy } => {
            let (n, eps, alpha) = (*n, *eps, *alpha);
            let plan = k_contaminated(n, eps, alpha)?;
            let strategy = strategy.unwrap_or(Strategy::BoundaryAdversary { k: plan.k });
            let mut ps = params([
                ("dist", json!(dist.to_string())),
                ("n", json!(n)),
                ("eps", json!(eps)),
                ("alpha", json!(alpha)),
                ("k", json!(plan.k)),
                ("d", json!(plan.d)),
                ("strategy", json!(strategy.to_string())),
            ]);
            if !plan.feasible {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, "needs d < 1 and 2k < n")]);
            }
            let Some(mu) = dist.mean() else {
                return Ok(vec![BoundReport::not_applicable(id, ps, seed, format!("{dist} has no mean"))]);
            };
            let spec = ContaminationSpec::new(eps, strategy)?;
            let sampler = dist.sampler()?;
            let k = plan.k;
            let rows = try_run_replicates(reps, workers, |r| {
                let clean = sampler.draw(n, seed, sample_stream(r));
                let dirty = contaminate_stream(&clean, &spec, seed, aux_stream(r))?;
                let clean = OrderedSample::new(clean)?;
                let dirty = OrderedSample::new(dirty)?;
                let held = sandwich_holds(&clean, &dirty, eps, k, k)? && order_stats_sandwiched(&clean, &dirty, eps)?;
                let t = TrimSpec::symmetric(k);
                let err = (trimmed_mean(&dirty, t)? - mu).abs();
                let clean_err = (trimmed_mean(&clean, t)? - mu).abs();
                Ok((held, err, clean_err))
            })?;
            let failures = rows.iter().filter(|r| !r.0).count();
            let mut errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let mut clean_errs: Vec<f64> = rows.iter().map(|r| r.2).collect();
            errs.sort_by(f64::total_cmp);
            clean_errs.sort_by(f64::total_cmp);
            ps.insert("error_quantile".into(), json!(quantile_sorted(&errs, 1.0 - alpha)));
            ps.insert("clean_error_quantile".into(), json!(quantile_sorted(&clean_errs, 1.0 - alpha)));
            let mut rep = BoundReport::deterministic(id, ps, seed, failures as f64, 0.0);
            rep.reps = Some(reps);
            rep.exceed_count = Some(failures);
            rep.note = Some("lhs counts replicates where the order-statistic sandwich failed".into());
            Ok(vec![rep])
        }
        InequalityCase::GaussianPerturbation { x_grid } => {
            let mut out = Vec::new();
            for &x in x_grid {
                if !(x >= 0.0) || !x.is_finite() {
                    return domain(format!("x must be finite and >= 0, got {x}"));
                }
                let m = x.max(1.0);
                for h in [-1.0 / (3.0 * m), -1.0 / (6.0 * m), 1.0 / (6.0 * m), 1.0 / (3.0 * m)] {
                    let (lower, upper) = tail_perturbation_bounds(x, h)?;
                    let ratio = tail_ratio(x, h)?;
                    let ps = params([("x", json!(x)), ("h", json!(h)), ("lower", json!(lower))]);
                    let mut rep = BoundReport::deterministic(id, ps, seed, ratio, upper);
                    if ratio < lower - DETERMINISTIC_TOLERANCE * lower {
                        rep.verdict = Verdict::ViolatedBeyondMcError;
                    }
                    out.push(rep);
                }
            }
            Ok(out)
        }
        InequalityCase::PopulationBounds { dist, ab, p_list, q } => {
            let mut out = Vec::new();
            for &(a, b) in ab {
                for &p in p_list {
                    let report = population_bound_check(dist, a, b, p, *q)?;
                    for c in report.checks {
                        let ps = params([
                            ("dist", json!(dist.to_string())),
                            ("a", json!(a)),
                            ("b", json!(b)),
                            ("p", json!(p)),
                            ("q", json!(q)),
                            ("check", json!(c.name)),
                        ]);
                        out.push(match c.status {
                            CheckStatus::NotApplicable(why) => BoundReport::not_applicable(id, ps, seed, why),
                            _ => {
                                let mut r = BoundReport::deterministic(id, ps, seed, c.lhs, c.rhs);
                                if c.status == CheckStatus::Violated {
                                    r.verdict = Verdict::ViolatedBeyondMcError;
                                }
                                r
                            }
                        });
                    }
                }
            }
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn trimmed_tail(
    dist: &DistributionSpec,
    n: usize,
    k: usize,
    mu: f64,
    threshold: f64,
    reps: usize,
    seed: Seed,
    workers: Option<usize>,
) -> Result<TailEstimate> {
    let est = EstimatorSpec::trimmed(k);
    est.check(n)?;
    let sampler = dist.sampler()?;
    simulate_event(reps, workers, |r| {
        let x = sampler.draw(n, seed, sample_stream(r));
        Ok((est.estimate(&x, &mut Vec::with_capacity(n))? - mu).abs() > threshold)
    })
}
