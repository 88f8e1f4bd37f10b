//! Deterministic replication engine and the simulation studies built on it.
//!
//! Replicate `r` draws its sample from stream `2r` of the configured seed and
//! any auxiliary randomness from stream `2r + 1`, so results never depend on
//! how replicates are scheduled across threads.

mod binomial;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::{contaminate_stream, ContaminationSpec};
use crate::distributions::{moment_profile, DistributionSpec, Moment, Sampler};
use crate::error::{domain, Error, Result};
use crate::estimators::{catoni, median_of_means, OrderedSample, TrimSpec};
use crate::gaussian;
use crate::rng::{aux_stream, sample_stream, Seed};
use crate::tuning::{ci_from_sample, ConfidencePlan};

pub use binomial::{binomial_cdf, clopper_pearson, CONFIDENCE};
pub use verify::{
    verify, BoundReport, InequalityCase, Verdict, DEFAULT_PERTURBATION_X, DETERMINISTIC_TOLERANCE,
};

/// Runs `f(r)` for `r = 0..reps` and returns results in replicate order.
/// `workers` sizes a dedicated pool; `None` uses the global one.
pub fn run_replicates<T, F>(reps: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let go = || (0..reps as u64).into_par_iter().map(&f).collect::<Vec<T>>();
    match workers {
        None => Ok(go()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(go))
        }
    }
}

/// Like [`run_replicates`], but collects the first error.
pub fn try_run_replicates<T, F>(reps: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    run_replicates(reps, workers, f)?.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EstimatorSpec {
    Trimmed { k1: usize, k2: usize },
    SampleMean,
    MedianOfMeans { blocks: usize },
    /// `scale: None` uses the sample standard deviation of each replicate.
    Catoni { scale: Option<f64> },
}

impl EstimatorSpec {
    pub fn trimmed(k: usize) -> Self {
        Self::Trimmed { k1: k, k2: k }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Trimmed { k1, k2 } if k1 == k2 => format!("trimmed_k{k1}"),
            Self::Trimmed { k1, k2 } => format!("trimmed_k{k1}_{k2}"),
            Self::SampleMean => "sample_mean".into(),
            Self::MedianOfMeans { blocks } => format!("median_of_means_b{blocks}"),
            Self::Catoni { .. } => "catoni".into(),
        }
    }

    /// Rejects configurations the estimator cannot evaluate at sample size `n`.
    pub fn check(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            Self::Trimmed { k1, k2 } => TrimSpec::new(k1, k2).check(n).or_else(|e| bad(e.to_string())),
            Self::SampleMean => Ok(()),
            Self::MedianOfMeans { blocks } if blocks == 0 || blocks > n => {
                bad(format!("median of means needs 1 <= blocks <= n, got {blocks} for n={n}"))
            }
            Self::MedianOfMeans { .. } => Ok(()),
            Self::Catoni { .. } if n < 2 => bad("catoni needs n >= 2".into()),
            Self::Catoni { scale: Some(s) } if !(s > 0.0 && s.is_finite()) => {
                bad(format!("catoni scale must be positive, got {s}"))
            }
            Self::Catoni { .. } => Ok(()),
        }
    }

    /// Evaluates on a sample in draw order. `buf` is scratch space.
    pub fn estimate(&self, sample: &[f64], buf: &mut Vec<f64>) -> Result<f64> {
        match *self {
            Self::Trimmed { k1, k2 } => {
                TrimSpec::new(k1, k2).check(sample.len())?;
                buf.clear();
                buf.extend_from_slice(sample);
                buf.sort_unstable_by(f64::total_cmp);
                let kept = &buf[k1..buf.len() - k2];
                Ok(kept.iter().sum::<f64>() / kept.len() as f64)
            }
            Self::SampleMean => Ok(sample.iter().sum::<f64>() / sample.len() as f64),
            Self::MedianOfMeans { blocks } => median_of_means(sample, blocks),
            Self::Catoni { scale } => {
                let scale = match scale {
                    Some(s) => s,
                    None => sample_sd(sample).max(f64::MIN_POSITIVE),
                };
                let tol = 1e-10 * scale;
                catoni(sample, scale, tol)
            }
        }
    }
}

/// Standard deviation with the `n - 1` divisor.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dist: DistributionSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: Seed,
    pub estimator: EstimatorSpec,
    pub contamination: Option<ContaminationSpec>,
    /// Thread count; results do not depend on it.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(dist: DistributionSpec, n: usize, reps: usize, seed: Seed, estimator: EstimatorSpec) -> Self {
        Self { dist, n, reps, seed, estimator, contamination: None, workers: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.n == 0 || self.reps == 0 {
            return Err(Error::Config(format!("n and reps must be positive, got n={}, reps={}", self.n, self.reps)));
        }
        if let Some(c) = &self.contamination {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.estimator.check(self.n)
    }

    /// Sample of replicate `r`, contaminated if configured.
    pub fn replicate_sample(&self, sampler: &Sampler, r: u64) -> Result<Vec<f64>> {
        let clean = sampler.draw(self.n, self.seed, sample_stream(r));
        match &self.contamination {
            Some(c) => contaminate_stream(&clean, c, self.seed, aux_stream(r)),
            None => Ok(clean),
        }
    }
}

/// One estimate per replicate.
pub fn replicate(config: &ExperimentConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let sampler = config.dist.sampler()?;
    try_run_replicates(config.reps, config.workers, |r| {
        let sample = config.replicate_sample(&sampler, r)?;
        config.estimator.estimate(&sample, &mut Vec::with_capacity(config.n))
    })
}

/// Empirical probability with exact two-sided 95% binomial bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub exceed_count: usize,
    pub reps: usize,
    pub p_hat: f64,
    pub cp_low: f64,
    pub cp_high: f64,
}

impl TailEstimate {
    pub fn from_counts(exceed_count: usize, reps: usize) -> Result<Self> {
        if reps == 0 || exceed_count > reps {
            return domain(format!("invalid counts {exceed_count} of {reps}"));
        }
        let (cp_low, cp_high) = clopper_pearson(exceed_count, reps, CONFIDENCE);
        Ok(Self { exceed_count, reps, p_hat: exceed_count as f64 / reps as f64, cp_low, cp_high })
    }
}

/// Fraction of estimates with `|est - center| > threshold`.
pub fn tail_probability(estimates: &[f64], center: f64, threshold: f64) -> Result<TailEstimate> {
    if estimates.is_empty() {
        return domain("no estimates");
    }
    if !(threshold >= 0.0) {
        return domain(format!("threshold must be >= 0, got {threshold}"));
    }
    let count = estimates.iter().filter(|&&e| (e - center).abs() > threshold).count();
    TailEstimate::from_counts(count, estimates.len())
}

/// Fraction of replicates whose `ci_from_sample` interval contains `true_mean`.
pub fn coverage(config: &ExperimentConfig, plan: &ConfidencePlan, true_mean: f64) -> Result<TailEstimate> {
    config.validate()?;
    if plan.n != config.n {
        return Err(Error::Config(format!("plan is for n={} but the experiment uses n={}", plan.n, config.n)));
    }
    let sampler = config.dist.sampler()?;
    let hits = try_run_replicates(config.reps, config.workers, |r| {
        let sample = OrderedSample::new(config.replicate_sample(&sampler, r)?)?;
        Ok(ci_from_sample(&sample, plan)?.contains(true_mean))
    })?;
    TailEstimate::from_counts(hits.into_iter().filter(|&h| h).count(), config.reps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinRow {
    pub estimator: String,
    pub dof: f64,
    pub replicate: usize,
    pub estimate: f64,
}

pub const VIOLIN_DOFS: [f64; 4] = [1.0, 1.5, 2.0, 2.5];
pub const VIOLIN_N: usize = 1000;
pub const VIOLIN_REPS: usize = 100;
pub const VIOLIN_K: usize = 6;

/// Catoni, sample mean and the `k = 6` trimmed mean on the same Student-t
/// samples, `n = 1000`, 100 replicates per degree of freedom.
pub fn violin_experiment(seed: Seed, workers: Option<usize>) -> Result<Vec<ViolinRow>> {
    let estimators = [EstimatorSpec::Catoni { scale: None }, EstimatorSpec::SampleMean, EstimatorSpec::trimmed(VIOLIN_K)];
    let mut rows = Vec::with_capacity(estimators.len() * VIOLIN_DOFS.len() * VIOLIN_REPS);
    for (d, &dof) in VIOLIN_DOFS.iter().enumerate() {
        let sampler = DistributionSpec::student_t(dof)?.sampler()?;
        let per_rep = try_run_replicates(VIOLIN_REPS, workers, |r| {
            let global = (d * VIOLIN_REPS) as u64 + r;
            let sample = sampler.draw(VIOLIN_N, seed, sample_stream(global));
            let mut buf = Vec::with_capacity(VIOLIN_N);
            estimators.iter().map(|e| e.estimate(&sample, &mut buf)).collect::<Result<Vec<f64>>>()
        })?;
        for (e, est) in estimators.iter().enumerate() {
            for (r, vals) in per_rep.iter().enumerate() {
                rows.push(ViolinRow { estimator: est.name(), dof, replicate: r, estimate: vals[e] });
            }
        }
    }
    Ok(rows)
}

/// Kolmogorov-Smirnov distance between the empirical law of `values` and Phi.
pub fn ks_distance(values: &[f64]) -> f64 {
    let mut z = values.to_vec();
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = gaussian::cdf(v);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsPoint {
    pub n: usize,
    pub ks_distance: f64,
}

/// KS distance of `sqrt(n) (trimmed mean - mu) / sigma` from Phi for each `n`.
pub fn clt_convergence_check(
    dist: &DistributionSpec,
    k: usize,
    n_list: &[usize],
    reps: usize,
    seed: Seed,
    workers: Option<usize>,
) -> Result<Vec<KsPoint>> {
    let profile = moment_profile(dist, &[2.0])?;
    let (Some(mu), Moment::Finite(sigma)) = (profile.mean, profile.sigma) else {
        return domain(format!("normality check needs a finite variance, {dist} has none"));
    };
    if sigma <= 0.0 {
        return domain("normality check needs sigma > 0");
    }
    if reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    let sampler = dist.sampler()?;
    let mut out = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let est = EstimatorSpec::trimmed(k);
        est.check(n)?;
        let offset = (i * reps) as u64;
        let z = try_run_replicates(reps, workers, |r| {
            let sample = sampler.draw(n, seed, sample_stream(offset + r));
            let m = est.estimate(&sample, &mut Vec::with_capacity(n))?;
            Ok((n as f64).sqrt() * (m - mu) / sigma)
        })?;
        out.push(KsPoint { n, ks_distance: ks_distance(&z) });
    }
    Ok(out)
}

/// Interquartile range with linear interpolation between order statistics.
pub fn iqr(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::precise_ci_plan;

    #[test]
    fn single_replicate_is_direct_call() {
        let dist = DistributionSpec::student_t(2.0).unwrap();
        let cfg = ExperimentConfig::new(dist.clone(), 50, 1, Seed(11), EstimatorSpec::trimmed(3));
        let got = replicate(&cfg).unwrap();
        let sample = dist.sample_stream(50, Seed(11), 0).unwrap();
        let s = OrderedSample::new(sample).unwrap();
        let want = crate::estimators::trimmed_mean(&s, TrimSpec::symmetric(3)).unwrap();
        assert_eq!(got, vec![want]);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let mut cfg = ExperimentConfig::new(
            DistributionSpec::lognormal(0.0, 1.0).unwrap(),
            200,
            64,
            Seed(5),
            EstimatorSpec::Catoni { scale: None },
        );
        cfg.contamination = Some(ContaminationSpec::new(0.05, crate::contamination::Strategy::SignFlip).unwrap());
        cfg.workers = Some(1);
        let a = replicate(&cfg).unwrap();
        cfg.workers = Some(8);
        assert_eq!(a, replicate(&cfg).unwrap());
        cfg.workers = None;
        assert_eq!(a, replicate(&cfg).unwrap());
    }

    #[test]
    fn normal_envelope() {
        let cfg = ExperimentConfig::new(
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            1000,
            100,
            Seed::DEFAULT,
            EstimatorSpec::trimmed(6),
        );
        assert!(replicate(&cfg).unwrap().iter().all(|e| e.abs() <= 0.2));
    }

    #[test]
    fn configuration_errors_come_first() {
        let cfg = ExperimentConfig::new(
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            10,
            5,
            Seed(1),
            EstimatorSpec::trimmed(5),
        );
        assert!(matches!(replicate(&cfg), Err(Error::Config(_))));
        let cfg = ExperimentConfig { reps: 0, ..cfg };
        assert!(matches!(replicate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn tail_fixtures() {
        let t = tail_probability(&[0.0; 100], 0.0, 0.5).unwrap();
        assert_eq!((t.p_hat, t.cp_low), (0.0, 0.0));
        assert!((t.cp_high - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-12);
        assert!((t.cp_high - 0.03621669264517641).abs() < 1e-12);
        let t = tail_probability(&[1.0, -1.0], 0.0, 0.5).unwrap();
        assert_eq!(t.p_hat, 1.0);
        let mut v = vec![0.0; 95];
        v.extend([3.0; 5]);
        let t = tail_probability(&v, 0.0, 1.0).unwrap();
        assert_eq!(t.p_hat, 0.05);
        assert!((t.cp_low - 0.016431879182052155).abs() < 1e-9);
        assert!((t.cp_high - 0.11283491110546275).abs() < 1e-9);
        assert!(tail_probability(&[], 0.0, 1.0).is_err());
    }

    #[test]
    fn coverage_edge_cases() {
        let point = DistributionSpec::empirical(vec![2.0]).unwrap();
        let cfg = ExperimentConfig::new(point, 50, 20, Seed(1), EstimatorSpec::SampleMean);
        let plan = precise_ci_plan(50, 0.05, 0.1, 4.0, 1.0, 10.0).unwrap();
        assert_eq!(coverage(&cfg, &plan, 2.0).unwrap().p_hat, 1.0);

        let cfg = ExperimentConfig::new(DistributionSpec::normal(0.0, 1.0).unwrap(), 50, 20, Seed(1), EstimatorSpec::SampleMean);
        let mut zero = plan.clone();
        zero.x = 0.0;
        assert_eq!(coverage(&cfg, &zero, 0.0).unwrap().p_hat, 0.0);
        let wrong_n = precise_ci_plan(60, 0.05, 0.1, 4.0, 1.0, 10.0).unwrap();
        assert!(coverage(&cfg, &wrong_n, 0.0).is_err());
    }

    #[test]
    fn ks_against_exact_values() {
        // Single point at 0: the empirical CDF jumps from 0 to 1 where Phi = 1/2.
        assert!((ks_distance(&[0.0]) - 0.5).abs() < 1e-15);
        // Points at the Phi-quantiles (i - 1/2)/m give distance 1/(2m).
        let m = 40;
        let z: Vec<f64> = (0..m).map(|i| gaussian::quantile((i as f64 + 0.5) / m as f64)).collect();
        assert!((ks_distance(&z) - 0.5 / m as f64).abs() < 1e-12);
    }

    #[test]
    fn normal_sample_mean_is_normal() {
        let d = DistributionSpec::normal(1.0, 3.0).unwrap();
        let ks = clt_convergence_check(&d, 0, &[5, 50], 2000, Seed(3), None).unwrap();
        // 99.9% KS critical value at m = 2000 is about 1.95 / sqrt(2000).
        assert!(ks.iter().all(|p| p.ks_distance < 1.95 / 2000f64.sqrt()), "{ks:?}");
        let cauchy = DistributionSpec::student_t(1.0).unwrap();
        assert!(clt_convergence_check(&cauchy, 0, &[5], 10, Seed(3), None).is_err());
    }

    #[test]
    fn violin_shape() {
        let rows = violin_experiment(Seed(2), None).unwrap();
        assert_eq!(rows.len(), 1200);
        assert_eq!(rows, violin_experiment(Seed(2), Some(3)).unwrap());
    }

    #[test]
    fn iqr_interpolates() {
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
        assert_eq!(iqr(&[4.0, 1.0, 3.0, 2.0]), 1.5);
    }
}
