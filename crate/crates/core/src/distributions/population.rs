//! Trimmed population parameters, the tail-moment concentration function
//! `rho_{F,p}`, and deterministic checks of the population-level bounds.

use serde::{Deserialize, Serialize};

use super::moments::{central_moment, mean_of, QUAD_TOL};
use super::{DistributionSpec, Moment, Sampler};
use crate::error::{domain, Result};
use crate::quadrature::{integrate_u, Integral, UPoint};

/// Slack allowed when comparing the two sides of an inequality.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// `∫_a^b h(F^{-1}(u)) du`; exact for empirical laws.
fn integrate_law<H: Fn(f64) -> f64>(sampler: &Sampler, h: H, a: UPoint, b: UPoint) -> Integral {
    if let Some(sorted) = sampler.is_empirical() {
        let m = sorted.len() as f64;
        let total = sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let lo = (i as f64 / m).max(a.u);
                let hi = ((i + 1) as f64 / m).min(b.u);
                if hi > lo {
                    h(v) * (hi - lo)
                } else {
                    0.0
                }
            })
            .sum();
        return Integral::Finite(total);
    }
    integrate_u(&|u, uc| h(sampler.quantile_pair(u, uc)), a, b, QUAD_TOL)
}

/// `rho_{F,p}(xi)`: the largest share of `nu_p^p` that a sub-population of
/// probability at most `xi` can carry, raised to `1/p`.
///
/// The supremum is attained by the region where `|X - mu|` is largest. In the
/// quantile parametrization that region is `[0, s) ∪ (1 - xi + s, 1]`, with
/// `s` chosen so both ends have equal `|F^{-1} - mu|`; atoms on the boundary
/// are split fractionally, which is exactly what the `u`-parametrization does.
pub fn rho_oracle(dist: &DistributionSpec, p: f64, xi: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("rho requires finite p >= 1, got {p}"));
    }
    if !(0.0..=1.0).contains(&xi) {
        return domain(format!("rho requires 0 <= xi <= 1, got {xi}"));
    }
    let sampler = dist.sampler()?;
    let Some(mean) = mean_of(dist) else {
        return domain(format!("rho is undefined: {dist} has no mean"));
    };
    match central_moment(dist, &sampler, p) {
        Moment::Infinite => return domain(format!("rho requires finite nu_{p} for {dist}")),
        Moment::Finite(v) if v == 0.0 => return Ok(0.0),
        Moment::Finite(_) => {}
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    if xi == 1.0 {
        return Ok(1.0);
    }
    Ok(rho_with(&sampler, mean, p, xi))
}

pub(crate) fn rho_with(sampler: &Sampler, mean: f64, p: f64, xi: f64) -> f64 {
    if xi <= 0.0 {
        return 0.0;
    }
    if xi >= 1.0 {
        return 1.0;
    }
    let dev = |u: f64, uc: f64| (sampler.quantile_pair(u, uc) - mean).abs();
    let gap = |s: f64| dev(s, 1.0 - s) - dev(1.0 - (xi - s), xi - s);
    let (mut lo, mut hi) = (0.0_f64, xi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let pow = |x: f64| (x - mean).abs().powf(p);
    let left = integrate_law(sampler, pow, UPoint::ZERO, UPoint::lower(s));
    let right = integrate_law(sampler, pow, UPoint::upper(xi - s), UPoint::ONE);
    let total = integrate_law(sampler, pow, UPoint::ZERO, UPoint::ONE);
    match (left, right, total) {
        (Integral::Finite(l), Integral::Finite(r), Integral::Finite(t)) if t > 0.0 => {
            ((l + r) / t).powf(1.0 / p).clamp(0.0, 1.0)
        }
        _ => 1.0,
    }
}

/// Mean, spread and width of the law `F^{-1}(U)` with `U` uniform on `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedPopulation {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub sigma: f64,
    /// `F^{-1}(b) - F^{-1}(a)`.
    pub delta: f64,
    pub nu_p: Vec<(f64, f64)>,
    /// `1 - (b - a)`.
    pub xi: f64,
}

impl TrimmedPopulation {
    pub fn nu(&self, p: f64) -> Option<f64> {
        self.nu_p.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

pub fn trimmed_population(dist: &DistributionSpec, a: f64, b: f64, p_list: &[f64]) -> Result<TrimmedPopulation> {
    if !(a > 0.0 && a < b && b < 1.0) {
        return domain(format!("trimmed population requires 0 < a < b < 1, got a={a}, b={b}"));
    }
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
        return domain(format!("moment orders must be finite and >= 1, got {p}"));
    }
    let sampler = dist.sampler()?;
    Ok(trimmed_population_with(&sampler, a, b, p_list))
}

pub(crate) fn trimmed_population_with(sampler: &Sampler, a: f64, b: f64, p_list: &[f64]) -> TrimmedPopulation {
    let (ua, ub) = (UPoint::lower(a), UPoint::lower(b));
    let mass = b - a;
    let integral = |h: &dyn Fn(f64) -> f64| -> f64 {
        integrate_law(sampler, h, ua, ub).finite().expect("bounded integrand on [a, b]")
    };
    let mu = integral(&|x| x) / mass;
    let var = integral(&|x| (x - mu) * (x - mu)) / mass;
    let nu_p = p_list
        .iter()
        .map(|&p| (p, (integral(&|x| (x - mu).abs().powf(p)) / mass).powf(1.0 / p)))
        .collect();
    let delta = sampler.quantile_pair(b, 1.0 - b) - sampler.quantile_pair(a, 1.0 - a);
    TrimmedPopulation { a, b, mu, sigma: var.max(0.0).sqrt(), delta, nu_p, xi: 1.0 - mass }
}

/// Outcome of one inequality evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum CheckStatus {
    Satisfied,
    Violated,
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(flatten)]
    pub status: CheckStatus,
}

impl BoundCheck {
    fn compare(name: &str, lhs: f64, rhs: f64) -> Self {
        let ok = lhs <= rhs + BOUND_TOLERANCE * rhs.abs().max(1.0);
        Self {
            name: name.into(),
            lhs,
            rhs,
            status: if ok { CheckStatus::Satisfied } else { CheckStatus::Violated },
        }
    }

    fn not_applicable(name: &str, reason: impl Into<String>) -> Self {
        Self { name: name.into(), lhs: f64::NAN, rhs: f64::NAN, status: CheckStatus::NotApplicable(reason.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationBoundReport {
    pub dist: String,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub xi: f64,
    pub checks: Vec<BoundCheck>,
}

impl PopulationBoundReport {
    pub fn any_violated(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Violated)
    }
}

/// Evaluates both sides of the population-level bounds at `(a, b)`:
///
/// * `bias`: `|mu - mu^(a,b)| <= nu_p rho_p(xi) xi^{(p-1)/p} / (1 - xi)`;
/// * `sigma_trim`: `sigma^(a,b) <= sigma / (1 - xi)`;
/// * `sigma_trim_width`: `sigma^(a,b) <= sqrt(2) nu_q^{q/2} Delta^{1-q/2} / (1 - xi)`, `1 < q <= 2`;
/// * `sigma_recovery`: `sigma <= sqrt((1-xi) / (1 - (2-xi)/(1-xi) rho_2^2)) sigma^(a,b)`
///   when `xi < 1/2` and `rho_2(xi) < 1/3`;
/// * `nu_p_trim`: `nu_p^(a,b) <= ((1-xi)^{-1/p} + xi^{(p-1)/p} / (1-xi)) nu_p`.
pub fn population_bound_check(
    dist: &DistributionSpec,
    a: f64,
    b: f64,
    p: f64,
    q: f64,
) -> Result<PopulationBoundReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must be finite and >= 1, got {p}"));
    }
    let sampler = dist.sampler()?;
    if !(a > 0.0 && a < b && b < 1.0) {
        return domain(format!("trimmed population requires 0 < a < b < 1, got a={a}, b={b}"));
    }
    let tp = trimmed_population_with(&sampler, a, b, &[p]);
    let xi = tp.xi;
    let mut checks = Vec::new();
    let Some(mean) = mean_of(dist) else {
        for name in ["bias", "sigma_trim", "sigma_trim_width", "sigma_recovery", "nu_p_trim"] {
            checks.push(BoundCheck::not_applicable(name, "mean undefined"));
        }
        return Ok(PopulationBoundReport { dist: dist.to_string(), a, b, p, q, xi, checks });
    };
    let nu_p = central_moment(dist, &sampler, p);
    let sigma = central_moment(dist, &sampler, 2.0);

    match nu_p {
        Moment::Finite(nu) if p > 1.0 => {
            let rho = rho_with(&sampler, mean, p, xi);
            let rhs = nu * rho * xi.powf((p - 1.0) / p) / (1.0 - xi);
            checks.push(BoundCheck::compare("bias", (mean - tp.mu).abs(), rhs));
        }
        Moment::Finite(_) => checks.push(BoundCheck::not_applicable("bias", "requires p > 1")),
        Moment::Infinite => checks.push(BoundCheck::not_applicable("bias", format!("nu_{p} infinite"))),
    }

    match sigma {
        Moment::Finite(s) => checks.push(BoundCheck::compare("sigma_trim", tp.sigma, s / (1.0 - xi))),
        Moment::Infinite => checks.push(BoundCheck::not_applicable("sigma_trim", "sigma infinite")),
    }

    if q > 1.0 && q <= 2.0 {
        match central_moment(dist, &sampler, q) {
            Moment::Finite(nu_q) => {
                let rhs = 2f64.sqrt() * nu_q.powf(q / 2.0) * tp.delta.powf(1.0 - q / 2.0) / (1.0 - xi);
                checks.push(BoundCheck::compare("sigma_trim_width", tp.sigma, rhs));
            }
            Moment::Infinite => {
                checks.push(BoundCheck::not_applicable("sigma_trim_width", format!("nu_{q} infinite")))
            }
        }
    } else {
        checks.push(BoundCheck::not_applicable("sigma_trim_width", format!("requires 1 < q <= 2, got {q}")));
    }

    match sigma {
        Moment::Finite(s) => {
            let rho2 = rho_with(&sampler, mean, 2.0, xi);
            if xi < 0.5 && rho2 < 1.0 / 3.0 {
                let factor = ((1.0 - xi) / (1.0 - (2.0 - xi) / (1.0 - xi) * rho2 * rho2)).sqrt();
                checks.push(BoundCheck::compare("sigma_recovery", s, factor * tp.sigma));
            } else {
                checks.push(BoundCheck::not_applicable(
                    "sigma_recovery",
                    format!("requires xi < 1/2 and rho_2(xi) < 1/3 (xi={xi}, rho_2={rho2})"),
                ));
            }
        }
        Moment::Infinite => checks.push(BoundCheck::not_applicable("sigma_recovery", "sigma infinite")),
    }

    match nu_p {
        Moment::Finite(nu) => {
            let factor = (1.0 - xi).powf(-1.0 / p) + xi.powf((p - 1.0) / p) / (1.0 - xi);
            let lhs = tp.nu(p).expect("requested order");
            checks.push(BoundCheck::compare("nu_p_trim", lhs, factor * nu));
        }
        Moment::Infinite => checks.push(BoundCheck::not_applicable("nu_p_trim", format!("nu_{p} infinite"))),
    }

    Ok(PopulationBoundReport { dist: dist.to_string(), a, b, p, q, xi, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_uniform_closed_form() {
        let d = DistributionSpec::uniform(0.0, 1.0).unwrap();
        for xi in [0.1, 0.25, 0.5, 0.9] {
            let want = (1.0 - (1.0f64 - xi).powi(3)).sqrt();
            let got = rho_oracle(&d, 2.0, xi).unwrap();
            assert!((got - want).abs() < 1e-9, "xi={xi}: {got} vs {want}");
        }
        assert_eq!(rho_oracle(&d, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(rho_oracle(&d, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rho_errors() {
        let c = DistributionSpec::student_t(1.0).unwrap();
        assert!(rho_oracle(&c, 2.0, 0.1).is_err());
        let t3 = DistributionSpec::student_t(3.0).unwrap();
        assert!(rho_oracle(&t3, 3.0, 0.1).is_err());
        assert!(rho_oracle(&t3, 2.0, 1.5).is_err());
        let point = DistributionSpec::empirical(vec![2.0, 2.0]).unwrap();
        assert_eq!(rho_oracle(&point, 2.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn rho_empirical_fractional_atoms() {
        // Values -1, 0, 0, 1 around mean 0; |X|^2 mass sits on the two +-1 atoms
        // (each of probability 1/4). With xi = 1/4 the best Z covers half of
        // each atom, carrying half of nu_2^2.
        let d = DistributionSpec::empirical(vec![-1.0, 0.0, 0.0, 1.0]).unwrap();
        let got = rho_oracle(&d, 2.0, 0.25).unwrap();
        assert!((got - 0.5f64.sqrt()).abs() < 1e-12, "{got}");
        assert!((rho_oracle(&d, 2.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_is_monotone_and_below_holder_bound() {
        let dists = [
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            DistributionSpec::lognormal(0.0, 1.0).unwrap(),
            DistributionSpec::student_t(5.0).unwrap(),
        ];
        for d in &dists {
            let s = d.sampler().unwrap();
            let mean = mean_of(d).unwrap();
            let nu2 = central_moment(d, &s, 2.0).finite().unwrap();
            let nu4 = central_moment(d, &s, 4.0).finite().unwrap();
            let mut prev = 0.0;
            for i in 1..20 {
                let xi = i as f64 / 20.0;
                let r = rho_with(&s, mean, 2.0, xi);
                assert!(r + 1e-12 >= prev, "{d} xi={xi}");
                assert!(r <= nu4 / nu2 * xi.powf(0.5 - 0.25) + 1e-9);
                prev = r;
            }
        }
    }

    #[test]
    fn trimmed_uniform() {
        let d = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let tp = trimmed_population(&d, 0.1, 0.9, &[2.0]).unwrap();
        assert!((tp.mu - 0.5).abs() < 1e-12);
        assert!((tp.sigma * tp.sigma - 0.64 / 12.0).abs() < 1e-12);
        assert!((tp.delta - 0.8).abs() < 1e-12);
        assert!((tp.xi - 0.2).abs() < 1e-12);
    }

    #[test]
    fn trimmed_symmetric_and_cauchy() {
        let n = DistributionSpec::normal(3.0, 2.0).unwrap();
        let tp = trimmed_population(&n, 0.05, 0.95, &[]).unwrap();
        assert!((tp.mu - 3.0).abs() < 1e-10);
        let c = DistributionSpec::student_t(1.0).unwrap();
        let tp = trimmed_population(&c, 0.25, 0.75, &[2.0]).unwrap();
        assert!((tp.delta - 2.0).abs() < 1e-10);
        assert!(tp.mu.abs() < 1e-12);
        assert!(trimmed_population(&c, 0.5, 0.5, &[]).is_err());
        assert!(trimmed_population(&c, 0.0, 0.5, &[]).is_err());
    }

    #[test]
    fn uniform_bound_fixtures() {
        let d = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let r = population_bound_check(&d, 0.25, 0.75, 2.0, 1.5).unwrap();
        let bias = &r.checks[0];
        assert!(bias.lhs.abs() < 1e-12 && bias.rhs > 0.0);
        let r = population_bound_check(&d, 0.1, 0.9, 2.0, 1.5).unwrap();
        let sig = r.checks.iter().find(|c| c.name == "sigma_trim").unwrap();
        assert!((sig.lhs - 0.8 / 12f64.sqrt()).abs() < 1e-10);
        assert!((sig.rhs - (1.0 / 12f64.sqrt()) / 0.8).abs() < 1e-12);
        assert!(!r.any_violated());
    }
}
