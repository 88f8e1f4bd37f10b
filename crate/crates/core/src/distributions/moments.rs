use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{DistributionSpec, Sampler};
use crate::error::{domain, Result};
use crate::quadrature::{integrate_u, Integral, UPoint};

pub(crate) const QUAD_TOL: f64 = 1e-10;

/// A nonnegative moment that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Moment::Finite(_))
    }
}

/// Centered moments `nu_p = (E|X - mu|^p)^{1/p}` of a law, its standard
/// deviation, and the ratios `kappa_{2,p} = nu_p / sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    /// `None` when the mean is undefined.
    pub mean: Option<f64>,
    pub sigma: Moment,
    pub nu: Vec<(f64, Moment)>,
    /// Only for `p > 2`.
    pub kappa_2p: Vec<(f64, Moment)>,
}

impl MomentProfile {
    pub fn nu(&self, p: f64) -> Option<Moment> {
        self.nu.iter().find(|(q, _)| *q == p).map(|(_, m)| *m)
    }

    pub fn kappa(&self, p: f64) -> Option<Moment> {
        self.kappa_2p.iter().find(|(q, _)| *q == p).map(|(_, m)| *m)
    }
}

pub(crate) fn mean_of(dist: &DistributionSpec) -> Option<f64> {
    match *dist {
        DistributionSpec::Uniform { low, high } => Some(0.5 * (low + high)),
        DistributionSpec::Normal { mean, .. } => Some(mean),
        DistributionSpec::StudentT { dof, location, .. } => (dof > 1.0).then_some(location),
        DistributionSpec::Pareto { shape, scale, centered } => {
            if shape <= 1.0 {
                None
            } else if centered {
                Some(0.0)
            } else {
                Some(shape * scale / (shape - 1.0))
            }
        }
        DistributionSpec::LogNormal { log_mean, log_sd } => Some((log_mean + 0.5 * log_sd * log_sd).exp()),
        DistributionSpec::Empirical { ref values } => Some(values.iter().sum::<f64>() / values.len() as f64),
    }
}

/// `E|X - mu|^p` by quadrature over the quantile function.
pub(crate) fn abs_moment_quadrature(sampler: &Sampler, mean: f64, p: f64) -> Moment {
    if let Some(sorted) = sampler.is_empirical() {
        let m = sorted.iter().map(|v| (v - mean).abs().powf(p)).sum::<f64>() / sorted.len() as f64;
        return Moment::Finite(m);
    }
    let f = |u: f64, uc: f64| (sampler.quantile_pair(u, uc) - mean).abs().powf(p);
    match integrate_u(&f, UPoint::ZERO, UPoint::ONE, QUAD_TOL) {
        Integral::Finite(v) if v.is_finite() => Moment::Finite(v),
        _ => Moment::Infinite,
    }
}

/// `nu_p` in closed form where available, otherwise by quadrature.
pub(crate) fn central_moment(dist: &DistributionSpec, sampler: &Sampler, p: f64) -> Moment {
    let Some(mean) = mean_of(dist) else {
        return Moment::Infinite;
    };
    let closed = match *dist {
        DistributionSpec::Uniform { low, high } => Some(0.5 * (high - low) * (p + 1.0).powf(-1.0 / p)),
        DistributionSpec::Normal { sd, .. } => {
            let ln_m = 0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln();
            Some(sd * (ln_m / p).exp())
        }
        DistributionSpec::StudentT { dof, scale, .. } => {
            if p >= dof {
                return Moment::Infinite;
            }
            let ln_m = 0.5 * p * dof.ln() + ln_gamma(0.5 * (p + 1.0)) + ln_gamma(0.5 * (dof - p))
                - 0.5 * PI.ln()
                - ln_gamma(0.5 * dof);
            Some(scale * (ln_m / p).exp())
        }
        DistributionSpec::Pareto { shape, scale, .. } => {
            if p >= shape {
                return Moment::Infinite;
            }
            (p == 2.0).then(|| scale / (shape - 1.0) * (shape / (shape - 2.0)).sqrt())
        }
        DistributionSpec::LogNormal { log_mean, log_sd } => (p == 2.0).then(|| {
            let s2 = log_sd * log_sd;
            ((s2.exp() - 1.0) * (2.0 * log_mean + s2).exp()).sqrt()
        }),
        DistributionSpec::Empirical { .. } => None,
    };
    match closed {
        Some(v) => Moment::Finite(v),
        None => match abs_moment_quadrature(sampler, mean, p) {
            Moment::Finite(v) => Moment::Finite(v.powf(1.0 / p)),
            Moment::Infinite => Moment::Infinite,
        },
    }
}

/// Moment profile of `dist` at the orders in `p_list` (each `>= 1`).
pub fn moment_profile(dist: &DistributionSpec, p_list: &[f64]) -> Result<MomentProfile> {
    if p_list.is_empty() {
        return domain("moment profile needs at least one order p");
    }
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
        return domain(format!("moment orders must be finite and >= 1, got {p}"));
    }
    let sampler = dist.sampler()?;
    let mean = mean_of(dist);
    let sigma = central_moment(dist, &sampler, 2.0);
    let nu: Vec<(f64, Moment)> = p_list.iter().map(|&p| (p, central_moment(dist, &sampler, p))).collect();
    let kappa_2p = nu
        .iter()
        .filter(|(p, _)| *p > 2.0)
        .map(|&(p, m)| {
            let k = match (m, sigma) {
                (Moment::Finite(v), Moment::Finite(s)) if s > 0.0 => Moment::Finite(v / s),
                (Moment::Finite(_), Moment::Finite(_)) => Moment::Finite(1.0),
                _ => Moment::Infinite,
            };
            (p, k)
        })
        .collect();
    Ok(MomentProfile { mean, sigma, nu, kappa_2p })
}
