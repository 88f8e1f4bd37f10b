//! Student-t distribution function and its numerical inverse.

use std::f64::consts::PI;

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::gaussian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StudentT {
    dof: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(dof: f64) -> Self {
        let ln_norm = ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * (dof * PI).ln();
        Self { dof, ln_norm }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        (self.ln_norm - 0.5 * (self.dof + 1.0) * (t * t / self.dof).ln_1p()).exp()
    }

    /// Upper tail `P(T > t)` for `t >= 0`, without cancellation in either
    /// regime.
    pub fn upper_tail(&self, t: f64) -> f64 {
        let t2 = t * t;
        let denom = self.dof + t2;
        let x = self.dof / denom;
        let y = t2 / denom;
        let (a, b) = (0.5 * self.dof, 0.5);
        if x < (a + 1.0) / (a + b + 2.0) {
            0.5 * beta_reg(a, b, x)
        } else {
            0.5 * (1.0 - beta_reg(b, a, y))
        }
    }

    #[cfg(test)]
    pub fn cdf(&self, t: f64) -> f64 {
        if t >= 0.0 {
            1.0 - self.upper_tail(t)
        } else {
            self.upper_tail(-t)
        }
    }

    /// `F^{-1}(u)` given `u` and `1 - u`.
    pub fn quantile(&self, u: f64, uc: f64) -> f64 {
        if u < 0.5 {
            -self.upper_quantile(u)
        } else {
            self.upper_quantile(uc)
        }
    }

    /// The `t >= 0` with `P(T > t) = q`, for `q` in `(0, 1/2]`.
    fn upper_quantile(&self, q: f64) -> f64 {
        if q >= 0.5 {
            return 0.0;
        }
        let nu = self.dof;
        if nu == 1.0 {
            return 1.0 / (PI * q).tan();
        }
        if nu == 2.0 {
            return (1.0 - 2.0 * q) / (2.0 * q * (1.0 - q)).sqrt();
        }
        let z = gaussian::upper_quantile(q);
        let mut t = cornish_fisher(z, nu);
        // Power-law tail: P(T > t) ~ c t^{-nu}.
        let tail_guess = ((self.ln_norm + 0.5 * (nu - 1.0) * nu.ln() - q.ln()) / nu).exp();
        if !(t > 0.0) || (q < 0.01 && tail_guess > t) {
            t = tail_guess;
        }
        self.solve_upper(q, t)
    }

    fn solve_upper(&self, q: f64, start: f64) -> f64 {
        let log_space = q < 0.1;
        let ln_q = q.ln();
        let mut lo = 0.0_f64;
        let mut hi = start.max(1e-3);
        while self.upper_tail(hi) >= q {
            lo = hi;
            hi *= 4.0;
        }
        let mut t = start.clamp(lo, hi);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let s = self.upper_tail(t);
            if s > q {
                lo = t;
            } else {
                hi = t;
            }
            let dens = self.pdf(t);
            let proposal = if log_space {
                // Newton on ln S(e^v) - ln q in v = ln t.
                let slope = -t * dens / s;
                t * ((ln_q - s.ln()) / slope).exp()
            } else {
                t + (s - q) / dens
            };
            let next = if proposal.is_finite() && proposal > lo && proposal < hi {
                proposal
            } else if lo > 0.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * hi
            };
            if (next - t).abs() <= 1e-14 * t || hi - lo <= 1e-14 * hi {
                return next;
            }
            t = next;
        }
        t
    }
}

/// Cornish–Fisher expansion of the t quantile around the normal quantile.
fn cornish_fisher(z: f64, nu: f64) -> f64 {
    let z2 = z * z;
    let g1 = (z2 + 1.0) * z / 4.0;
    let g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
    let g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
    let g4 = ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) * z / 92160.0;
    z + g1 / nu + g2 / nu.powi(2) + g3 / nu.powi(3) + g4 / nu.powi(4)
}
