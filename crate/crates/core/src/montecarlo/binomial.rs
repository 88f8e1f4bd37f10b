//! Exact binomial tail probabilities and Clopper-Pearson limits.

use statrs::function::beta::beta_reg;

/// Two-sided confidence level used for every empirical verdict.
pub const CONFIDENCE: f64 = 0.95;

/// `P(Binomial(n, p) <= k)`.
pub fn binomial_cdf(k: usize, n: usize, p: f64) -> f64 {
    if k >= n || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    // P(X <= k) = I_{1-p}(n - k, k + 1).
    beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - p)
}

/// Solves `I_p(a, b) = target` for `p`; `I_p` increases in `p`.
fn beta_inverse(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact two-sided limits for a binomial proportion with `x` successes in `n`.
pub fn clopper_pearson(x: usize, n: usize, level: f64) -> (f64, f64) {
    let tail = (1.0 - level) / 2.0;
    let nf = n as f64;
    let xf = x as f64;
    let low = match x {
        0 => 0.0,
        _ if x == n => tail.powf(1.0 / nf),
        _ => beta_inverse(xf, nf - xf + 1.0, tail),
    };
    let high = match x {
        _ if x == n => 1.0,
        0 => 1.0 - tail.powf(1.0 / nf),
        _ => beta_inverse(xf + 1.0, nf - xf, 1.0 - tail),
    };
    (low, high)
}
