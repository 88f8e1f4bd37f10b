//! Adaptive Gauss–Kronrod quadrature over quantile-transformed integrands.
//!
//! Integrals of the form `∫_a^b h(F^{-1}(u)) du` are split at `u = 1/2`; the
//! upper half is integrated in the complementary variable `w = 1 - u` so that
//! points close to `u = 1` keep full precision. Near an endpoint at (or very
//! close to) zero the range is cut into dyadic shells `[r 2^{-j-1}, r 2^{-j}]`;
//! the shell sums of an integrable power singularity decay geometrically, and
//! the remainder is extrapolated from the observed ratio.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 400;
const MAX_SHELLS: usize = 1070;

/// A point of `(0, 1)` carried together with its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UPoint {
    pub u: f64,
    pub uc: f64,
}

impl UPoint {
    pub fn lower(u: f64) -> Self {
        Self { u, uc: 1.0 - u }
    }

    pub fn upper(uc: f64) -> Self {
        Self { u: 1.0 - uc, uc }
    }

    pub const ZERO: UPoint = UPoint { u: 0.0, uc: 1.0 };
    pub const ONE: UPoint = UPoint { u: 1.0, uc: 0.0 };
}

/// Outcome of a possibly improper integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Integral {
    Finite(f64),
    Divergent,
}

impl Integral {
    pub fn finite(self) -> Option<f64> {
        match self {
            Integral::Finite(v) => Some(v),
            Integral::Divergent => None,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G7/K15 quadrature of a bounded integrand on `[a, b]`.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    while err > rel_tol * total.abs().max(1e-300) && heap.len() < MAX_SEGMENTS {
        let seg = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    heap.iter().map(|s| s.value).sum()
}

/// `∫_lo^hi g(t) dt` where `g` may have an integrable singularity at `t = 0`
/// (`0 <= lo < hi`).
fn near_zero<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, rel_tol: f64) -> Integral {
    if !(hi > lo) {
        return Integral::Finite(0.0);
    }
    if lo >= 0.25 * hi {
        return Integral::Finite(adaptive(g, lo, hi, rel_tol));
    }
    let mut sum = 0.0;
    let mut upper = hi;
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    for _ in 0..MAX_SHELLS {
        let lower = (0.5 * upper).max(lo);
        let shell = adaptive(g, lower, upper, rel_tol * 0.1);
        sum += shell;
        if lower <= lo || lower == 0.0 {
            return Integral::Finite(sum);
        }
        if let Some(p) = prev {
            if p != 0.0 {
                ratios.push(shell / p);
            }
        }
        prev = Some(shell);
        upper = lower;
        if shell == 0.0 && sum == 0.0 {
            continue;
        }
        if shell.abs() <= 1e-3 * rel_tol * sum.abs() {
            return Integral::Finite(sum);
        }
        // Geometric tail once the shell ratio has settled.
        if ratios.len() >= 6 {
            let r = ratios[ratios.len() - 1];
            let r_prev = ratios[ratios.len() - 2];
            let r_prev2 = ratios[ratios.len() - 3];
            let settled = (r - r_prev).abs() <= 1e-4 * r.abs() && (r_prev - r_prev2).abs() <= 1e-3 * r.abs();
            if settled {
                if r >= 1.0 - 1e-6 {
                    return Integral::Divergent;
                }
                if r > 0.0 {
                    let tail = shell * r / (1.0 - r);
                    if tail.abs() <= rel_tol * (sum + tail).abs() || ratios.len() >= 160 {
                        return Integral::Finite(sum + tail);
                    }
                }
            }
        }
        if !sum.is_finite() {
            return Integral::Divergent;
        }
    }
    match ratios.last() {
        Some(&r) if r >= 1.0 - 1e-6 => Integral::Divergent,
        _ => Integral::Finite(sum),
    }
}

/// `∫_a^b f(u, 1-u) du` over `0 <= a.u < b.u <= 1`.
pub(crate) fn integrate_u<F: Fn(f64, f64) -> f64>(f: &F, a: UPoint, b: UPoint, rel_tol: f64) -> Integral {
    if !(b.u > a.u) && !(a.uc > b.uc) {
        return Integral::Finite(0.0);
    }
    let mut total = 0.0;
    if a.u < 0.5 {
        let hi = if b.u < 0.5 { b.u } else { 0.5 };
        let g = |u: f64| f(u, 1.0 - u);
        match near_zero(&g, a.u, hi, rel_tol) {
            Integral::Finite(v) => total += v,
            Integral::Divergent => return Integral::Divergent,
        }
    }
    if b.uc < 0.5 {
        let hi = if a.uc < 0.5 { a.uc } else { 0.5 };
        let g = |w: f64| f(1.0 - w, w);
        match near_zero(&g, b.uc, hi, rel_tol) {
            Integral::Finite(v) => total += v,
            Integral::Divergent => return Integral::Divergent,
        }
    }
    Integral::Finite(total)
}
