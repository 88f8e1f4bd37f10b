//! Scalar abstraction shared by the sample-level estimators.
//!
//! Estimators that only need ordering and field arithmetic (trimmed means,
//! trimmed variances, widths, median of means, contamination) are generic over
//! [`Scalar`], so they run on `f32`, `f64` and exact rationals alike. Routines
//! that need transcendental functions (Catoni) additionally require
//! [`num_traits::Float`].

use std::fmt::Debug;

use num_rational::{Ratio, Rational64};
use num_traits::{Float, Num};

pub trait Scalar: Copy + PartialOrd + Debug + Num + Send + Sync + 'static {
    /// `false` for NaN and infinities; always `true` for exact types.
    fn is_finite_value(self) -> bool;

    /// The count `n` as a scalar.
    fn from_count(n: usize) -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(self) -> f64;

    fn abs_value(self) -> Self {
        if self < Self::zero() {
            Self::zero() - self
        } else {
            self
        }
    }
}

macro_rules! float_scalar {
    ($($t:ty)*) => ($(
        impl Scalar for $t {
            fn is_finite_value(self) -> bool {
                Float::is_finite(self)
            }

            fn from_count(n: usize) -> Self {
                n as $t
            }

            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    )*)
}

float_scalar!(f32 f64);

impl Scalar for Rational64 {
    fn is_finite_value(self) -> bool {
        true
    }

    fn from_count(n: usize) -> Self {
        Ratio::from_integer(n as i64)
    }

    fn to_f64_lossy(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
