//! Trimmed-mean estimation of a univariate mean.
//!
//! The estimators are generic over [`Scalar`]; the aliases below fix the
//! common choices. Planners pick the trimming level and interval width for
//! the finite-sample guarantees of the trimmed mean, and [`montecarlo`]
//! checks those guarantees by deterministic simulation.

pub mod contamination;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod montecarlo;
pub(crate) mod quadrature;
pub mod rng;
pub mod scalar;
pub mod tuning;

use num_rational::Rational64;

pub use contamination::{contaminate, sandwich_holds, ContaminationSpec, Strategy};
pub use distributions::{DistributionSpec, Moment, MomentProfile, TrimmedPopulation};
pub use error::{Error, Result};
pub use estimators::{catoni, median_of_means, order, trimmed_mean, trimmed_summary, OrderedSample, TrimSpec, TrimmedSummary};
pub use gaussian::{std_normal_cdf, std_normal_quantile, tail_perturbation_bounds, Probability};
pub use rng::Seed;
pub use scalar::Scalar;
pub use tuning::{ConfidencePlan, Interval};

/// Double-precision sample, the type used by the planners and simulations.
pub type Sample = OrderedSample<f64>;
pub type SampleF32 = OrderedSample<f32>;
/// Exact rational sample; trimmed means and variances carry no rounding.
pub type ExactSample = OrderedSample<Rational64>;

pub type Summary = TrimmedSummary<f64>;
pub type SummaryF32 = TrimmedSummary<f32>;
pub type ExactSummary = TrimmedSummary<Rational64>;
