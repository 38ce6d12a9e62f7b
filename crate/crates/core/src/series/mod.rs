//! Power series, the geometric index law and the randomized Taylor-series
//! estimator of `f(E[X])`.

pub mod arith;
mod estimator;
mod geometric;
mod stream;

pub use estimator::{estimate_scalar, second_moment_bound, ScalarEstimate, ScalarSampleSource};
pub use geometric::{GeometricLaw, IndexLaw, IndexSampler, RestrictedLaw, INDEX_CAP};
pub use stream::{CoefficientStream, MAX_COEFF_INDEX};
