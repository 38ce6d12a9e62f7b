//! Online kernel learning when instances are only observable through noisy
//! copies.
//!
//! The learner never sees `x_t`. It may query an oracle that returns
//! independent copies of `x_t + Z_t` with zero-mean noise `Z_t`, and it
//! still competes with the best bounded-norm predictor on the clean data.
//! The building blocks are:
//!
//! - [`series`]: coefficient streams and the randomized Taylor-series
//!   estimator, which turns i.i.d. samples of `X` into an unbiased estimate
//!   of `f(E[X])` using a geometrically distributed number of samples.
//! - [`kernels`]: dot-product kernels `Q(<x, x'>)` and the Gaussian kernel.
//! - [`feature_map`]: finitely supported unbiased estimates of the feature
//!   map `Psi(x)` and exact inner products between them.
//! - [`losses`]: analytic losses (squared, exponential, smoothed absolute,
//!   smoothed hinge) with the series of their derivatives.
//! - [`learner`]: kernelized online gradient descent driven by those
//!   estimates, plus noiseless and two-copy baselines and a batch comparator.
//! - [`environments`]: noise models, instance streams and a pair of coupled
//!   environments that a single-query learner cannot tell apart.
//! - [`harness`]: seeded experiment specs, statistics and CSV/JSON output.
//!
//! ```
//! use noisy_kernel::series::{estimate_scalar, CoefficientStream, GeometricLaw};
//! use rand::{Rng, RngCore, SeedableRng};
//!
//! let exp = CoefficientStream::exp_linear(1.0);
//! let law = GeometricLaw::new(2.0).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let mut x = |r: &mut dyn RngCore| if r.random::<bool>() { 0.4 } else { 0.6 };
//! let trials = 20_000;
//! let mean: f64 = (0..trials)
//!     .map(|_| estimate_scalar(&exp, &mut x, &law, &mut rng).unwrap().theta)
//!     .sum::<f64>() / trials as f64;
//! assert!((mean - 0.5f64.exp()).abs() < 0.1);
//! ```

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod environments;
pub mod error;
pub mod feature_map;
pub mod harness;
pub mod kernels;
pub mod learner;
pub mod losses;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
