//! Kernelized online gradient descent on noisy instances, its noiseless
//! reference, linear special cases and a batch comparator for regret.
//!
//! All learners here share the same gradient-step, norm-update and
//! projection arithmetic, so that with exact inputs the noisy learner
//! reproduces the noiseless baseline bit for bit.

mod baseline;
mod comparator;
mod config;
mod hypothesis;
pub mod linear;
mod ogd;

pub use baseline::{baseline_ogd, BaselineRun, KernelExpansion};
pub use comparator::{batch_comparator, batch_comparator_with, ComparatorOptions, ComparatorSolution, Representation};
pub use config::{theorem_u, EtaMode, LearnerConfig};
pub use hypothesis::Hypothesis;
pub use linear::{two_copy_gradient, two_copy_linear_squared, LinearLearner, LinearRun, NaiveOgd, TwoCopyOgd};
pub use ogd::{grad_length_estimate, run_online, NoisyKernelOgd, OnlineRun, RoundLog, StepRecord};

/// `alpha_t = -g eta / sqrt(T)`.
pub(crate) fn step_coefficient(g: f64, eta: f64, horizon: usize) -> f64 {
    -g * eta / (horizon as f64).sqrt()
}

/// `|w + alpha f|^2` from `|w|^2`, `<w, f>` and `|f|^2`.
pub(crate) fn norm_after_step(norm_sq: f64, alpha: f64, cross: f64, self_sq: f64) -> f64 {
    (norm_sq + 2.0 * alpha * cross + alpha * alpha * self_sq).max(0.0)
}

/// Factor `sqrt(B_w / n)` that maps squared norm `n` onto the ball of
/// squared radius `B_w`, or `None` when already feasible.
pub(crate) fn projection_factor(norm_sq: f64, b_w: f64) -> Option<f64> {
    (norm_sq > b_w).then(|| (b_w / norm_sq).sqrt())
}

/// Rescales `w` into the ball `|w|^2 <= B_w`.
pub fn project_ball(w: &mut [f64], b_w: f64) -> bool {
    let n = crate::numeric::norm_sq(w);
    match projection_factor(n, b_w) {
        Some(f) => {
            w.iter_mut().for_each(|v| *v *= f);
            true
        }
        None => false,
    }
}
