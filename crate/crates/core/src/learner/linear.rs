//! Learners over explicit weight vectors in `R^d` (linear kernel), used by
//! the two-copy special case and the impossibility demonstration.

use rand::RngCore;

use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::losses::AnalyticLoss;
use crate::numeric::{dot, norm_sq};
use crate::oracle::{BudgetedOracle, InstanceOracle, LoggingOracle};
use crate::rng::StreamSeeds;

use super::{batch_comparator, project_ball, ComparatorSolution, RoundLog};

/// An online learner with an explicit linear predictor `x -> <w, x>`.
pub trait LinearLearner {
    fn name(&self) -> &str;

    /// Current `w_t`.
    fn weights(&self) -> &[f64];

    /// Consumes one round: query the oracle as the learner sees fit and
    /// update `w`.
    fn observe(&mut self, oracle: &mut dyn InstanceOracle, y: f64, rng: &mut dyn RngCore) -> Result<()>;
}

/// Single-query OGD that treats its one noisy observation as the instance.
#[derive(Debug, Clone)]
pub struct NaiveOgd {
    w: Vec<f64>,
    step: f64,
    b_w: f64,
    loss: AnalyticLoss,
}

impl NaiveOgd {
    /// Step size `eta / sqrt(horizon)`.
    pub fn new(dim: usize, eta: f64, horizon: usize, b_w: f64, loss: AnalyticLoss) -> Self {
        Self {
            w: vec![0.0; dim],
            step: eta / (horizon as f64).sqrt(),
            b_w,
            loss,
        }
    }
}

impl LinearLearner for NaiveOgd {
    fn name(&self) -> &str {
        "naive_ogd"
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn observe(&mut self, oracle: &mut dyn InstanceOracle, y: f64, _rng: &mut dyn RngCore) -> Result<()> {
        let x = oracle.query()?;
        let slope = self.loss.loss_slope(dot(&self.w, &x), y);
        for (w, xi) in self.w.iter_mut().zip(&x) {
            *w -= self.step * slope * xi;
        }
        project_ball(&mut self.w, self.b_w);
        Ok(())
    }
}

/// `2 (<w, x~> - y) x~'` from two independent noisy copies; unbiased for
/// the squared-loss gradient `2 (<w, x> - y) x`.
pub fn two_copy_gradient(oracle: &mut dyn InstanceOracle, y: f64, w: &[f64]) -> Result<Vec<f64>> {
    let a = oracle.query()?;
    let b = oracle.query()?;
    if a.len() != w.len() {
        return Err(Error::DimensionMismatch(w.len(), a.len()));
    }
    let r = 2.0 * (dot(w, &a) - y);
    Ok(b.iter().map(|v| r * v).collect())
}

/// One projected step `w <- P(w - eta g)` with the two-copy gradient.
pub fn two_copy_linear_squared(
    oracle: &mut dyn InstanceOracle,
    y: f64,
    w: &[f64],
    eta: f64,
    b_w: f64,
) -> Result<Vec<f64>> {
    let g = two_copy_gradient(oracle, y, w)?;
    let mut next: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - eta * gi).collect();
    project_ball(&mut next, b_w);
    Ok(next)
}

/// OGD for the squared loss using the two-copy gradient (two queries per round).
#[derive(Debug, Clone)]
pub struct TwoCopyOgd {
    w: Vec<f64>,
    step: f64,
    b_w: f64,
}

impl TwoCopyOgd {
    pub fn new(dim: usize, eta: f64, horizon: usize, b_w: f64) -> Self {
        Self {
            w: vec![0.0; dim],
            step: eta / (horizon as f64).sqrt(),
            b_w,
        }
    }
}

impl LinearLearner for TwoCopyOgd {
    fn name(&self) -> &str {
        "two_copy_ogd"
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn observe(&mut self, oracle: &mut dyn InstanceOracle, y: f64, _rng: &mut dyn RngCore) -> Result<()> {
        self.w = two_copy_linear_squared(oracle, y, &self.w, self.step, self.b_w)?;
        Ok(())
    }
}

/// Result of running a [`LinearLearner`] through an environment.
#[derive(Debug, Clone)]
pub struct LinearRun {
    pub horizon: usize,
    /// `sum_t l(<w_t, x_t>, y_t)` on the clean data.
    pub cumulative_loss: f64,
    pub comparator: ComparatorSolution,
    pub oracle_calls: u64,
    /// Per-round records; `alpha_t` is 0 since these learners keep no expansion.
    pub logs: Vec<RoundLog>,
    /// Every observation handed to the learner, when recorded.
    pub observations: Vec<Vec<f64>>,
}

impl LinearRun {
    pub fn regret(&self) -> f64 {
        self.cumulative_loss - self.comparator.min_cumulative_loss
    }

    pub fn average_regret(&self) -> f64 {
        self.regret() / self.horizon as f64
    }
}

/// Runs `learner` for the environment's horizon, optionally limiting the
/// queries per round to `budget`, and measures regret against the best
/// `w` with `|w|^2 <= comparator_bound` in hindsight.
#[allow(clippy::too_many_arguments)]
pub fn run_linear(
    env: &Environment,
    learner: &mut dyn LinearLearner,
    loss: &AnalyticLoss,
    comparator_bound: f64,
    budget: Option<u64>,
    seeds: StreamSeeds,
    rng: &mut dyn RngCore,
    record_observations: bool,
) -> Result<LinearRun> {
    let mut cumulative = 0.0;
    let mut calls = 0;
    let mut observations = Vec::new();
    let mut logs = Vec::with_capacity(env.horizon);
    for t in 1..=env.horizon {
        let round = env.make_round(t, &seeds)?;
        let w = learner.weights().to_vec();
        let loss_true = round.truth.loss_of(loss, |x| Ok(dot(&w, x)))?;
        cumulative += loss_true;
        let budgeted = BudgetedOracle::new(round.oracle, budget.unwrap_or(u64::MAX));
        let mut oracle = LoggingOracle::new(budgeted);
        learner
            .observe(&mut oracle, round.label, rng)
            .map_err(|e| e.at_round(t))?;
        calls += oracle.calls_made();
        logs.push(RoundLog {
            t,
            loss_true,
            oracle_calls: oracle.calls_made(),
            alpha_t: 0.0,
            norm_sq: norm_sq(learner.weights()),
            map_calls: 0..0,
            grad_calls: 0..0,
            projected: false,
        });
        if record_observations {
            let (_, log) = oracle.into_parts();
            observations.extend(log);
        }
    }
    let examples = env.examples(&seeds)?;
    let comparator = batch_comparator(&examples, loss, &Kernel::linear(), comparator_bound)?;
    Ok(LinearRun {
        horizon: env.horizon,
        cumulative_loss: cumulative,
        comparator,
        oracle_calls: calls,
        logs,
        observations,
    })
}
