use std::ops::Range;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::environments::RoundDraw;
use crate::error::{Error, Result};
use crate::feature_map::FeatureSampler;
use crate::losses::{AnalyticLoss, LossFamily};
use crate::oracle::InstanceOracle;
use crate::rng::{StreamSeeds, StreamTag};
use crate::series::{estimate_scalar, IndexLaw, ScalarSampleSource};

use super::{step_coefficient, Hypothesis, LearnerConfig};

/// Relative tolerance between the cached and recomputed norm in verify mode.
const NORM_CHECK_TOL: f64 = 1e-9;

/// Per-round record of an online run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub t: usize,
    /// Loss of `w_t` at the clean `(x_t, y_t)`.
    pub loss_true: f64,
    pub oracle_calls: u64,
    pub alpha_t: f64,
    /// `|w_(t+1)|^2` after projection.
    pub norm_sq: f64,
    /// Oracle-call indices used by the stored feature estimate.
    #[serde(skip)]
    pub map_calls: Range<u64>,
    /// Oracle-call indices used by the gradient-length estimate.
    #[serde(skip)]
    pub grad_calls: Range<u64>,
    #[serde(skip)]
    pub projected: bool,
}

/// What one learner step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub g: f64,
    pub alpha: f64,
    pub map_calls: Range<u64>,
    pub grad_calls: Range<u64>,
    pub norm_sq: f64,
    pub projected: bool,
}

/// Unbiased samples of the loss argument at one fresh feature estimate.
struct ArgumentSource<'a, O: ?Sized> {
    oracle: &'a mut O,
    hyp: &'a Hypothesis,
    sampler: &'a FeatureSampler,
    family: LossFamily,
    y: f64,
}

impl<O: InstanceOracle + ?Sized> ScalarSampleSource for ArgumentSource<'_, O> {
    fn draw(&mut self, mut rng: &mut dyn RngCore) -> Result<f64> {
        let f = self.sampler.map_estimate(self.oracle, &mut rng)?;
        let a = self.hyp.inner_unchecked(&f);
        Ok(match self.family {
            LossFamily::Classification => self.y * a,
            LossFamily::Regression => a - self.y,
        })
    }
}

/// Unbiased estimate of the derivative of the loss at `w` for the current
/// round, and the number of oracle queries it consumed.
///
/// Draws `n` from `law`, builds `n` fresh feature estimates and multiplies
/// the resulting unbiased samples of the loss argument. For classification
/// losses the mean is `y l'(y <w, Psi(x)>)`; for regression losses the
/// argument is `<w, Psi(x)> - y` and the mean is `l'(<w, Psi(x)> - y)`.
pub fn grad_length_estimate<O, R>(
    oracle: &mut O,
    y: f64,
    hyp: &Hypothesis,
    loss: &AnalyticLoss,
    sampler: &FeatureSampler,
    law: &IndexLaw,
    rng: &mut R,
) -> Result<(f64, u64)>
where
    O: InstanceOracle + ?Sized,
    R: RngCore,
{
    if sampler.kernel() != hyp.kernel() || sampler.law().p().to_bits() != hyp.p().to_bits() {
        return Err(Error::KernelMismatch("sampler and hypothesis disagree".into()));
    }
    let before = oracle.calls_made();
    let family = loss.family();
    let mut src = ArgumentSource {
        oracle: &mut *oracle,
        hyp,
        sampler,
        family,
        y,
    };
    let theta = estimate_scalar(loss.deriv_series(), &mut src, law, rng)?.theta;
    let g = match family {
        LossFamily::Classification => y * theta,
        LossFamily::Regression => theta,
    };
    Ok((g, oracle.calls_made() - before))
}

/// Online gradient descent in the RKHS driven by unbiased feature and
/// gradient estimates.
#[derive(Debug, Clone)]
pub struct NoisyKernelOgd {
    config: LearnerConfig,
    eta: f64,
    sampler: FeatureSampler,
    grad_law: IndexLaw,
    hyp: Hypothesis,
}

impl NoisyKernelOgd {
    pub fn new(config: LearnerConfig) -> Result<Self> {
        config.validate()?;
        let eta = config.resolved_eta()?;
        let sampler = FeatureSampler::new(config.kernel, config.law, config.shortcut_zero_beta);
        let grad_law = IndexLaw::for_series(config.law, config.loss.deriv_series(), config.shortcut_zero_beta);
        let hyp = Hypothesis::new(config.kernel, config.law.p());
        Ok(Self {
            config,
            eta,
            sampler,
            grad_law,
            hyp,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn hypothesis(&self) -> &Hypothesis {
        &self.hyp
    }

    pub fn into_hypothesis(self) -> Hypothesis {
        self.hyp
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.hyp.predict(x)
    }

    /// One round: estimate `Psi(x_t)`, estimate the gradient length with
    /// fresh queries, take the step and project.
    pub fn step<O, R>(&mut self, oracle: &mut O, y: f64, rng: &mut R) -> Result<StepRecord>
    where
        O: InstanceOracle + ?Sized,
        R: RngCore,
    {
        let start = oracle.calls_made();
        let feature = self.sampler.map_estimate(oracle, rng)?;
        let mid = oracle.calls_made();
        let (g, _) = grad_length_estimate(
            oracle,
            y,
            &self.hyp,
            &self.config.loss,
            &self.sampler,
            &self.grad_law,
            rng,
        )?;
        let end = oracle.calls_made();
        let alpha = step_coefficient(g, self.eta, self.config.horizon);
        self.hyp.push(alpha, feature)?;
        let projected = self.hyp.project(self.config.b_w).is_some();
        if self.config.verify {
            let exact = self.hyp.exact_squared_norm();
            let cached = self.hyp.norm_sq();
            if (exact - cached).abs() > NORM_CHECK_TOL * exact.abs().max(1.0) {
                return Err(Error::numeric(format!("cached norm {cached} drifted from exact {exact}")));
            }
        }
        Ok(StepRecord {
            g,
            alpha,
            map_calls: start..mid,
            grad_calls: mid..end,
            norm_sq: self.hyp.norm_sq(),
            projected,
        })
    }
}

/// Final hypothesis and per-round logs of an online run.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub hypothesis: Hypothesis,
    pub logs: Vec<RoundLog>,
}

impl OnlineRun {
    pub fn cumulative_loss(&self) -> f64 {
        self.logs.iter().map(|l| l.loss_true).sum()
    }

    pub fn total_oracle_calls(&self) -> u64 {
        self.logs.iter().map(|l| l.oracle_calls).sum()
    }
}

/// Runs the learner over a stream of rounds. The learner sees only each
/// round's oracle and label; the loss at the clean instance is computed
/// through the round's sealed truth. Learner randomness for round `t` comes
/// from the `(seeds, t, Learner)` stream.
pub fn run_online<I>(mut learner: NoisyKernelOgd, rounds: I, seeds: &StreamSeeds) -> Result<OnlineRun>
where
    I: IntoIterator<Item = Result<RoundDraw>>,
{
    let mut logs = Vec::with_capacity(learner.config.horizon);
    for (i, round) in rounds.into_iter().enumerate() {
        let t = i + 1;
        if t > learner.config.horizon {
            return Err(Error::HorizonExceeded {
                round: t,
                horizon: learner.config.horizon,
            });
        }
        let RoundDraw { mut oracle, label, truth } = round.map_err(|e| e.at_round(t))?;
        let loss_true = truth
            .loss_of(&learner.config.loss, |x| learner.hyp.predict(x))
            .map_err(|e| e.at_round(t))?;
        let mut rng = seeds.stream(t as u64, StreamTag::Learner);
        let rec = learner.step(&mut oracle, label, &mut rng).map_err(|e| e.at_round(t))?;
        if !loss_true.is_finite() {
            return Err(Error::numeric(format!("loss at round {t} is {loss_true}")).at_round(t));
        }
        logs.push(RoundLog {
            t,
            loss_true,
            oracle_calls: oracle.calls_made(),
            alpha_t: rec.alpha,
            norm_sq: rec.norm_sq,
            map_calls: rec.map_calls,
            grad_calls: rec.grad_calls,
            projected: rec.projected,
        });
    }
    Ok(OnlineRun {
        hypothesis: learner.hyp,
        logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::NoiseModel;
    use crate::kernels::Kernel;
    use crate::oracle::NoisyInstanceOracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exact(x: &[f64]) -> NoisyInstanceOracle {
        NoisyInstanceOracle::new(x.to_vec(), NoiseModel::None, ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn empty_hypothesis_gradient_is_weighted_constant_term() {
        let loss = AnalyticLoss::exponential();
        let law = crate::series::GeometricLaw::new(2.0).unwrap();
        let sampler = FeatureSampler::new(Kernel::linear(), law, false);
        let hyp = Hypothesis::new(Kernel::linear(), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut oracle = exact(&[1.0]);
        for _ in 0..200 {
            let (g, _) =
                grad_length_estimate(&mut oracle, -1.0, &hyp, &loss, &sampler, &law.into(), &mut rng).unwrap();
            assert!(g == 0.0 || g == -2.0, "g = {g}");
        }
    }

    #[test]
    fn step_call_ranges_are_disjoint_and_contiguous() {
        let cfg = LearnerConfig::new(Kernel::exponential(), AnalyticLoss::exponential(), 2.0, 10, 1.0, 1.0).unwrap();
        let mut learner = NoisyKernelOgd::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let mut oracle = exact(&[0.3]);
            let rec = learner.step(&mut oracle, 1.0, &mut rng).unwrap();
            assert_eq!(rec.map_calls.end, rec.grad_calls.start);
            assert_eq!(rec.grad_calls.end, oracle.calls_made());
        }
    }

    #[test]
    fn verify_mode_accepts_consistent_cache() {
        let cfg = LearnerConfig::new(Kernel::inhomogeneous(2).unwrap(), AnalyticLoss::squared(), 2.0, 20, 0.5, 2.0)
            .unwrap()
            .with_eta(super::super::EtaMode::Manual { value: 0.5 })
            .with_verify(true);
        let mut learner = NoisyKernelOgd::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..20 {
            let mut oracle = exact(&[0.5, -0.2 * t as f64 / 20.0]);
            learner.step(&mut oracle, 1.0, &mut rng).unwrap();
            assert!(learner.hypothesis().norm_sq() <= 0.5 + 1e-9);
        }
    }
}
