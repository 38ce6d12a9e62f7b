//! Noise models, instance streams and the coupled pair of environments that
//! no single-query learner can tell apart.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::linear::{run_linear, LinearLearner, LinearRun};
use crate::losses::AnalyticLoss;
use crate::numeric::dot;
use crate::oracle::NoisyInstanceOracle;
use crate::rng::{StreamSeeds, StreamTag};

/// Tolerance for "probabilities sum to one" and "mean is zero".
const LAW_TOL: f64 = 1e-12;

/// Law of the additive noise `Z_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    /// Independent `N(0, variance)` coordinates.
    Gaussian { variance: f64 },
    /// Independent coordinates uniform on `[-radius, radius]`.
    Uniform { radius: f64 },
    /// Finitely supported law; must have zero mean.
    Discrete { support: Vec<Vec<f64>>, probs: Vec<f64> },
    /// Round `t` uses `models[(t - 1) % models.len()]`.
    Schedule { models: Vec<NoiseModel> },
}

fn pick(cumulative: impl IntoIterator<Item = f64>, u: f64) -> usize {
    let mut last = 0;
    let mut acc = 0.0;
    for (i, q) in cumulative.into_iter().enumerate() {
        acc += q;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn validate_discrete(support: &[Vec<f64>], probs: &[f64], dim: usize, what: &str) -> Result<()> {
    if support.is_empty() || support.len() != probs.len() {
        return Err(Error::invalid(format!(
            "{what}: {} support points but {} probabilities",
            support.len(),
            probs.len()
        )));
    }
    if let Some(bad) = support.iter().find(|z| z.len() != dim) {
        return Err(Error::DimensionMismatch(dim, bad.len()));
    }
    if probs.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
        return Err(Error::invalid(format!("{what}: probabilities must be nonnegative")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > LAW_TOL {
        return Err(Error::invalid(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

impl NoiseModel {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { variance } if variance.is_finite() && *variance >= 0.0 => Ok(()),
            NoiseModel::Gaussian { variance } => Err(Error::invalid(format!("noise variance {variance}"))),
            NoiseModel::Uniform { radius } if radius.is_finite() && *radius >= 0.0 => Ok(()),
            NoiseModel::Uniform { radius } => Err(Error::invalid(format!("noise radius {radius}"))),
            NoiseModel::Discrete { support, probs } => {
                validate_discrete(support, probs, dim, "discrete noise")?;
                let scale = support.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
                for k in 0..dim {
                    let mean: f64 = support.iter().zip(probs).map(|(z, q)| q * z[k]).sum();
                    if mean.abs() > LAW_TOL * scale {
                        return Err(Error::invalid(format!(
                            "discrete noise has mean {mean} in coordinate {k}"
                        )));
                    }
                }
                Ok(())
            }
            NoiseModel::Schedule { models } => {
                if models.is_empty() {
                    return Err(Error::invalid("noise schedule is empty"));
                }
                models.iter().try_for_each(|m| m.validate(dim))
            }
        }
    }

    /// `E[|Z|^2]`, the bound `a` on the noise energy. For a schedule, the
    /// largest over its entries.
    pub fn second_moment(&self, dim: usize) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { variance } => dim as f64 * variance,
            NoiseModel::Uniform { radius } => dim as f64 * radius * radius / 3.0,
            NoiseModel::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(z, q)| q * dot(z, z)).sum()
            }
            NoiseModel::Schedule { models } => {
                models.iter().map(|m| m.second_moment(dim)).fold(0.0, f64::max)
            }
        }
    }

    /// The model in force at round `t` (1-based).
    pub fn for_round(&self, t: usize) -> &NoiseModel {
        match self {
            NoiseModel::Schedule { models } => models[(t.max(1) - 1) % models.len()].for_round(t),
            other => other,
        }
    }

    /// One draw of `Z`. A schedule must first be resolved with
    /// [`for_round`](Self::for_round).
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
        Ok(match self {
            NoiseModel::None => vec![0.0; dim],
            NoiseModel::Gaussian { variance } => {
                let sd = variance.sqrt();
                (0..dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
            }
            NoiseModel::Uniform { radius } => {
                (0..dim).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect()
            }
            NoiseModel::Discrete { support, probs } => {
                let i = pick(probs.iter().copied(), rng.random::<f64>());
                support[i].clone()
            }
            NoiseModel::Schedule { .. } => {
                return Err(Error::invalid("a noise schedule must be resolved to a round first"))
            }
        })
    }
}

/// Law of the clean instances `x_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceLaw {
    Fixed { x: Vec<f64> },
    /// Round `t` uses `xs[(t - 1) % xs.len()]`.
    Sequence { xs: Vec<Vec<f64>> },
    /// I.i.d. draws from a finitely supported law.
    Discrete { support: Vec<Vec<f64>>, probs: Vec<f64> },
    /// I.i.d. draws with coordinates uniform on `[-radius, radius]`.
    UniformCube { radius: f64 },
}

impl InstanceLaw {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            InstanceLaw::Fixed { x } if x.len() != dim => Err(Error::DimensionMismatch(dim, x.len())),
            InstanceLaw::Fixed { .. } => Ok(()),
            InstanceLaw::Sequence { xs } => {
                if xs.is_empty() {
                    return Err(Error::invalid("instance sequence is empty"));
                }
                match xs.iter().find(|x| x.len() != dim) {
                    Some(bad) => Err(Error::DimensionMismatch(dim, bad.len())),
                    None => Ok(()),
                }
            }
            InstanceLaw::Discrete { support, probs } => validate_discrete(support, probs, dim, "instance law"),
            InstanceLaw::UniformCube { radius } if radius.is_finite() && *radius >= 0.0 => Ok(()),
            InstanceLaw::UniformCube { radius } => Err(Error::invalid(format!("instance radius {radius}"))),
        }
    }

    /// Upper bound on `|x|^2` over the support.
    pub fn max_norm_sq(&self, dim: usize) -> f64 {
        let max_of = |xs: &[Vec<f64>]| xs.iter().map(|x| dot(x, x)).fold(0.0, f64::max);
        match self {
            InstanceLaw::Fixed { x } => dot(x, x),
            InstanceLaw::Sequence { xs } => max_of(xs),
            InstanceLaw::Discrete { support, .. } => max_of(support),
            InstanceLaw::UniformCube { radius } => dim as f64 * radius * radius,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, t: usize, dim: usize, rng: &mut R) -> Vec<f64> {
        match self {
            InstanceLaw::Fixed { x } => x.clone(),
            InstanceLaw::Sequence { xs } => xs[(t - 1) % xs.len()].clone(),
            InstanceLaw::Discrete { support, probs } => {
                support[pick(probs.iter().copied(), rng.random::<f64>())].clone()
            }
            InstanceLaw::UniformCube { radius } => {
                (0..dim).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect()
            }
        }
    }
}

/// How the (noise-free) label is produced from the clean instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelRule {
    Constant { y: f64 },
    /// `y = <weights, x> + bias`.
    Linear {
        weights: Vec<f64>,
        #[serde(default)]
        bias: f64,
    },
    /// `y = sign(<weights, x>)`, with 0 mapped to +1.
    Sign { weights: Vec<f64> },
    /// Round `t` uses `ys[(t - 1) % ys.len()]`.
    Sequence { ys: Vec<f64> },
}

impl LabelRule {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            LabelRule::Linear { weights, .. } | LabelRule::Sign { weights } if weights.len() != dim => {
                Err(Error::DimensionMismatch(dim, weights.len()))
            }
            LabelRule::Sequence { ys } if ys.is_empty() => Err(Error::invalid("label sequence is empty")),
            _ => Ok(()),
        }
    }

    fn label(&self, t: usize, x: &[f64]) -> f64 {
        match self {
            LabelRule::Constant { y } => *y,
            LabelRule::Linear { weights, bias } => dot(weights, x) + bias,
            LabelRule::Sign { weights } => {
                if dot(weights, x) >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelRule::Sequence { ys } => ys[(t - 1) % ys.len()],
        }
    }
}

/// Which random streams an environment draws instances and noise from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamAssignment {
    pub instance: StreamTag,
    pub noise: StreamTag,
}

impl Default for StreamAssignment {
    fn default() -> Self {
        Self {
            instance: StreamTag::Instance,
            noise: StreamTag::Noise,
        }
    }
}

/// Blueprint for the per-round oracles of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub dim: usize,
    pub horizon: usize,
    pub instances: InstanceLaw,
    pub labels: LabelRule,
    #[serde(default = "no_noise")]
    pub noise: NoiseModel,
    #[serde(default)]
    pub streams: StreamAssignment,
}

fn no_noise() -> NoiseModel {
    NoiseModel::None
}

/// Ground truth of one round. Only evaluation code should look inside.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTruth {
    x: Vec<f64>,
    y: f64,
}

impl RoundTruth {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }

    /// Loss of a predictor at the clean instance.
    pub fn loss_of(&self, loss: &AnalyticLoss, predict: impl FnOnce(&[f64]) -> Result<f64>) -> Result<f64> {
        Ok(loss.loss(predict(&self.x)?, self.y))
    }

    pub fn into_example(self) -> (Vec<f64>, f64) {
        (self.x, self.y)
    }
}

/// What a learner receives in one round, plus the sealed truth.
#[derive(Debug)]
pub struct RoundDraw {
    pub oracle: NoisyInstanceOracle,
    pub label: f64,
    pub truth: RoundTruth,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("environment.dim", "dimension must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("environment.horizon", "horizon must be at least 1"));
        }
        self.instances
            .validate(self.dim)
            .map_err(|e| Error::config("environment.instances", e.to_string()))?;
        self.labels
            .validate(self.dim)
            .map_err(|e| Error::config("environment.labels", e.to_string()))?;
        self.noise
            .validate(self.dim)
            .map_err(|e| Error::config("environment.noise", e.to_string()))
    }

    /// `E[|x~|^2] <= max |x|^2 + E[|Z|^2]`.
    pub fn observation_bound(&self) -> f64 {
        self.instances.max_norm_sq(self.dim) + self.noise.second_moment(self.dim)
    }

    fn truth(&self, t: usize, seeds: &StreamSeeds) -> Result<RoundTruth> {
        if t == 0 || t > self.horizon {
            return Err(Error::HorizonExceeded {
                round: t,
                horizon: self.horizon,
            });
        }
        let mut rng = seeds.stream(t as u64, self.streams.instance);
        let x = self.instances.draw(t, self.dim, &mut rng);
        let y = self.labels.label(t, &x);
        Ok(RoundTruth { x, y })
    }

    /// Round `t` (1-based): the oracle `A_t`, the label `y_t` and the truth.
    pub fn make_round(&self, t: usize, seeds: &StreamSeeds) -> Result<RoundDraw> {
        let truth = self.truth(t, seeds)?;
        let noise_rng: ChaCha8Rng = seeds.stream(t as u64, self.streams.noise);
        let oracle = NoisyInstanceOracle::new(truth.x.clone(), self.noise.for_round(t).clone(), noise_rng)?;
        Ok(RoundDraw {
            oracle,
            label: truth.y,
            truth,
        })
    }

    /// Rounds `1..=horizon` in order.
    pub fn rounds<'a>(&'a self, seeds: &'a StreamSeeds) -> impl Iterator<Item = Result<RoundDraw>> + 'a {
        (1..=self.horizon).map(move |t| self.make_round(t, seeds))
    }

    pub fn make_oracle(&self, t: usize, seeds: &StreamSeeds) -> Result<NoisyInstanceOracle> {
        Ok(self.make_round(t, seeds)?.oracle)
    }

    /// The clean examples of rounds `1..=horizon`, for comparators.
    pub fn examples(&self, seeds: &StreamSeeds) -> Result<Vec<(Vec<f64>, f64)>> {
        (1..=self.horizon)
            .map(|t| self.truth(t, seeds).map(RoundTruth::into_example))
            .collect()
    }
}

/// Two environments whose single-query observations coincide.
///
/// In `A` the instance is always `e_1` and the noise is `+-2 e_1` with equal
/// probability; in `B` the instance is uniform on `{3 e_1, -e_1}` without
/// noise. Labels are 1 in both. `A`'s noise and `B`'s instances are drawn
/// from the same coupled stream, so the first query of every round returns
/// the same vector in both.
pub fn impossibility_pair(dim: usize, horizon: usize) -> Result<(Environment, Environment)> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let e1 = |c: f64| {
        let mut v = vec![0.0; dim];
        v[0] = c;
        v
    };
    let env_a = Environment {
        dim,
        horizon,
        instances: InstanceLaw::Fixed { x: e1(1.0) },
        labels: LabelRule::Constant { y: 1.0 },
        noise: NoiseModel::Discrete {
            support: vec![e1(2.0), e1(-2.0)],
            probs: vec![0.5, 0.5],
        },
        streams: StreamAssignment {
            instance: StreamTag::Instance,
            noise: StreamTag::Coupled,
        },
    };
    let env_b = Environment {
        dim,
        horizon,
        instances: InstanceLaw::Discrete {
            support: vec![e1(3.0), e1(-1.0)],
            probs: vec![0.5, 0.5],
        },
        labels: LabelRule::Constant { y: 1.0 },
        noise: NoiseModel::None,
        streams: StreamAssignment {
            instance: StreamTag::Coupled,
            noise: StreamTag::Noise,
        },
    };
    env_a.validate()?;
    env_b.validate()?;
    Ok((env_a, env_b))
}

/// Outcome of running one learner in both coupled environments.
#[derive(Debug, Clone)]
pub struct ImpossibilityOutcome {
    pub run_a: LinearRun,
    pub run_b: LinearRun,
    /// Whether the observation sequences were bitwise identical.
    pub observations_identical: bool,
}

impl ImpossibilityOutcome {
    pub fn avg_regret_a(&self) -> f64 {
        self.run_a.average_regret()
    }

    pub fn avg_regret_b(&self) -> f64 {
        self.run_b.average_regret()
    }
}

/// Runs fresh learners from `make_learner` in both environments of
/// [`impossibility_pair`] with one query allowed per round.
///
/// This illustrates the lower bound for the learners supplied; it cannot
/// quantify over all algorithms.
pub fn impossibility_experiment(
    make_learner: &dyn Fn() -> Box<dyn LinearLearner>,
    dim: usize,
    horizon: usize,
    loss: &AnalyticLoss,
    comparator_bound: f64,
    seeds: StreamSeeds,
    learner_rng: &mut dyn RngCore,
) -> Result<ImpossibilityOutcome> {
    let (env_a, env_b) = impossibility_pair(dim, horizon)?;
    // Both runs see the same learner randomness as well as the same data.
    let learner_seed = learner_rng.next_u64();
    let run = |env: &Environment| {
        let mut learner = make_learner();
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(learner_seed);
        run_linear(env, learner.as_mut(), loss, comparator_bound, Some(1), seeds, &mut rng, true)
    };
    let run_a = run(&env_a)?;
    let run_b = run(&env_b)?;
    let observations_identical = run_a.observations.len() == run_b.observations.len()
        && run_a
            .observations
            .iter()
            .zip(&run_b.observations)
            .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits()));
    Ok(ImpossibilityOutcome {
        run_a,
        run_b,
        observations_identical,
    })
}
