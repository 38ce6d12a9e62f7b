//! Quick self-checks of the core invariants at reduced scale.
//!
//! Each check is seeded and finishes in well under a second in release
//! builds. Statistical checks compare a Monte Carlo mean against its target
//! with a four-standard-error band.

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::environments::{
    impossibility_experiment, Environment, InstanceLaw, LabelRule, NoiseModel, StreamAssignment,
};
use crate::error::Result;
use crate::feature_map::{prod_pair, FeatureSampler};
use crate::kernels::Kernel;
use crate::learner::linear::{LinearLearner, NaiveOgd};
use crate::learner::{baseline_ogd, run_online, EtaMode, LearnerConfig, NoisyKernelOgd};
use crate::losses::AnalyticLoss;
use crate::oracle::{InstanceOracle, NoisyInstanceOracle};
use crate::rng::{StreamSeeds, StreamTag};
use crate::series::{estimate_scalar, CoefficientStream, GeometricLaw};

use super::stats::Running;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const BAND: f64 = 4.0;

fn mean_check(name: &'static str, r: &Running, target: f64) -> Check {
    let s = r.summary();
    Check {
        name,
        passed: s.within(target, BAND),
        detail: format!("mean {:.6} +- {:.6} vs {target:.6} (n = {})", s.mean, s.stderr, s.n),
    }
}

fn scalar_estimator(seeds: &StreamSeeds) -> Result<Check> {
    let f = CoefficientStream::exp_linear(1.0);
    let law = GeometricLaw::new(2.0)?;
    let mut rng = seeds.stream(0, StreamTag::Other(1));
    let mut x = |r: &mut dyn RngCore| if r.random::<bool>() { 0.4 } else { 0.6 };
    let mut acc = Running::default();
    for _ in 0..50_000 {
        acc.push(estimate_scalar(&f, &mut x, &law, &mut rng)?.theta);
    }
    Ok(mean_check("scalar estimator is unbiased", &acc, 0.5f64.exp()))
}

fn noisy_oracle(x: &[f64], seeds: &StreamSeeds, i: u64) -> Result<NoisyInstanceOracle> {
    NoisyInstanceOracle::new(
        x.to_vec(),
        NoiseModel::Gaussian { variance: 0.25 },
        seeds.stream(i, StreamTag::Other(2)),
    )
}

fn feature_map(seeds: &StreamSeeds) -> Result<Vec<Check>> {
    let x = [0.3, -0.4];
    let xp = [0.5, 0.1];
    let mut out = Vec::new();
    for (kernel, p) in [(Kernel::inhomogeneous(2)?, 2.0), (Kernel::gaussian(4.0)?, 3.0)] {
        let sampler = FeatureSampler::new(kernel, GeometricLaw::new(p)?, false);
        let mut rng = seeds.stream(0, StreamTag::Other(3));
        let mut acc = Running::default();
        let mut calls = Running::default();
        for i in 0..40_000u64 {
            let mut oa = noisy_oracle(&x, seeds, 2 * i)?;
            let mut ob = noisy_oracle(&xp, seeds, 2 * i + 1)?;
            let a = sampler.map_estimate(&mut oa, &mut rng)?;
            let b = sampler.map_estimate(&mut ob, &mut rng)?;
            calls.push(oa.calls_made() as f64);
            acc.push(prod_pair(&a, &b)?);
        }
        out.push(mean_check(
            kernel_check_name(&kernel),
            &acc,
            kernel.eval(&x, &xp)?,
        ));
        out.push(mean_check(
            "oracle calls per feature estimate match expectation",
            &calls,
            sampler.expected_queries(),
        ));
    }
    Ok(out)
}

fn kernel_check_name(kernel: &Kernel) -> &'static str {
    match kernel {
        Kernel::Gaussian(_) => "gaussian feature products are unbiased",
        _ => "dot-product feature products are unbiased",
    }
}

fn small_env(noise: NoiseModel, horizon: usize) -> Environment {
    Environment {
        dim: 2,
        horizon,
        instances: InstanceLaw::UniformCube { radius: 1.0 },
        labels: LabelRule::Linear {
            weights: vec![1.0, -0.5],
            bias: 0.0,
        },
        noise,
        streams: StreamAssignment::default(),
    }
}

fn reduction(seeds: &StreamSeeds) -> Result<Check> {
    let env = small_env(NoiseModel::None, 200);
    let loss = AnalyticLoss::squared();
    let (eta, b_w) = (0.5, 1.0);
    let cfg = LearnerConfig::new(Kernel::linear(), loss.clone(), 2.0, env.horizon, b_w, 2.0)?
        .with_eta(EtaMode::Manual { value: eta })
        .with_shortcut(true);
    let noisy = run_online(NoisyKernelOgd::new(cfg)?, env.rounds(seeds), seeds)?;
    let base = baseline_ogd(&env.examples(seeds)?, eta, b_w, &loss, &Kernel::linear())?;
    let mismatches = noisy
        .logs
        .iter()
        .zip(&base.logs)
        .filter(|(a, b)| a.loss_true.to_bits() != b.loss_true.to_bits() || a.norm_sq.to_bits() != b.norm_sq.to_bits())
        .count();
    Ok(Check {
        name: "noiseless linear run reproduces the exact baseline",
        passed: mismatches == 0 && noisy.logs.len() == base.logs.len(),
        detail: format!("{mismatches} of {} rounds differ", noisy.logs.len()),
    })
}

fn determinism(seeds: &StreamSeeds) -> Result<Check> {
    let env = small_env(NoiseModel::Gaussian { variance: 0.5 }, 60);
    let run = || -> Result<Vec<u64>> {
        let cfg = LearnerConfig::new(
            Kernel::gaussian(2.0)?,
            AnalyticLoss::squared(),
            2.0,
            env.horizon,
            1.0,
            env.observation_bound(),
        )?;
        let r = run_online(NoisyKernelOgd::new(cfg)?, env.rounds(seeds), seeds)?;
        Ok(r.logs.iter().flat_map(|l| [l.loss_true.to_bits(), l.norm_sq.to_bits(), l.oracle_calls]).collect())
    };
    let same = run()? == run()?;
    Ok(Check {
        name: "seeded runs are bit-identical",
        passed: same,
        detail: if same { "identical".into() } else { "trajectories differ".into() },
    })
}

fn impossibility(seeds: &StreamSeeds) -> Result<Check> {
    let loss = AnalyticLoss::squared();
    let make = || Box::new(NaiveOgd::new(1, 1.0, 200, 4.0, AnalyticLoss::squared())) as Box<dyn LinearLearner>;
    let mut rng = seeds.stream(0, StreamTag::Other(4));
    let out = impossibility_experiment(&make, 1, 200, &loss, 4.0, *seeds, &mut rng)?;
    Ok(Check {
        name: "coupled environments give identical observations",
        passed: out.observations_identical,
        detail: format!(
            "average regret {:.4} / {:.4}",
            out.avg_regret_a(),
            out.avg_regret_b()
        ),
    })
}

/// Runs every check; a check that errors counts as failed.
pub fn verify(seed: u64) -> VerifyReport {
    let seeds = StreamSeeds::new(seed, 0);
    let mut checks = Vec::new();
    let mut record = |name: &'static str, r: Result<Vec<Check>>| match r {
        Ok(cs) => checks.extend(cs),
        Err(e) => checks.push(Check {
            name,
            passed: false,
            detail: e.to_string(),
        }),
    };
    record("scalar estimator", scalar_estimator(&seeds).map(|c| vec![c]));
    record("feature map", feature_map(&seeds));
    record("baseline reduction", reduction(&seeds).map(|c| vec![c]));
    record("determinism", determinism(&seeds).map(|c| vec![c]));
    record("impossibility", impossibility(&seeds).map(|c| vec![c]));
    VerifyReport { checks }
}
