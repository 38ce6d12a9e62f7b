//! Kernel online gradient descent on noisy instances versus the same
//! algorithm run on clean instances.
//!
//! The learner only sees noisy copies; its loss is measured on the clean
//! data, where it is compared with the best predictor in hindsight.
//!
//! ```text
//! cargo run --release --example noisy_ogd
//! ```

use noisy_kernel::environments::{Environment, InstanceLaw, LabelRule, NoiseModel, StreamAssignment};
use noisy_kernel::kernels::Kernel;
use noisy_kernel::learner::{baseline_ogd, batch_comparator, run_online, EtaMode, LearnerConfig, NoisyKernelOgd};
use noisy_kernel::losses::AnalyticLoss;
use noisy_kernel::rng::StreamSeeds;

fn main() -> noisy_kernel::Result<()> {
    let env = Environment {
        dim: 2,
        horizon: 2000,
        instances: InstanceLaw::UniformCube { radius: 1.0 },
        labels: LabelRule::Sign { weights: vec![1.0, -1.0] },
        noise: NoiseModel::Gaussian { variance: 0.3 },
        streams: StreamAssignment::default(),
    };
    let kernel = Kernel::gaussian(1.0)?;
    let loss = AnalyticLoss::smoothed_hinge(1.0)?;
    let (b_w, eta) = (2.0, 1.0);
    let seeds = StreamSeeds::new(42, 0);

    let config = LearnerConfig::new(kernel, loss.clone(), 2.0, env.horizon, b_w, env.observation_bound())?
        .with_eta(EtaMode::Manual { value: eta });
    let noisy = run_online(NoisyKernelOgd::new(config)?, env.rounds(&seeds), &seeds)?;

    let examples = env.examples(&seeds)?;
    let clean = baseline_ogd(&examples, eta, b_w, &loss, &kernel)?;
    let best = batch_comparator(&examples, &loss, &kernel, b_w)?;

    let t = env.horizon as f64;
    println!("comparator loss per round      {:.4}", best.min_cumulative_loss / t);
    println!("noisy learner loss per round   {:.4}", noisy.cumulative_loss() / t);
    println!("clean baseline loss per round  {:.4}", clean.cumulative_loss() / t);
    println!("oracle queries per round       {:.3}", noisy.total_oracle_calls() as f64 / t);
    println!("final |w|^2                    {:.4}", noisy.hypothesis.norm_sq());
    Ok(())
}
