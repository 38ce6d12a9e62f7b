//! Linear least squares from noisy instances with two copies per round.
//!
//! Using one copy for the residual and an independent one for the
//! direction gives an unbiased gradient; plugging a single noisy copy into
//! both places does not, and the naive learner converges to the wrong
//! weights.
//!
//! ```text
//! cargo run --release --example two_copy
//! ```

use noisy_kernel::environments::{Environment, InstanceLaw, LabelRule, NoiseModel, StreamAssignment};
use noisy_kernel::learner::linear::{run_linear, LinearLearner, NaiveOgd, TwoCopyOgd};
use noisy_kernel::losses::AnalyticLoss;
use noisy_kernel::rng::{StreamSeeds, StreamTag};

fn main() -> noisy_kernel::Result<()> {
    let env = Environment {
        dim: 2,
        horizon: 20_000,
        instances: InstanceLaw::UniformCube { radius: 1.0 },
        labels: LabelRule::Linear {
            weights: vec![1.0, -0.5],
            bias: 0.0,
        },
        noise: NoiseModel::Gaussian { variance: 0.5 },
        streams: StreamAssignment::default(),
    };
    let loss = AnalyticLoss::squared();
    let seeds = StreamSeeds::new(5, 0);
    let mut learners: Vec<Box<dyn LinearLearner>> = vec![
        Box::new(NaiveOgd::new(2, 1.0, env.horizon, 4.0, loss.clone())),
        Box::new(TwoCopyOgd::new(2, 1.0, env.horizon, 4.0)),
    ];
    for learner in &mut learners {
        let mut rng = seeds.stream(0, StreamTag::Learner);
        let run = run_linear(&env, learner.as_mut(), &loss, 4.0, None, seeds, &mut rng, false)?;
        println!(
            "{:<10} final w = {:?}  average regret {:.4}  queries/round {:.1}",
            learner.name(),
            learner.weights().iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
            run.average_regret(),
            run.oracle_calls as f64 / env.horizon as f64
        );
    }
    println!("target w = [1.0, -0.5]");
    Ok(())
}
