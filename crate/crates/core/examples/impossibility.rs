//! Two environments that look identical through one noisy copy per round.
//!
//! In A the instance is always 1 and the noise is +-2; in B the instance
//! itself is 3 or -1. With a single query both produce the same stream, so
//! any single-query learner suffers constant average regret in at least one
//! of them. Two queries per round break the tie.
//!
//! ```text
//! cargo run --release --example impossibility
//! ```

use noisy_kernel::environments::{impossibility_experiment, impossibility_pair};
use noisy_kernel::learner::linear::{run_linear, LinearLearner, NaiveOgd, TwoCopyOgd};
use noisy_kernel::losses::AnalyticLoss;
use noisy_kernel::rng::{StreamSeeds, StreamTag};

fn main() -> noisy_kernel::Result<()> {
    let horizon = 20_000;
    let loss = AnalyticLoss::squared();
    let seeds = StreamSeeds::new(7, 0);
    let make = || Box::new(NaiveOgd::new(1, 1.0, horizon, 4.0, AnalyticLoss::squared())) as Box<dyn LinearLearner>;
    let mut rng = seeds.stream(0, StreamTag::Learner);
    let out = impossibility_experiment(&make, 1, horizon, &loss, 4.0, seeds, &mut rng)?;
    println!("observation streams identical: {}", out.observations_identical);
    println!("single query, environment A: average regret {:.4}", out.avg_regret_a());
    println!("single query, environment B: average regret {:.4}", out.avg_regret_b());

    let (env_a, _) = impossibility_pair(1, horizon)?;
    let mut two = TwoCopyOgd::new(1, 0.25, horizon, 4.0);
    let run = run_linear(&env_a, &mut two, &loss, 4.0, Some(2), seeds, &mut rng, false)?;
    println!("two queries, environment A:  average regret {:.4}", run.average_regret());
    Ok(())
}
