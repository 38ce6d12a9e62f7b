//! Runs an experiment spec through the harness and writes its outputs.
//!
//! ```text
//! cargo run --release --example run_spec -- crates/core/specs/regret_linear_T1000.json /tmp/out
//! ```

use std::path::PathBuf;

use noisy_kernel::harness::{run_experiment, ExperimentSpec};

fn main() -> noisy_kernel::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs/determinism_gaussian.json"));
    let mut spec = ExperimentSpec::load(&path)?;
    spec.outputs = args.next().map(PathBuf::from).or(spec.outputs);

    let summary = run_experiment(&spec)?;
    println!("{}: {} repetitions of {} rounds", summary.name, summary.repetitions.len(), summary.horizon);
    println!(
        "cumulative loss {:.3} +- {:.3}",
        summary.cumulative_loss.mean, summary.cumulative_loss.stderr
    );
    if let Some(r) = &summary.regret {
        println!("regret          {:.3} +- {:.3}", r.mean, r.stderr);
    }
    if let Some(q) = &summary.queries {
        println!("queries/round   {:.4} (histogram {:?})", q.per_round.mean, q.histogram);
    }
    if let Some(dir) = &spec.outputs {
        println!("logs and summary.json written to {}", dir.display());
    }
    Ok(())
}
