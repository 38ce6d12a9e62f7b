//! Command-line front end: run an experiment spec, run the self-checks, or
//! demonstrate the single-query impossibility construction.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noisy_kernel::environments::impossibility_experiment;
use noisy_kernel::harness::{exit_code_for, run_experiment, verify::verify, ExperimentSpec};
use noisy_kernel::learner::linear::{LinearLearner, NaiveOgd, TwoCopyOgd};
use noisy_kernel::losses::AnalyticLoss;
use noisy_kernel::rng::{StreamSeeds, StreamTag};
use noisy_kernel::Error;

#[derive(Parser)]
#[command(version, about = "Online kernel learning from noisy instance copies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed (overrides the spec's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the spec's).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of repetitions (overrides the spec's).
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON spec.
    Run { spec: PathBuf },
    /// Run reduced-scale invariant checks.
    Verify,
    /// Show that one query per round cannot separate two environments.
    DemoImpossibility {
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
}

enum Outcome {
    Ok,
    VerificationFailed,
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config {
                field: "--threads".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::NumericFault(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { spec } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            if let Some(r) = cli.reps {
                spec.repetitions = r;
            }
            if cli.out.is_some() {
                spec.outputs = cli.out;
            }
            spec.validate()?;
            let summary = run_experiment(&spec)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(Outcome::Ok)
        }
        Command::Verify => {
            let report = verify(cli.seed.unwrap_or(0));
            for c in &report.checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = cli.out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if report.passed() { Outcome::Ok } else { Outcome::VerificationFailed })
        }
        Command::DemoImpossibility { horizon } => demo(cli.seed.unwrap_or(0), cli.reps.unwrap_or(1), horizon, cli.out),
    }
}

type LearnerFactory = Box<dyn Fn() -> Box<dyn LinearLearner>>;

fn demo(seed: u64, reps: usize, horizon: usize, out: Option<PathBuf>) -> Result<Outcome, Error> {
    let loss = AnalyticLoss::squared();
    let b_w = 4.0;
    let learners: [(&str, LearnerFactory); 2] = [
        (
            "naive",
            Box::new(move || Box::new(NaiveOgd::new(1, 1.0, horizon, b_w, AnalyticLoss::squared()))),
        ),
        ("two_copy_truncated", Box::new(move || Box::new(TwoCopyOgd::new(1, 1.0, horizon, b_w)))),
    ];
    let mut all_identical = true;
    let mut rows = Vec::new();
    for (name, make) in &learners {
        for rep in 0..reps {
            let seeds = StreamSeeds::new(seed, rep as u64);
            let mut rng = seeds.stream(0, StreamTag::Learner);
            let outcome = match impossibility_experiment(make.as_ref(), 1, horizon, &loss, b_w, seeds, &mut rng) {
                Ok(o) => o,
                // A learner that needs two copies cannot act under a one-query budget.
                Err(Error::Round { source, .. }) if matches!(*source, Error::BudgetExceeded { .. }) => {
                    println!("{name:>20} rep {rep}: refused (needs more than one query per round)");
                    continue;
                }
                Err(e) => return Err(e),
            };
            all_identical &= outcome.observations_identical;
            println!(
                "{name:>20} rep {rep}: identical observations = {}, average regret A = {:.4}, B = {:.4}, sum = {:.4}",
                outcome.observations_identical,
                outcome.avg_regret_a(),
                outcome.avg_regret_b(),
                outcome.avg_regret_a() + outcome.avg_regret_b()
            );
            rows.push(serde_json::json!({
                "learner": name,
                "repetition": rep,
                "observations_identical": outcome.observations_identical,
                "avg_regret_a": outcome.avg_regret_a(),
                "avg_regret_b": outcome.avg_regret_b(),
            }));
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("impossibility.json"), serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(if all_identical { Outcome::Ok } else { Outcome::VerificationFailed })
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
