use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{
    baseline_ogd, batch_comparator, linear::run_linear, run_online, LearnerConfig, NaiveOgd, NoisyKernelOgd, RoundLog,
    TwoCopyOgd,
};
use crate::rng::{StreamSeeds, StreamTag};

use super::spec::{Diagnostic, ExperimentSpec, LearnerSpec};
use super::stats::MeanStderr;

/// Column header of the per-repetition round logs.
pub const CSV_HEADER: &str = "t,loss_true,oracle_calls,alpha_t,norm_sq";

/// Round logs as CSV with shortest round-trip float formatting.
pub fn logs_to_csv(logs: &[RoundLog]) -> String {
    let mut out = String::with_capacity(48 * (logs.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for l in logs {
        let _ = writeln!(out, "{},{},{},{},{}", l.t, l.loss_true, l.oracle_calls, l.alpha_t, l.norm_sq);
    }
    out
}

/// Outcome of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub repetition: usize,
    pub cumulative_loss: f64,
    pub total_oracle_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparator_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparator_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret: Option<f64>,
    pub final_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDiagnostics {
    pub per_round: MeanStderr,
    /// Number of rounds with each query count, over all repetitions.
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormDiagnostics {
    pub mean_norm_sq: f64,
    pub max_norm_sq: f64,
}

/// Moments of `g~_t`, recovered from `alpha_t = -g~_t eta / sqrt(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorMoments {
    pub mean_g: f64,
    pub mean_g_sq: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub seed: u64,
    pub horizon: usize,
    pub repetitions: Vec<RepetitionSummary>,
    pub cumulative_loss: MeanStderr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret: Option<MeanStderr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queries: Option<QueryDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator_moments: Option<EstimatorMoments>,
}

/// Logs and summary of one repetition.
#[derive(Debug, Clone)]
pub struct RepetitionOutput {
    pub logs: Vec<RoundLog>,
    pub summary: RepetitionSummary,
    /// Step constant `eta` in force (0 when not applicable).
    pub eta: f64,
}

/// Runs a single repetition in memory.
pub fn run_repetition(spec: &ExperimentSpec, repetition: usize) -> Result<RepetitionOutput> {
    let env = &spec.environment;
    let seeds = StreamSeeds::new(spec.seed, repetition as u64);
    let loss = spec.learner.loss()?;
    let want_regret = spec.diagnostics.contains(&Diagnostic::Regret);
    let (logs, final_norm_sq, eta, comparator) = match &spec.learner {
        LearnerSpec::NoisyKernelOgd {
            kernel,
            p,
            b_w,
            b_x_tilde,
            eta,
            shortcut_zero_beta,
            verify,
            ..
        } => {
            let b_x = b_x_tilde.unwrap_or_else(|| env.observation_bound());
            let cfg = LearnerConfig::new(*kernel, loss.clone(), *p, env.horizon, *b_w, b_x)?
                .with_eta(*eta)
                .with_shortcut(*shortcut_zero_beta)
                .with_verify(*verify);
            let learner = NoisyKernelOgd::new(cfg)?;
            let eta = learner.eta();
            let run = run_online(learner, env.rounds(&seeds), &seeds)?;
            (run.logs, run.hypothesis.norm_sq(), eta, None)
        }
        LearnerSpec::BaselineOgd { kernel, b_w, eta, .. } => {
            let examples = env.examples(&seeds)?;
            let run = baseline_ogd(&examples, *eta, *b_w, &loss, kernel)?;
            (run.logs, run.final_hypothesis.norm_sq, *eta, None)
        }
        LearnerSpec::TwoCopy { b_w, eta } => {
            let mut learner = TwoCopyOgd::new(env.dim, *eta, env.horizon, *b_w);
            let mut rng = ChaCha8Rng::seed_from_u64(seeds.key(0, StreamTag::Learner));
            let run = run_linear(env, &mut learner, &loss, *b_w, None, seeds, &mut rng, false)?;
            let norm = run.logs.last().map_or(0.0, |l| l.norm_sq);
            (run.logs, norm, *eta, Some(run.comparator))
        }
        LearnerSpec::Naive { b_w, eta, .. } => {
            let mut learner = NaiveOgd::new(env.dim, *eta, env.horizon, *b_w, loss.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seeds.key(0, StreamTag::Learner));
            let run = run_linear(env, &mut learner, &loss, *b_w, None, seeds, &mut rng, false)?;
            let norm = run.logs.last().map_or(0.0, |l| l.norm_sq);
            (run.logs, norm, *eta, Some(run.comparator))
        }
    };
    let cumulative_loss: f64 = logs.iter().map(|l| l.loss_true).sum();
    let comparator = if want_regret {
        match comparator {
            Some(c) => Some(c),
            None => Some(batch_comparator(
                &env.examples(&seeds)?,
                &loss,
                &spec.learner.kernel(),
                spec.learner.b_w(),
            )?),
        }
    } else {
        None
    };
    let summary = RepetitionSummary {
        repetition,
        cumulative_loss,
        total_oracle_calls: logs.iter().map(|l| l.oracle_calls).sum(),
        comparator_loss: comparator.as_ref().map(|c| c.min_cumulative_loss),
        comparator_gap: comparator.as_ref().map(|c| c.gap),
        regret: comparator.as_ref().map(|c| cumulative_loss - c.min_cumulative_loss),
        final_norm_sq,
    };
    Ok(RepetitionOutput { logs, summary, eta })
}

fn summarize(spec: &ExperimentSpec, outputs: &[RepetitionOutput]) -> Result<ExperimentSummary> {
    let reps: Vec<RepetitionSummary> = outputs.iter().map(|o| o.summary.clone()).collect();
    let losses: Vec<f64> = reps.iter().map(|r| r.cumulative_loss).collect();
    let regret = if spec.diagnostics.contains(&Diagnostic::Regret) {
        let r: Vec<f64> = reps.iter().filter_map(|r| r.regret).collect();
        Some(MeanStderr::of(&r)?)
    } else {
        None
    };
    let all_logs = || outputs.iter().flat_map(|o| o.logs.iter());
    let queries = if spec.diagnostics.contains(&Diagnostic::Queries) {
        let per_round: Vec<f64> = all_logs().map(|l| l.oracle_calls as f64).collect();
        let mut histogram = BTreeMap::new();
        for l in all_logs() {
            *histogram.entry(l.oracle_calls).or_insert(0) += 1;
        }
        Some(QueryDiagnostics {
            per_round: MeanStderr::of(&per_round)?,
            histogram,
        })
    } else {
        None
    };
    let norms = spec.diagnostics.contains(&Diagnostic::Norms).then(|| {
        let n = all_logs().count().max(1) as f64;
        NormDiagnostics {
            mean_norm_sq: all_logs().map(|l| l.norm_sq).sum::<f64>() / n,
            max_norm_sq: all_logs().map(|l| l.norm_sq).fold(0.0, f64::max),
        }
    });
    let estimator_moments = spec.diagnostics.contains(&Diagnostic::EstimatorMoments).then(|| {
        let horizon = spec.environment.horizon as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n = 0.0;
        for o in outputs {
            if o.eta > 0.0 {
                for l in &o.logs {
                    let g = -l.alpha_t * horizon.sqrt() / o.eta;
                    sum += g;
                    sum_sq += g * g;
                    n += 1.0;
                }
            }
        }
        let n = f64::max(n, 1.0);
        EstimatorMoments {
            mean_g: sum / n,
            mean_g_sq: sum_sq / n,
        }
    });
    Ok(ExperimentSummary {
        name: spec.name.clone(),
        seed: spec.seed,
        horizon: spec.environment.horizon,
        repetitions: reps,
        cumulative_loss: MeanStderr::of(&losses)?,
        regret,
        queries,
        norms,
        estimator_moments,
    })
}

/// Runs every repetition in parallel and aggregates in repetition order.
pub fn execute(spec: &ExperimentSpec) -> Result<(ExperimentSummary, Vec<RepetitionOutput>)> {
    spec.validate()?;
    let outputs: Vec<RepetitionOutput> = (0..spec.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(spec, r))
        .collect::<Result<_>>()?;
    let summary = summarize(spec, &outputs)?;
    Ok((summary, outputs))
}

/// File name of repetition `r`'s round log.
pub fn log_file_name(repetition: usize) -> String {
    format!("rep_{repetition:04}.csv")
}

/// Runs the experiment and, if `spec.outputs` is set, writes one CSV per
/// repetition plus `summary.json`. Files written before a failure are
/// removed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary> {
    let (summary, outputs) = execute(spec)?;
    if let Some(dir) = &spec.outputs {
        write_outputs(dir, &summary, &outputs)?;
    }
    Ok(summary)
}

fn write_outputs(dir: &Path, summary: &ExperimentSummary, outputs: &[RepetitionOutput]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for o in outputs {
            let path = dir.join(log_file_name(o.summary.repetition));
            fs::write(&path, logs_to_csv(&o.logs))?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        let mut json = serde_json::to_string_pretty(summary)?;
        json.push('\n');
        fs::write(&path, json)?;
        written.push(path);
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(())
}

/// Error category for process exit codes: 1 for configuration problems,
/// 2 for runtime faults.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Json(_) | Error::InvalidParameter(_) | Error::KernelMismatch(_) => 1,
        Error::Round { source, .. } => exit_code_for(source),
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{Environment, InstanceLaw, LabelRule, NoiseModel, StreamAssignment};
    use crate::kernels::Kernel;
    use crate::learner::EtaMode;
    use crate::losses::{AnalyticLoss, LossSpec};

    fn spec(learner: LearnerSpec) -> ExperimentSpec {
        ExperimentSpec {
            name: "unit".into(),
            environment: Environment {
                dim: 2,
                horizon: 40,
                instances: InstanceLaw::UniformCube { radius: 1.0 },
                labels: LabelRule::Linear {
                    weights: vec![0.5, -1.0],
                    bias: 0.0,
                },
                noise: NoiseModel::Gaussian { variance: 0.5 },
                streams: StreamAssignment::default(),
            },
            learner,
            repetitions: 3,
            seed: 5,
            outputs: None,
            diagnostics: [Diagnostic::Regret, Diagnostic::Queries, Diagnostic::Norms, Diagnostic::EstimatorMoments]
                .into_iter()
                .collect(),
        }
    }

    fn noisy() -> LearnerSpec {
        LearnerSpec::NoisyKernelOgd {
            kernel: Kernel::linear(),
            loss: LossSpec::from(&AnalyticLoss::squared()),
            p: 2.0,
            b_w: 4.0,
            b_x_tilde: None,
            eta: EtaMode::Theorem,
            shortcut_zero_beta: false,
            verify: true,
        }
    }

    #[test]
    fn repeated_execution_is_identical() {
        let s = spec(noisy());
        let (a, la) = execute(&s).unwrap();
        let (b, lb) = execute(&s).unwrap();
        assert_eq!(a, b);
        for (x, y) in la.iter().zip(&lb) {
            assert_eq!(logs_to_csv(&x.logs), logs_to_csv(&y.logs));
        }
    }

    #[test]
    fn oracle_accounting_matches_logs() {
        let (summary, outs) = execute(&spec(noisy())).unwrap();
        for (r, o) in summary.repetitions.iter().zip(&outs) {
            assert_eq!(r.total_oracle_calls, o.logs.iter().map(|l| l.oracle_calls).sum::<u64>());
        }
        let hist: u64 = summary.queries.unwrap().histogram.values().sum();
        assert_eq!(hist, 3 * 40);
    }

    #[test]
    fn every_learner_kind_runs() {
        for l in [
            LearnerSpec::BaselineOgd {
                kernel: Kernel::gaussian(1.0).unwrap(),
                loss: LossSpec::from(&AnalyticLoss::squared()),
                b_w: 2.0,
                eta: 0.5,
            },
            LearnerSpec::TwoCopy { b_w: 2.0, eta: 0.5 },
            LearnerSpec::Naive {
                loss: LossSpec::from(&AnalyticLoss::squared()),
                b_w: 2.0,
                eta: 0.5,
            },
        ] {
            let (summary, _) = execute(&spec(l)).unwrap();
            assert!(summary.regret.is_some());
        }
    }

    #[test]
    fn csv_has_header_and_one_line_per_round() {
        let (_, outs) = execute(&spec(noisy())).unwrap();
        let csv = logs_to_csv(&outs[0].logs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 40);
    }

    #[test]
    fn writes_and_cleans_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(noisy());
        s.outputs = Some(dir.path().to_path_buf());
        run_experiment(&s).unwrap();
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join(log_file_name(2)).exists());
    }
}
