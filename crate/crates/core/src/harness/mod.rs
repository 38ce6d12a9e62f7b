//! Experiment harness: JSON specs, seeded parallel repetitions, statistics
//! and CSV/JSON output.
//!
//! Every repetition derives its random streams from `(seed, repetition)`
//! alone, so results are bit-identical regardless of thread count.

mod run;
mod spec;
pub mod stats;
pub mod verify;

pub use run::{
    execute, exit_code_for, log_file_name, logs_to_csv, run_experiment, run_repetition, EstimatorMoments,
    ExperimentSummary, NormDiagnostics, QueryDiagnostics, RepetitionOutput, RepetitionSummary, CSV_HEADER,
};
pub use spec::{Diagnostic, ExperimentSpec, LearnerSpec};
