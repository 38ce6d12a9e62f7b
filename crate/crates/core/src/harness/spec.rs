use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::learner::EtaMode;
use crate::losses::{AnalyticLoss, LossSpec};

/// Extra statistics written to the summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// Regret against the batch comparator (requires solving it).
    Regret,
    /// Histogram and mean of per-round oracle calls.
    Queries,
    /// Mean and maximum of `|w_t|^2`.
    Norms,
    /// First two moments of the gradient-length estimates.
    EstimatorMoments,
}

/// Which learner an experiment runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// Online gradient descent on feature-map estimates.
    NoisyKernelOgd {
        kernel: Kernel,
        loss: LossSpec,
        p: f64,
        b_w: f64,
        /// Defaults to the environment's bound on `E[|x~|^2]`.
        #[serde(default)]
        b_x_tilde: Option<f64>,
        eta: EtaMode,
        #[serde(default)]
        shortcut_zero_beta: bool,
        #[serde(default)]
        verify: bool,
    },
    /// Exact-input OGD; reads clean instances and makes no oracle calls.
    BaselineOgd {
        kernel: Kernel,
        loss: LossSpec,
        b_w: f64,
        eta: f64,
    },
    /// Linear squared-loss OGD with the two-copy gradient.
    TwoCopy { b_w: f64, eta: f64 },
    /// Linear OGD treating its single noisy observation as the instance.
    Naive { loss: LossSpec, b_w: f64, eta: f64 },
}

impl LearnerSpec {
    pub fn loss(&self) -> Result<AnalyticLoss> {
        match self {
            LearnerSpec::NoisyKernelOgd { loss, .. }
            | LearnerSpec::BaselineOgd { loss, .. }
            | LearnerSpec::Naive { loss, .. } => AnalyticLoss::try_from(loss.clone()),
            LearnerSpec::TwoCopy { .. } => Ok(AnalyticLoss::squared()),
        }
    }

    pub fn kernel(&self) -> Kernel {
        match self {
            LearnerSpec::NoisyKernelOgd { kernel, .. } | LearnerSpec::BaselineOgd { kernel, .. } => *kernel,
            LearnerSpec::TwoCopy { .. } | LearnerSpec::Naive { .. } => Kernel::linear(),
        }
    }

    pub fn b_w(&self) -> f64 {
        match self {
            LearnerSpec::NoisyKernelOgd { b_w, .. }
            | LearnerSpec::BaselineOgd { b_w, .. }
            | LearnerSpec::TwoCopy { b_w, .. }
            | LearnerSpec::Naive { b_w, .. } => *b_w,
        }
    }
}

/// Longest horizon for which the kernelized comparator is solved.
const MAX_KERNEL_REGRET_HORIZON: usize = 20_000;

fn one() -> usize {
    1
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub environment: Environment,
    pub learner: LearnerSpec,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; nothing is written when absent.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    #[serde(default)]
    pub diagnostics: BTreeSet<Diagnostic>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| {
            Error::config(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        self.environment.validate()?;
        self.learner
            .loss()
            .map_err(|e| Error::config("learner.loss", e.to_string()))?;
        let b_w = self.learner.b_w();
        if !(b_w >= 0.0 && b_w.is_finite()) {
            return Err(Error::config("learner.b_w", format!("must be nonnegative, got {b_w}")));
        }
        match &self.learner {
            LearnerSpec::NoisyKernelOgd { p, .. } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::config("learner.p", format!("must exceed 1, got {p}")));
                }
            }
            LearnerSpec::BaselineOgd { eta, .. } | LearnerSpec::TwoCopy { eta, .. } | LearnerSpec::Naive { eta, .. } => {
                if !(*eta >= 0.0 && eta.is_finite()) {
                    return Err(Error::config("learner.eta", format!("must be nonnegative, got {eta}")));
                }
            }
        }
        if !self.learner.kernel().is_linear()
            && self.diagnostics.contains(&Diagnostic::Regret)
            && self.environment.horizon > MAX_KERNEL_REGRET_HORIZON
        {
            return Err(Error::config(
                "diagnostics",
                format!("kernelized regret evaluation is limited to {MAX_KERNEL_REGRET_HORIZON} rounds"),
            ));
        }
        Ok(())
    }
}
