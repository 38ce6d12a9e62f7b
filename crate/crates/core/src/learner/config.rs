use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::losses::AnalyticLoss;
use crate::series::GeometricLaw;

/// How the step-size constant `eta` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EtaMode {
    Manual { value: f64 },
    /// `eta = B_w / (sqrt(u) l'_+(sqrt((p - 1) u)))`.
    Theorem,
}

/// Everything [`NoisyKernelOgd`](super::NoisyKernelOgd) needs to run.
#[derive(Debug, Clone)]
pub struct LearnerConfig {
    pub kernel: Kernel,
    pub loss: AnalyticLoss,
    pub law: GeometricLaw,
    /// Finite horizon `T`; steps are scaled by `1 / sqrt(T)`.
    pub horizon: usize,
    /// Squared-norm bound `B_w` of the comparator ball.
    pub b_w: f64,
    /// Declared bound `B_x~` on `E[|x~|^2]`.
    pub b_x_tilde: f64,
    pub eta: EtaMode,
    /// Restrict index draws to nonzero coefficients of finite series.
    pub shortcut_zero_beta: bool,
    /// Recompute `|w|^2` from scratch every round and compare with the cache.
    pub verify: bool,
}

impl LearnerConfig {
    pub fn new(kernel: Kernel, loss: AnalyticLoss, p: f64, horizon: usize, b_w: f64, b_x_tilde: f64) -> Result<Self> {
        let cfg = Self {
            kernel,
            loss,
            law: GeometricLaw::new(p)?,
            horizon,
            b_w,
            b_x_tilde,
            eta: EtaMode::Theorem,
            shortcut_zero_beta: false,
            verify: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eta(mut self, eta: EtaMode) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_shortcut(mut self, on: bool) -> Self {
        self.shortcut_zero_beta = on;
        self
    }

    pub fn with_verify(mut self, on: bool) -> Self {
        self.verify = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("learner.horizon", "must be at least 1"));
        }
        if !(self.b_w >= 0.0 && self.b_w.is_finite()) {
            return Err(Error::config("learner.b_w", format!("must be nonnegative, got {}", self.b_w)));
        }
        if !(self.b_x_tilde >= 0.0 && self.b_x_tilde.is_finite()) {
            return Err(Error::config(
                "learner.b_x_tilde",
                format!("must be nonnegative, got {}", self.b_x_tilde),
            ));
        }
        if let EtaMode::Manual { value } = self.eta {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::config("learner.eta.value", format!("must be nonnegative, got {value}")));
            }
        }
        Ok(())
    }

    /// Step-size constant in force.
    pub fn resolved_eta(&self) -> Result<f64> {
        match self.eta {
            EtaMode::Manual { value } => Ok(value),
            EtaMode::Theorem => {
                if self.b_w == 0.0 {
                    return Ok(0.0);
                }
                let u = theorem_u(&self.kernel, self.law.p(), self.b_w, self.b_x_tilde)?;
                let slope = self.loss.deriv_plus(((self.law.p() - 1.0) * u).sqrt());
                let eta = self.b_w / (u.sqrt() * slope);
                if eta.is_finite() && eta > 0.0 {
                    Ok(eta)
                } else {
                    Err(Error::numeric(format!("theorem step size evaluates to {eta}")))
                }
            }
        }
    }
}

/// The constant `u` of the regret bounds:
/// `B_w (p/(p-1))^2 Q(p B_x~)` for dot-product kernels and
/// `B_w (p/(p-1))^3 exp((sqrt(p) B_x~ + 2 p sqrt(B_x~)) / sigma^2)` for the
/// Gaussian kernel. The Gaussian constant is used as published.
pub fn theorem_u(kernel: &Kernel, p: f64, b_w: f64, b_x_tilde: f64) -> Result<f64> {
    let r = p / (p - 1.0);
    match kernel {
        Kernel::Dot(k) => Ok(b_w * r * r * k.q(p * b_x_tilde)?),
        Kernel::Gaussian(g) => {
            let e = (p.sqrt() * b_x_tilde + 2.0 * p * b_x_tilde.sqrt()) / g.sigma_sq();
            Ok(b_w * r * r * r * e.exp())
        }
    }
}
