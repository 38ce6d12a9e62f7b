use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::losses::AnalyticLoss;
use crate::numeric::NeumaierSum;

use super::{norm_after_step, projection_factor, step_coefficient, RoundLog};

/// `w = sum_i alpha_i Psi(c_i)` over exactly known centers.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion {
    pub kernel: Kernel,
    pub centers: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub norm_sq: f64,
}

impl KernelExpansion {
    pub fn new(kernel: Kernel) -> Self {
        Self {
            kernel,
            centers: Vec::new(),
            alphas: Vec::new(),
            norm_sq: 0.0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let mut sum = NeumaierSum::default();
        for (a, c) in self.alphas.iter().zip(&self.centers) {
            sum.add(a * self.kernel.eval(c, x)?);
        }
        Ok(sum.value())
    }
}

/// Trajectory of the noiseless baseline.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub logs: Vec<RoundLog>,
    pub final_hypothesis: KernelExpansion,
}

impl BaselineRun {
    pub fn cumulative_loss(&self) -> f64 {
        self.logs.iter().map(|l| l.loss_true).sum()
    }
}

/// Projected online gradient descent on exact instances with exact kernel
/// evaluations: `w_(t+1) = P(w_t - (eta / sqrt(T)) l'_t Psi(x_t))`, with
/// `T` the number of examples.
pub fn baseline_ogd(
    examples: &[(Vec<f64>, f64)],
    eta: f64,
    b_w: f64,
    loss: &AnalyticLoss,
    kernel: &Kernel,
) -> Result<BaselineRun> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be nonnegative, got {eta}")));
    }
    if !(b_w >= 0.0) {
        return Err(Error::invalid(format!("B_w must be nonnegative, got {b_w}")));
    }
    let horizon = examples.len();
    let mut w = KernelExpansion::new(*kernel);
    let mut logs = Vec::with_capacity(horizon);
    for (i, (x, y)) in examples.iter().enumerate() {
        let t = i + 1;
        let prediction = w.predict(x).map_err(|e| e.at_round(t))?;
        let loss_true = loss.loss(prediction, *y);
        let g = loss.loss_slope(prediction, *y);
        let alpha = step_coefficient(g, eta, horizon);
        let self_sq = kernel.eval(x, x)?;
        let mut norm = norm_after_step(w.norm_sq, alpha, prediction, self_sq);
        w.centers.push(x.clone());
        w.alphas.push(alpha);
        let factor = projection_factor(norm, b_w);
        if let Some(f) = factor {
            w.alphas.iter_mut().for_each(|a| *a *= f);
            norm *= f * f;
        }
        if !(norm.is_finite() && loss_true.is_finite()) {
            return Err(Error::numeric("baseline diverged").at_round(t));
        }
        w.norm_sq = norm;
        logs.push(RoundLog {
            t,
            loss_true,
            oracle_calls: 0,
            alpha_t: alpha,
            norm_sq: norm,
            map_calls: 0..0,
            grad_calls: 0..0,
            projected: factor.is_some(),
        });
    }
    Ok(BaselineRun {
        logs,
        final_hypothesis: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_eta_keeps_w_at_zero() {
        let ex = vec![(vec![1.0, 0.0], 1.0); 5];
        let run = baseline_ogd(&ex, 0.0, 4.0, &AnalyticLoss::squared(), &Kernel::linear()).unwrap();
        assert!(run.logs.iter().all(|l| l.norm_sq == 0.0 && l.loss_true == 1.0));
    }

    #[test]
    fn repeated_example_approaches_interpolant() {
        let ex = vec![(vec![1.0, 0.0], 1.0); 400];
        let run = baseline_ogd(&ex, 2.0, 4.0, &AnalyticLoss::squared(), &Kernel::linear()).unwrap();
        let w = run.final_hypothesis.predict(&[1.0, 0.0]).unwrap();
        assert!((w - 1.0).abs() < 1e-6, "w = {w}");
    }

    #[test]
    fn projection_engages_exactly_when_outside_ball() {
        let ex = vec![(vec![1.0], 10.0); 50];
        let run = baseline_ogd(&ex, 5.0, 1.0, &AnalyticLoss::squared(), &Kernel::linear()).unwrap();
        let mut prev = 0.0f64;
        for (l, (x, y)) in run.logs.iter().zip(&ex) {
            let w_prev = prev.sqrt() * if prev > 0.0 { 1.0 } else { 0.0 };
            let unprojected = w_prev - 5.0 / (50f64).sqrt() * 2.0 * (w_prev * x[0] - y) * x[0];
            if (unprojected * unprojected - 1.0).abs() > 1e-9 {
                assert_eq!(l.projected, unprojected * unprojected > 1.0);
            }
            prev = l.norm_sq;
            assert!(l.norm_sq <= 1.0 + 1e-12);
        }
    }
}
