//! The best fixed predictor in hindsight, in the primal and in the RKHS.
//!
//! ```text
//! cargo run --release --example comparator
//! ```

use noisy_kernel::kernels::Kernel;
use noisy_kernel::learner::batch_comparator;
use noisy_kernel::losses::AnalyticLoss;

fn main() -> noisy_kernel::Result<()> {
    // y = sin(3 x) on a grid: not linear, but easy for a Gaussian kernel.
    let examples: Vec<(Vec<f64>, f64)> = (0..200)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 199.0;
            (vec![x], (3.0 * x).sin())
        })
        .collect();
    let loss = AnalyticLoss::squared();
    for (name, kernel) in [("linear", Kernel::linear()), ("gaussian", Kernel::gaussian(0.5)?)] {
        for b_w in [0.5, 1.0, 2.0] {
            let s = batch_comparator(&examples, &loss, &kernel, b_w)?;
            println!(
                "{name:<9} B_w = {b_w:>5}: loss {:>9.4}  |w|^2 {:>8.4}  gap {:.1e}  iterations {:>5}  converged {}",
                s.min_cumulative_loss, s.norm_sq, s.gap, s.iterations, s.converged
            );
        }
    }
    Ok(())
}
