//! Unbiased estimation of `f(E[X])` from a random number of samples.
//!
//! Estimates `exp(E[X])` for `X` uniform on {0.4, 0.6} and compares the
//! Monte Carlo mean and second moment with the exact value and the bound.
//!
//! ```text
//! cargo run --release --example scalar_estimator
//! ```

use noisy_kernel::harness::stats::Running;
use noisy_kernel::series::{estimate_scalar, second_moment_bound, CoefficientStream, GeometricLaw};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> noisy_kernel::Result<()> {
    let f = CoefficientStream::exp_linear(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = |r: &mut dyn RngCore| if r.random::<bool>() { 0.4 } else { 0.6 };

    println!("{:>5} {:>12} {:>10} {:>12} {:>12} {:>10}", "p", "mean", "stderr", "E[theta^2]", "bound", "E[N]");
    for p in [1.5, 2.0, 4.0] {
        let law = GeometricLaw::new(p)?;
        let mut theta = Running::default();
        let mut sq = Running::default();
        let mut samples = 0u64;
        let trials = 200_000;
        for _ in 0..trials {
            let e = estimate_scalar(&f, &mut x, &law, &mut rng)?;
            theta.push(e.theta);
            sq.push(e.theta * e.theta);
            samples += e.samples_used;
        }
        let bound = second_moment_bound(f64::exp, &law, 0.26)?;
        println!(
            "{p:>5} {:>12.6} {:>10.6} {:>12.4} {:>12.4} {:>10.4}",
            theta.mean(),
            theta.stderr(),
            sq.mean(),
            bound,
            samples as f64 / trials as f64
        );
    }
    println!("exact exp(0.5) = {:.6}", 0.5f64.exp());
    Ok(())
}
