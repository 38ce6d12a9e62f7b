//! Unbiased feature-map estimates from noisy copies.
//!
//! Draws estimates of `Psi(x)` for a few kernels and checks that
//! `E[<Psi~(x), Psi~(x')>] = k(x, x')` even though every copy is corrupted.
//!
//! ```text
//! cargo run --release --example feature_map
//! ```

use noisy_kernel::environments::NoiseModel;
use noisy_kernel::feature_map::{prod_exact, prod_pair, FeatureSampler};
use noisy_kernel::harness::stats::Running;
use noisy_kernel::kernels::Kernel;
use noisy_kernel::oracle::{InstanceOracle, NoisyInstanceOracle};
use noisy_kernel::series::GeometricLaw;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> noisy_kernel::Result<()> {
    let x = [0.4, -0.3];
    let xp = [0.1, 0.5];
    let noise = NoiseModel::Gaussian { variance: 0.2 };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ox = NoisyInstanceOracle::new(x.to_vec(), noise.clone(), ChaCha8Rng::seed_from_u64(10))?;
    let mut oxp = NoisyInstanceOracle::new(xp.to_vec(), noise, ChaCha8Rng::seed_from_u64(11))?;

    for kernel in [Kernel::linear(), Kernel::inhomogeneous(2)?, Kernel::exponential(), Kernel::gaussian(2.0)?] {
        let sampler = FeatureSampler::new(kernel, GeometricLaw::new(2.0)?, false);
        let mut pair = Running::default();
        let mut exact = Running::default();
        let draws = 100_000;
        let calls_before = ox.calls_made();
        for _ in 0..draws {
            let a = sampler.map_estimate(&mut ox, &mut rng)?;
            let b = sampler.map_estimate(&mut oxp, &mut rng)?;
            pair.push(prod_pair(&a, &b)?);
            exact.push(prod_exact(&a, &xp)?);
        }
        let calls = (ox.calls_made() - calls_before) as f64 / draws as f64;
        println!(
            "{:<24} k(x,x') = {:>8.5}   <Psi~,Psi~'> = {:>8.5} +- {:.5}   <Psi~,Psi(x')> = {:>8.5} +- {:.5}   queries/estimate {calls:.3} (expected {:.3})",
            kernel.name(),
            kernel.eval(&x, &xp)?,
            pair.mean(),
            pair.stderr(),
            exact.mean(),
            exact.stderr(),
            sampler.expected_queries()
        );
    }
    Ok(())
}
