//! Per-round sources of noisy instance copies.

use rand_chacha::ChaCha8Rng;

use crate::environments::NoiseModel;
use crate::error::{Error, Result};

/// Oracle `A_t`: each query returns an independent copy of `x_t + Z_t`.
pub trait InstanceOracle {
    fn dim(&self) -> usize;

    fn query(&mut self) -> Result<Vec<f64>>;

    /// Number of successful queries so far.
    fn calls_made(&self) -> u64;
}

impl<O: InstanceOracle + ?Sized> InstanceOracle for &mut O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn query(&mut self) -> Result<Vec<f64>> {
        (**self).query()
    }

    fn calls_made(&self) -> u64 {
        (**self).calls_made()
    }
}

impl<O: InstanceOracle + ?Sized> InstanceOracle for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn query(&mut self) -> Result<Vec<f64>> {
        (**self).query()
    }

    fn calls_made(&self) -> u64 {
        (**self).calls_made()
    }
}

/// Oracle around a hidden instance. The instance itself is not readable
/// through this type; evaluation code receives it separately.
#[derive(Debug, Clone)]
pub struct NoisyInstanceOracle {
    truth: Vec<f64>,
    noise: NoiseModel,
    rng: ChaCha8Rng,
    calls: u64,
}

impl NoisyInstanceOracle {
    pub fn new(truth: Vec<f64>, noise: NoiseModel, rng: ChaCha8Rng) -> Result<Self> {
        noise.validate(truth.len())?;
        Ok(Self {
            truth,
            noise,
            rng,
            calls: 0,
        })
    }

    /// Declared bound `a` on `E[|Z|^2]`.
    pub fn noise_bound(&self) -> f64 {
        self.noise.second_moment(self.truth.len())
    }
}

impl InstanceOracle for NoisyInstanceOracle {
    fn dim(&self) -> usize {
        self.truth.len()
    }

    fn query(&mut self) -> Result<Vec<f64>> {
        let z = self.noise.sample(self.truth.len(), &mut self.rng)?;
        self.calls += 1;
        Ok(self.truth.iter().zip(z).map(|(x, z)| x + z).collect())
    }

    fn calls_made(&self) -> u64 {
        self.calls
    }
}

/// Wrapper that fails once more than `budget` queries are attempted.
#[derive(Debug)]
pub struct BudgetedOracle<O> {
    inner: O,
    budget: u64,
    attempts: u64,
}

impl<O: InstanceOracle> BudgetedOracle<O> {
    pub fn new(inner: O, budget: u64) -> Self {
        Self {
            inner,
            budget,
            attempts: 0,
        }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: InstanceOracle> InstanceOracle for BudgetedOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self) -> Result<Vec<f64>> {
        self.attempts += 1;
        if self.attempts > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        self.inner.query()
    }

    fn calls_made(&self) -> u64 {
        self.inner.calls_made()
    }
}

/// Wrapper that records every observation handed out.
#[derive(Debug)]
pub struct LoggingOracle<O> {
    inner: O,
    log: Vec<Vec<f64>>,
}

impl<O: InstanceOracle> LoggingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, log: Vec::new() }
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.log
    }

    pub fn into_parts(self) -> (O, Vec<Vec<f64>>) {
        (self.inner, self.log)
    }
}

impl<O: InstanceOracle> InstanceOracle for LoggingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self) -> Result<Vec<f64>> {
        let x = self.inner.query()?;
        self.log.push(x.clone());
        Ok(x)
    }

    fn calls_made(&self) -> u64 {
        self.inner.calls_made()
    }
}
