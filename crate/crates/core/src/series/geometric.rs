use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on a sampled index. Exceeding it aborts instead of truncating,
/// since silent truncation would bias every estimator built on the law.
pub const INDEX_CAP: u64 = 1_000_000;

/// Geometric law on `{0, 1, 2, ...}` with `Pr(N = n) = (p - 1) / p^(n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GeometricLaw {
    p: f64,
}

impl GeometricLaw {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!("geometric law needs p > 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, n: u64) -> f64 {
        (self.p - 1.0) / self.p.powf(n as f64 + 1.0)
    }

    /// `Pr(N >= z) = p^-z`.
    pub fn tail(&self, z: u64) -> f64 {
        self.p.powf(-(z as f64))
    }

    /// `E[N] = 1 / (p - 1)`.
    pub fn mean(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }

    pub fn variance(&self) -> f64 {
        self.p / ((self.p - 1.0) * (self.p - 1.0))
    }

    /// Importance weight `1 / Pr(N = n) = p^(n + 1) / (p - 1)`.
    pub fn inverse_pmf(&self, n: u64) -> f64 {
        self.p.powf(n as f64 + 1.0) / (self.p - 1.0)
    }

    /// Inverse-CDF draw from a single uniform: `N = floor(-ln U / ln p)` with
    /// `U` in `(0, 1]`, so `Pr(N >= n) = Pr(U <= p^-n) = p^-n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let u = 1.0 - rng.random::<f64>();
        let n = (-u.ln() / self.p.ln()).floor();
        if n > INDEX_CAP as f64 {
            return Err(Error::CapExceeded {
                drawn: n as u64,
                cap: INDEX_CAP,
            });
        }
        Ok(n as u64)
    }
}

/// A law over truncation indices paired with its importance weight
/// `1 / Pr(N = n)`, which is what makes the truncated series unbiased.
pub trait IndexSampler {
    fn sample_index(&self, rng: &mut dyn RngCore) -> Result<u64>;
    fn inverse_pmf(&self, n: u64) -> f64;
    fn mean_index(&self) -> f64;
}

impl IndexSampler for GeometricLaw {
    fn sample_index(&self, rng: &mut dyn RngCore) -> Result<u64> {
        self.sample(rng)
    }

    fn inverse_pmf(&self, n: u64) -> f64 {
        GeometricLaw::inverse_pmf(self, n)
    }

    fn mean_index(&self) -> f64 {
        self.mean()
    }
}

/// The geometric law conditioned on a finite support set.
///
/// Used for series with a known finite degree: indices whose coefficient is
/// zero contribute nothing, so dropping them keeps the estimator unbiased
/// while removing pure-variance draws. A single-point support makes the draw
/// deterministic with weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedLaw {
    support: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RestrictedLaw {
    pub fn new(base: &GeometricLaw, support: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut support: Vec<u64> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(Error::invalid("restricted law needs a nonempty support"));
        }
        let weights: Vec<f64> = support.iter().map(|&n| base.pmf(n)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for q in &probs {
            acc += q;
            cumulative.push(acc);
        }
        Ok(Self {
            support,
            probs,
            cumulative,
        })
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn prob(&self, n: u64) -> f64 {
        self.support
            .iter()
            .position(|&m| m == n)
            .map_or(0.0, |i| self.probs[i])
    }
}

impl IndexSampler for RestrictedLaw {
    fn sample_index(&self, rng: &mut dyn RngCore) -> Result<u64> {
        if self.support.len() == 1 {
            return Ok(self.support[0]);
        }
        let u = rng.random::<f64>();
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.support.len() - 1);
        Ok(self.support[i])
    }

    fn inverse_pmf(&self, n: u64) -> f64 {
        let q = self.prob(n);
        if q > 0.0 {
            1.0 / q
        } else {
            0.0
        }
    }

    fn mean_index(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(&n, q)| n as f64 * q)
            .sum()
    }
}

/// Index law used by an estimator: the plain geometric law, or its
/// restriction to a finite support.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexLaw {
    Geometric(GeometricLaw),
    Restricted(RestrictedLaw),
}

impl IndexLaw {
    /// Geometric law, restricted to the nonzero coefficients of `coeffs`
    /// when `restrict` is set and the stream has a known finite degree.
    pub fn for_series(base: GeometricLaw, coeffs: &super::CoefficientStream, restrict: bool) -> Self {
        match (restrict, coeffs.known_finite_degree()) {
            (true, Some(d)) => {
                let support: Vec<u64> = (0..=d as u64).filter(|&n| coeffs.coeff(n as usize) != 0.0).collect();
                if support.is_empty() {
                    IndexLaw::Restricted(RestrictedLaw::new(&base, [0]).expect("nonempty"))
                } else {
                    IndexLaw::Restricted(RestrictedLaw::new(&base, support).expect("nonempty"))
                }
            }
            _ => IndexLaw::Geometric(base),
        }
    }
}

impl From<GeometricLaw> for IndexLaw {
    fn from(law: GeometricLaw) -> Self {
        IndexLaw::Geometric(law)
    }
}

impl IndexSampler for IndexLaw {
    fn sample_index(&self, rng: &mut dyn RngCore) -> Result<u64> {
        match self {
            IndexLaw::Geometric(g) => g.sample_index(rng),
            IndexLaw::Restricted(r) => r.sample_index(rng),
        }
    }

    fn inverse_pmf(&self, n: u64) -> f64 {
        match self {
            IndexLaw::Geometric(g) => IndexSampler::inverse_pmf(g, n),
            IndexLaw::Restricted(r) => r.inverse_pmf(n),
        }
    }

    fn mean_index(&self) -> f64 {
        match self {
            IndexLaw::Geometric(g) => g.mean(),
            IndexLaw::Restricted(r) => r.mean_index(),
        }
    }
}

impl TryFrom<f64> for GeometricLaw {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<GeometricLaw> for f64 {
    fn from(law: GeometricLaw) -> f64 {
        law.p
    }
}
