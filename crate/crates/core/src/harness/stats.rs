//! Summary statistics and the goodness-of-fit tests used by the experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::series::GeometricLaw;

fn require(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InsufficientData(format!("{what} needs at least {min} samples, got {n}")));
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    require(xs.len(), 1, "mean")?;
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> Result<f64> {
    require(xs.len(), 2, "variance")?;
    let m = mean(xs)?;
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Standard error of the mean.
pub fn stderr(xs: &[f64]) -> Result<f64> {
    Ok((variance(xs)? / xs.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    /// Mean with standard error; a single sample gets standard error 0.
    pub fn of(xs: &[f64]) -> Result<Self> {
        let stderr = if xs.len() >= 2 { stderr(xs)? } else { 0.0 };
        Ok(Self {
            mean: mean(xs)?,
            stderr,
            n: xs.len(),
        })
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Running mean and variance (Welford), for Monte Carlo loops that should
/// not keep every sample.
#[derive(Debug, Clone, Copy, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n.max(1) as f64).sqrt()
    }

    pub fn summary(&self) -> MeanStderr {
        MeanStderr {
            mean: self.mean,
            stderr: self.stderr(),
            n: self.n as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn rejects(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Asymptotic Kolmogorov survival function `Pr(K > lambda)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (conservative for discrete data).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require(a.len(), 2, "KS test")?;
    require(b.len(), 2, "KS test")?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// Pearson chi-square goodness of fit of `observed` counts against
/// category probabilities `probs` (which must sum to 1).
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<TestResult> {
    if observed.len() != probs.len() {
        return Err(Error::invalid("observed counts and probabilities differ in length"));
    }
    require(observed.len(), 2, "chi-square test")?;
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &q) in observed.iter().zip(probs) {
        let e = q * total as f64;
        if e <= 0.0 {
            return Err(Error::invalid("chi-square category with zero expected count"));
        }
        stat += (o as f64 - e) * (o as f64 - e) / e;
    }
    let dist = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(TestResult {
        statistic: stat,
        p_value: 1.0 - dist.cdf(stat),
    })
}

/// Chi-square fit of sampled indices to a geometric law. Categories are
/// `0, 1, ..., K - 1` and a tail `>= K`, with `K` the largest index keeping
/// every expected count at least 5.
pub fn chi_square_geometric(samples: &[u64], law: &GeometricLaw) -> Result<TestResult> {
    require(samples.len(), 10, "geometric chi-square")?;
    let n = samples.len() as f64;
    let mut k = 1u64;
    while n * law.tail(k + 1) >= 5.0 && k < 10_000 {
        k += 1;
    }
    let mut observed = vec![0u64; k as usize + 1];
    for &s in samples {
        observed[s.min(k) as usize] += 1;
    }
    let mut probs: Vec<f64> = (0..k).map(|i| law.pmf(i)).collect();
    probs.push(law.tail(k));
    chi_square_gof(&observed, &probs)
}

/// Least-squares slope of `ln value` against `ln t`.
pub fn loglog_slope(ts: &[f64], values: &[f64]) -> Result<f64> {
    if ts.len() != values.len() {
        return Err(Error::invalid("checkpoint and value counts differ"));
    }
    require(ts.len(), 2, "log-log slope")?;
    if ts.iter().chain(values).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("log-log slope needs positive checkpoints and values"));
    }
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mx = mean(&lx)?;
    let my = mean(&ly)?;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("log-log slope needs distinct checkpoints".into()));
    }
    Ok(sxy / sxx)
}
