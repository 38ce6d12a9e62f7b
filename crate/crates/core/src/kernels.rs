//! Kernel descriptors.
//!
//! Dot-product kernels are described by their Q-series `Q(z) = sum_n beta_n z^n`
//! with `beta_n >= 0`. The Gaussian kernel factors as
//! `exp(-|x|^2/s2) exp(-|x'|^2/s2) sum_n (2/s2)^n/n! <x, x'>^n`, which is how
//! the feature-map estimator treats it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, norm_sq};
use crate::series::CoefficientStream;

/// Kernels of the form `k(x, x') = Q(<x, x'>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DotProductKernel {
    /// `<x, x'>`
    Linear,
    /// `<x, x'>^degree`
    HomogeneousPolynomial { degree: u32 },
    /// `(1 + <x, x'>)^degree`
    InhomogeneousPolynomial { degree: u32 },
    /// `exp(<x, x'>)`
    Exponential,
    /// `(1 - <x, x'>)^-alpha`, valid while every input has norm at most
    /// `input_norm_bound < 1`.
    Binomial { alpha: f64, input_norm_bound: f64 },
}

/// `k(x, x') = exp(-|x - x'|^2 / sigma_sq)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    sigma_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub enum Kernel {
    Dot(DotProductKernel),
    Gaussian(GaussianKernel),
}

/// Config-file form of a kernel: `{"name": ..., <parameters>}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Linear,
    HomogeneousPolynomial { degree: u32 },
    InhomogeneousPolynomial { degree: u32 },
    Exponential,
    Binomial { alpha: f64, input_norm_bound: f64 },
    Gaussian { sigma_sq: f64 },
}

/// Relative threshold of the series-summation stopping rule.
const SERIES_TERM_TOL: f64 = 1e-16;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl DotProductKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DotProductKernel::HomogeneousPolynomial { degree }
            | DotProductKernel::InhomogeneousPolynomial { degree }
                if degree == 0 =>
            {
                Err(Error::invalid("polynomial kernel degree must be at least 1"))
            }
            DotProductKernel::Binomial { alpha, input_norm_bound } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::invalid(format!("binomial kernel needs alpha > 0, got {alpha}")));
                }
                if !(input_norm_bound > 0.0 && input_norm_bound < 1.0) {
                    return Err(Error::invalid(format!(
                        "binomial kernel needs an input norm bound in (0, 1), got {input_norm_bound}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DotProductKernel::Linear => "linear",
            DotProductKernel::HomogeneousPolynomial { .. } => "homogeneous_polynomial",
            DotProductKernel::InhomogeneousPolynomial { .. } => "inhomogeneous_polynomial",
            DotProductKernel::Exponential => "exponential",
            DotProductKernel::Binomial { .. } => "binomial",
        }
    }

    /// `beta_n`, always nonnegative.
    pub fn beta(&self, n: usize) -> f64 {
        match *self {
            DotProductKernel::Linear => {
                if n == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            DotProductKernel::HomogeneousPolynomial { degree } => {
                if n == degree as usize {
                    1.0
                } else {
                    0.0
                }
            }
            DotProductKernel::InhomogeneousPolynomial { degree } => {
                if n <= degree as usize {
                    binomial(degree, n as u32)
                } else {
                    0.0
                }
            }
            DotProductKernel::Exponential => (1..=n).fold(1.0, |acc, k| acc / k as f64),
            // (alpha)_n / n!
            DotProductKernel::Binomial { alpha, .. } => {
                (0..n).fold(1.0, |acc, k| acc * (alpha + k as f64) / (k + 1) as f64)
            }
        }
    }

    pub fn known_finite_degree(&self) -> Option<usize> {
        match *self {
            DotProductKernel::Linear => Some(1),
            DotProductKernel::HomogeneousPolynomial { degree }
            | DotProductKernel::InhomogeneousPolynomial { degree } => Some(degree as usize),
            DotProductKernel::Exponential | DotProductKernel::Binomial { .. } => None,
        }
    }

    pub fn q_series(&self) -> CoefficientStream {
        let kernel = *self;
        let stream = CoefficientStream::from_fn(format!("Q[{}]", self.name()), move |n| kernel.beta(n));
        match self.known_finite_degree() {
            Some(d) => stream.with_finite_degree(d),
            None => stream,
        }
    }

    /// Closed form of `Q(z)`.
    pub fn q(&self, z: f64) -> Result<f64> {
        Ok(match *self {
            DotProductKernel::Linear => z,
            DotProductKernel::HomogeneousPolynomial { degree } => z.powi(degree as i32),
            DotProductKernel::InhomogeneousPolynomial { degree } => (1.0 + z).powi(degree as i32),
            DotProductKernel::Exponential => z.exp(),
            DotProductKernel::Binomial { alpha, .. } => {
                if z.abs() >= 1.0 {
                    return Err(Error::invalid(format!(
                        "binomial kernel series diverges at <x, x'> = {z}"
                    )));
                }
                (1.0 - z).powf(-alpha)
            }
        })
    }

    /// `Q(z)` by summing `beta_n z^n` until three consecutive terms fall
    /// below `1e-16` of the running sum.
    pub fn q_by_series(&self, z: f64) -> f64 {
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut small = 0;
        let limit = self.known_finite_degree().map_or(100_000, |d| d + 1);
        for n in 0..limit {
            let term = self.beta(n) * power;
            sum += term;
            if term.abs() < SERIES_TERM_TOL * sum.abs() {
                small += 1;
                if small == 3 {
                    break;
                }
            } else {
                small = 0;
            }
            power *= z;
        }
        sum
    }

    pub fn eval(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        if x.len() != x_prime.len() {
            return Err(Error::DimensionMismatch(x.len(), x_prime.len()));
        }
        self.q(dot(x, x_prime))
    }
}

impl GaussianKernel {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::invalid(format!("gaussian kernel needs sigma^2 > 0, got {sigma_sq}")));
        }
        Ok(Self { sigma_sq })
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    /// `beta_n = (2/sigma^2)^n / n!` of the polynomial factor.
    pub fn beta(&self, n: usize) -> f64 {
        let r = 2.0 / self.sigma_sq;
        (1..=n).fold(1.0, |acc, k| acc * r / k as f64)
    }

    pub fn poly_series(&self) -> CoefficientStream {
        CoefficientStream::exp_linear(2.0 / self.sigma_sq)
    }

    /// Series of `a -> exp(-a / sigma^2)`, whose value at `|x|^2` is the
    /// per-input factor of the decomposition.
    pub fn norm_factor_series(&self) -> CoefficientStream {
        CoefficientStream::exp_linear(-1.0 / self.sigma_sq)
    }

    /// `exp(-|x|^2 / sigma^2)`.
    pub fn norm_factor(&self, x: &[f64]) -> f64 {
        (-norm_sq(x) / self.sigma_sq).exp()
    }

    pub fn eval(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        if x.len() != x_prime.len() {
            return Err(Error::DimensionMismatch(x.len(), x_prime.len()));
        }
        let dist: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((-dist / self.sigma_sq).exp())
    }

    /// The same value through the product decomposition.
    pub fn eval_decomposed(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        if x.len() != x_prime.len() {
            return Err(Error::DimensionMismatch(x.len(), x_prime.len()));
        }
        let poly = (2.0 * dot(x, x_prime) / self.sigma_sq).exp();
        Ok(self.norm_factor(x) * self.norm_factor(x_prime) * poly)
    }
}

impl Kernel {
    pub fn linear() -> Self {
        Kernel::Dot(DotProductKernel::Linear)
    }

    pub fn homogeneous(degree: u32) -> Result<Self> {
        let k = DotProductKernel::HomogeneousPolynomial { degree };
        k.validate()?;
        Ok(Kernel::Dot(k))
    }

    pub fn inhomogeneous(degree: u32) -> Result<Self> {
        let k = DotProductKernel::InhomogeneousPolynomial { degree };
        k.validate()?;
        Ok(Kernel::Dot(k))
    }

    pub fn exponential() -> Self {
        Kernel::Dot(DotProductKernel::Exponential)
    }

    pub fn binomial(alpha: f64, input_norm_bound: f64) -> Result<Self> {
        let k = DotProductKernel::Binomial { alpha, input_norm_bound };
        k.validate()?;
        Ok(Kernel::Dot(k))
    }

    pub fn gaussian(sigma_sq: f64) -> Result<Self> {
        Ok(Kernel::Gaussian(GaussianKernel::new(sigma_sq)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Dot(k) => k.name(),
            Kernel::Gaussian(_) => "gaussian",
        }
    }

    /// Coefficient of the polynomial part of the feature map.
    pub fn beta(&self, n: usize) -> f64 {
        match self {
            Kernel::Dot(k) => k.beta(n),
            Kernel::Gaussian(g) => g.beta(n),
        }
    }

    pub fn poly_series(&self) -> CoefficientStream {
        match self {
            Kernel::Dot(k) => k.q_series(),
            Kernel::Gaussian(g) => g.poly_series(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Kernel::Dot(DotProductKernel::Linear))
    }

    /// Exact kernel value.
    pub fn eval(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        match self {
            Kernel::Dot(k) => k.eval(x, x_prime),
            Kernel::Gaussian(g) => g.eval(x, x_prime),
        }
    }
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Linear => Ok(Kernel::linear()),
            KernelSpec::HomogeneousPolynomial { degree } => Kernel::homogeneous(degree),
            KernelSpec::InhomogeneousPolynomial { degree } => Kernel::inhomogeneous(degree),
            KernelSpec::Exponential => Ok(Kernel::exponential()),
            KernelSpec::Binomial { alpha, input_norm_bound } => Kernel::binomial(alpha, input_norm_bound),
            KernelSpec::Gaussian { sigma_sq } => Kernel::gaussian(sigma_sq),
        }
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Dot(DotProductKernel::Linear) => KernelSpec::Linear,
            Kernel::Dot(DotProductKernel::HomogeneousPolynomial { degree }) => {
                KernelSpec::HomogeneousPolynomial { degree }
            }
            Kernel::Dot(DotProductKernel::InhomogeneousPolynomial { degree }) => {
                KernelSpec::InhomogeneousPolynomial { degree }
            }
            Kernel::Dot(DotProductKernel::Exponential) => KernelSpec::Exponential,
            Kernel::Dot(DotProductKernel::Binomial { alpha, input_norm_bound }) => {
                KernelSpec::Binomial { alpha, input_norm_bound }
            }
            Kernel::Gaussian(g) => KernelSpec::Gaussian { sigma_sq: g.sigma_sq },
        }
    }
}

/// Representative instance of every supported kernel family.
pub fn kernel_catalogue() -> Vec<Kernel> {
    vec![
        Kernel::linear(),
        Kernel::homogeneous(2).expect("valid degree"),
        Kernel::inhomogeneous(2).expect("valid degree"),
        Kernel::exponential(),
        Kernel::binomial(1.5, 0.8).expect("valid binomial"),
        Kernel::gaussian(1.0).expect("valid sigma"),
    ]
}
