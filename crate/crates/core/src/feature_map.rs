//! Unbiased, finitely supported estimates of the feature map `Psi(x)`.
//!
//! For a dot-product kernel `Q(z) = sum_n beta_n z^n` the feature space is
//! indexed by `(n, k_1, ..., k_n)` and `Psi(x)` has entry
//! `sqrt(beta_n) x_(k_1) ... x_(k_n)` there. An estimate draws `N` from the
//! geometric law, queries the oracle `N` times and represents
//!
//! ```text
//! Psi~(x) = sqrt(beta_N) p^(N+1)/(p-1) sum_(k_1..k_N) x~1_(k_1) ... x~N_(k_N) e_(N,k_1..k_N)
//! ```
//!
//! by its copies alone. Inner products between estimates, or against an
//! exact `Psi(x')`, are computed in closed form without ever materializing
//! the `d^N` coordinates.
//!
//! The Gaussian kernel factors as `e^(-|x|^2/s2) e^(-|x'|^2/s2) Q(<x, x'>)`
//! with `Q(z) = e^(2z/s2)`. Its estimate carries the polynomial part as above
//! times an independent scalar estimate of `e^(-|x|^2/s2)`. That scalar comes
//! from the randomized Taylor estimator applied to `a -> e^(-a/s2)` at
//! `a = E[<x~, x~'>] = |x|^2`, each sample costing two fresh queries. Both
//! factors are unbiased and independent, so their product is too; the
//! expected query count is `1/(p-1) + 2/(p-1) = 3/(p-1)` per estimate. This
//! construction is reconstructed from the query-count and unbiasedness
//! requirements rather than taken from a published pseudo-code.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{DotProductKernel, GaussianKernel, Kernel};
use crate::numeric::{dot, norm_sq, ordered_product};
use crate::oracle::InstanceOracle;
use crate::series::{estimate_scalar, CoefficientStream, GeometricLaw, IndexLaw, IndexSampler, ScalarSampleSource};

/// Finitely supported random element of the RKHS, equal to `Psi(x)` in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEstimate {
    kernel: Kernel,
    p: f64,
    degree: usize,
    dim: usize,
    /// `degree` copies of length `dim`, stored contiguously.
    copies: Vec<f64>,
    /// `sqrt(beta_N) / Pr(N)`, zero when `beta_N = 0`.
    scale: f64,
    /// Estimate of `e^(-|x|^2/sigma^2)` for the Gaussian kernel; exactly 1 otherwise.
    exp_factor: f64,
}

/// Serialized form of a [`FeatureEstimate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub kernel: Kernel,
    pub p: f64,
    pub n: usize,
    pub scale: f64,
    pub exp_factor: f64,
    pub copies: Vec<Vec<f64>>,
}

impl FeatureEstimate {
    /// Assembles an estimate from its parts, validating the shape.
    pub fn from_parts(
        kernel: Kernel,
        p: f64,
        copies: Vec<Vec<f64>>,
        scale: f64,
        exp_factor: f64,
    ) -> Result<Self> {
        GeometricLaw::new(p)?;
        let dim = copies.first().map_or(0, Vec::len);
        if let Some(bad) = copies.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch(dim, bad.len()));
        }
        if matches!(kernel, Kernel::Dot(_)) && exp_factor != 1.0 {
            return Err(Error::invalid("dot-product estimates carry exp_factor = 1"));
        }
        if !scale.is_finite() || !exp_factor.is_finite() {
            return Err(Error::numeric("non-finite feature scale"));
        }
        Ok(Self {
            kernel,
            p,
            degree: copies.len(),
            dim,
            copies: copies.concat(),
            scale,
            exp_factor,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The drawn index `N`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exp_factor(&self) -> f64 {
        self.exp_factor
    }

    pub fn copy(&self, j: usize) -> &[f64] {
        &self.copies[j * self.dim..(j + 1) * self.dim]
    }

    pub fn copies(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.degree).map(move |j| self.copy(j))
    }

    /// True when the formal element is identically zero.
    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.exp_factor == 0.0
    }

    /// Exact `|Psi~(x)|^2 = scale^2 exp_factor^2 prod_j |x~_j|^2`.
    pub fn squared_norm(&self) -> f64 {
        let weight = self.scale * self.exp_factor;
        weight * weight * ordered_product(self.copies().map(norm_sq))
    }

    pub fn to_record(&self) -> FeatureRecord {
        FeatureRecord {
            kernel: self.kernel,
            p: self.p,
            n: self.degree,
            scale: self.scale,
            exp_factor: self.exp_factor,
            copies: self.copies().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn from_record(record: FeatureRecord) -> Result<Self> {
        if record.copies.len() != record.n {
            return Err(Error::invalid(format!(
                "feature record has n = {} but {} copies",
                record.n,
                record.copies.len()
            )));
        }
        Self::from_parts(record.kernel, record.p, record.copies, record.scale, record.exp_factor)
    }

    fn check_compatible(&self, other: &FeatureEstimate) -> Result<()> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch(format!(
                "{} vs {}",
                self.kernel.name(),
                other.kernel.name()
            )));
        }
        if self.p.to_bits() != other.p.to_bits() {
            return Err(Error::KernelMismatch(format!("p = {} vs p = {}", self.p, other.p)));
        }
        if self.degree > 0 && other.degree > 0 && self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }
}

impl Serialize for FeatureEstimate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureEstimate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = FeatureRecord::deserialize(deserializer)?;
        FeatureEstimate::from_record(record).map_err(serde::de::Error::custom)
    }
}

/// `<a, b>` for two estimates under the same kernel and `p`.
///
/// Estimates of different degree live on orthogonal coordinates, so the
/// result is 0; otherwise it is
/// `scale_a scale_b exp_a exp_b prod_j <a_j, b_j>`.
pub fn prod_pair(a: &FeatureEstimate, b: &FeatureEstimate) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(prod_pair_unchecked(a, b))
}

pub(crate) fn prod_pair_unchecked(a: &FeatureEstimate, b: &FeatureEstimate) -> f64 {
    if a.degree != b.degree || a.is_zero() || b.is_zero() {
        return 0.0;
    }
    let prod = ordered_product((0..a.degree).map(|j| dot(a.copy(j), b.copy(j))));
    // Grouped per estimate so that swapping the arguments is exact.
    (a.scale * a.exp_factor) * (b.scale * b.exp_factor) * prod
}

/// `<a, Psi(x')>` for an exactly known `x'`:
/// `scale sqrt(beta_n) exp_factor prod_j <a_j, x'>`, times `e^(-|x'|^2/s2)`
/// for the Gaussian kernel.
pub fn prod_exact(a: &FeatureEstimate, x_prime: &[f64]) -> Result<f64> {
    if a.degree > 0 && a.dim != x_prime.len() {
        return Err(Error::DimensionMismatch(a.dim, x_prime.len()));
    }
    Ok(prod_exact_unchecked(a, x_prime))
}

pub(crate) fn prod_exact_unchecked(a: &FeatureEstimate, x_prime: &[f64]) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let beta = a.kernel.beta(a.degree);
    if beta == 0.0 {
        return 0.0;
    }
    let prod = ordered_product(a.copies().map(|c| dot(c, x_prime)));
    let outer = match a.kernel {
        Kernel::Gaussian(g) => g.norm_factor(x_prime),
        Kernel::Dot(_) => 1.0,
    };
    a.scale * beta.sqrt() * a.exp_factor * prod * outer
}

/// Draws feature estimates for one kernel and sample parameter.
#[derive(Debug, Clone)]
pub struct FeatureSampler {
    kernel: Kernel,
    base: GeometricLaw,
    poly_law: IndexLaw,
    norm_factor: Option<(CoefficientStream, IndexLaw)>,
}

impl FeatureSampler {
    /// With `shortcut_zero_beta` set, kernels with a finite Q-series draw
    /// `N` only among indices with `beta_N != 0`. This stays unbiased but
    /// changes the query-count law, so it is off unless asked for.
    pub fn new(kernel: Kernel, law: GeometricLaw, shortcut_zero_beta: bool) -> Self {
        let poly_law = IndexLaw::for_series(law, &kernel.poly_series(), shortcut_zero_beta);
        let norm_factor = match kernel {
            Kernel::Gaussian(g) => Some((g.norm_factor_series(), IndexLaw::Geometric(law))),
            Kernel::Dot(_) => None,
        };
        Self {
            kernel,
            base: law,
            poly_law,
            norm_factor,
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn law(&self) -> GeometricLaw {
        self.base
    }

    /// Expected oracle queries per estimate.
    pub fn expected_queries(&self) -> f64 {
        let poly = self.poly_law.mean_index();
        match &self.norm_factor {
            Some((_, law)) => poly + 2.0 * law.mean_index(),
            None => poly,
        }
    }

    /// One `Map_Estimate` call.
    pub fn map_estimate<O, R>(&self, oracle: &mut O, rng: &mut R) -> Result<FeatureEstimate>
    where
        O: InstanceOracle + ?Sized,
        R: RngCore,
    {
        let n = self.poly_law.sample_index(rng)?;
        let degree = n as usize;
        let dim = oracle.dim();
        let mut copies = Vec::with_capacity(degree * dim);
        for _ in 0..degree {
            let q = oracle.query()?;
            if q.len() != dim {
                return Err(Error::DimensionMismatch(dim, q.len()));
            }
            copies.extend_from_slice(&q);
        }
        let beta = self.kernel.beta(degree);
        let scale = if beta == 0.0 {
            0.0
        } else {
            beta.sqrt() * self.poly_law.inverse_pmf(n)
        };
        if !scale.is_finite() {
            return Err(Error::numeric(format!("feature scale overflowed at N = {n}")));
        }
        let exp_factor = match &self.norm_factor {
            Some((series, law)) => {
                let mut pairs = PairedCopies { oracle: &mut *oracle };
                estimate_scalar(series, &mut pairs, law, rng)?.theta
            }
            None => 1.0,
        };
        Ok(FeatureEstimate {
            kernel: self.kernel,
            p: self.base.p(),
            degree,
            dim,
            copies,
            scale,
            exp_factor,
        })
    }
}

/// Samples `<x~, x~'>` from two fresh queries; its mean is `|x|^2`.
struct PairedCopies<'a, O: ?Sized> {
    oracle: &'a mut O,
}

impl<O: InstanceOracle + ?Sized> ScalarSampleSource for PairedCopies<'_, O> {
    fn draw(&mut self, _rng: &mut dyn RngCore) -> Result<f64> {
        let a = self.oracle.query()?;
        let b = self.oracle.query()?;
        Ok(dot(&a, &b))
    }
}

/// `Map_Estimate` for a dot-product kernel with the plain geometric law.
pub fn map_estimate_dot<O, R>(
    oracle: &mut O,
    kernel: &DotProductKernel,
    law: &GeometricLaw,
    rng: &mut R,
) -> Result<FeatureEstimate>
where
    O: InstanceOracle + ?Sized,
    R: RngCore,
{
    FeatureSampler::new(Kernel::Dot(*kernel), *law, false).map_estimate(oracle, rng)
}

/// `Map_Estimate` for the Gaussian kernel.
pub fn map_estimate_gaussian<O, R>(
    oracle: &mut O,
    kernel: &GaussianKernel,
    law: &GeometricLaw,
    rng: &mut R,
) -> Result<FeatureEstimate>
where
    O: InstanceOracle + ?Sized,
    R: RngCore,
{
    FeatureSampler::new(Kernel::Gaussian(*kernel), *law, false).map_estimate(oracle, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::NoiseModel;
    use crate::oracle::NoisyInstanceOracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exact_oracle(x: &[f64]) -> NoisyInstanceOracle {
        NoisyInstanceOracle::new(x.to_vec(), NoiseModel::None, ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    fn degree_one(copy: Vec<f64>) -> FeatureEstimate {
        // beta_1 = 1, p = 2: scale = 4
        FeatureEstimate::from_parts(Kernel::linear(), 2.0, vec![copy], 4.0, 1.0).unwrap()
    }

    #[test]
    fn prod_pair_by_hand() {
        let a = degree_one(vec![1.0, 2.0]);
        let b = degree_one(vec![3.0, 4.0]);
        assert_eq!(prod_pair(&a, &b).unwrap(), 176.0);
    }

    #[test]
    fn prod_exact_by_hand() {
        let a = degree_one(vec![1.0, 2.0]);
        assert_eq!(prod_exact(&a, &[1.0, 1.0]).unwrap(), 12.0);
    }

    #[test]
    fn different_degrees_are_orthogonal() {
        let k = Kernel::exponential();
        let a = FeatureEstimate::from_parts(k, 2.0, vec![vec![1.0]], 4.0, 1.0).unwrap();
        let b = FeatureEstimate::from_parts(k, 2.0, vec![vec![1.0], vec![2.0]], 8.0, 1.0).unwrap();
        assert_eq!(prod_pair(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn degree_zero_under_homogeneous_kernel_is_zero() {
        let k = Kernel::homogeneous(2).unwrap();
        let a = FeatureEstimate::from_parts(k, 2.0, vec![], 0.0, 1.0).unwrap();
        assert_eq!(prod_pair(&a, &a).unwrap(), 0.0);
        assert_eq!(prod_exact(&a, &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn degree_zero_prod_exact_is_scaled_constant() {
        // beta_0 = c = 1 for the exponential kernel, p = 2: weight 2, sqrt(beta_0) = 1
        let k = Kernel::exponential();
        let a = FeatureEstimate::from_parts(k, 2.0, vec![], 2.0, 1.0).unwrap();
        assert_eq!(prod_exact(&a, &[5.0]).unwrap(), 2.0);
    }

    #[test]
    fn mismatched_estimates_rejected() {
        let a = degree_one(vec![1.0]);
        let b = FeatureEstimate::from_parts(Kernel::linear(), 3.0, vec![vec![1.0]], 4.0, 1.0).unwrap();
        assert!(matches!(prod_pair(&a, &b), Err(Error::KernelMismatch(_))));
        let c = FeatureEstimate::from_parts(Kernel::exponential(), 2.0, vec![vec![1.0]], 4.0, 1.0).unwrap();
        assert!(prod_pair(&a, &c).is_err());
        assert!(matches!(prod_exact(&a, &[1.0, 2.0]), Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn oracle_calls_equal_drawn_degree() {
        let sampler = FeatureSampler::new(Kernel::exponential(), GeometricLaw::new(2.0).unwrap(), false);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut oracle = exact_oracle(&[0.3, 0.1]);
        for _ in 0..200 {
            let before = oracle.calls_made();
            let f = sampler.map_estimate(&mut oracle, &mut rng).unwrap();
            assert_eq!(oracle.calls_made() - before, f.degree() as u64);
        }
    }

    #[test]
    fn zero_instance_gives_zero_copies() {
        let k = Kernel::homogeneous(2).unwrap();
        let sampler = FeatureSampler::new(k, GeometricLaw::new(2.0).unwrap(), false);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut oracle = exact_oracle(&[0.0, 0.0]);
        let other = FeatureEstimate::from_parts(k, 2.0, vec![vec![1.0, 1.0], vec![2.0, 3.0]], 8.0, 1.0).unwrap();
        for _ in 0..100 {
            let f = sampler.map_estimate(&mut oracle, &mut rng).unwrap();
            assert!(f.copies().all(|c| c.iter().all(|v| *v == 0.0)));
            assert_eq!(prod_pair(&f, &other).unwrap(), 0.0);
        }
    }

    #[test]
    fn shortcut_linear_kernel_is_exact_identity() {
        let sampler = FeatureSampler::new(Kernel::linear(), GeometricLaw::new(2.0).unwrap(), true);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut oracle = exact_oracle(&[0.5, -1.5]);
        let f = sampler.map_estimate(&mut oracle, &mut rng).unwrap();
        assert_eq!(f.degree(), 1);
        assert_eq!(f.scale(), 1.0);
        assert_eq!(f.copy(0), &[0.5, -1.5]);
        assert_eq!(sampler.expected_queries(), 1.0);
    }

    #[test]
    fn dot_kernels_keep_unit_exp_factor() {
        assert!(FeatureEstimate::from_parts(Kernel::linear(), 2.0, vec![], 2.0, 0.5).is_err());
    }

    #[test]
    fn record_round_trip_is_bit_exact() {
        let f = FeatureEstimate::from_parts(
            Kernel::gaussian(1.7).unwrap(),
            2.0,
            vec![vec![0.1, -1.0 / 3.0], vec![1e-300, 2.5e10]],
            std::f64::consts::PI,
            0.123_456_789_012_345_68,
        )
        .unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: FeatureEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(json.contains("\"n\":2"));
    }

    #[test]
    fn record_with_wrong_copy_count_rejected() {
        let json = r#"{"kernel":{"name":"linear"},"p":2.0,"n":2,"scale":1.0,"exp_factor":1.0,"copies":[[1.0]]}"#;
        assert!(serde_json::from_str::<FeatureEstimate>(json).is_err());
    }
}
