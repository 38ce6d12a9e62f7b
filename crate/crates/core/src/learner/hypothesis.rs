use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::feature_map::{prod_exact_unchecked, prod_pair, prod_pair_unchecked, FeatureEstimate};
use crate::kernels::Kernel;
use crate::numeric::NeumaierSum;

use super::{norm_after_step, projection_factor};

/// `w = sum_i alpha_i Psi~(x_i)` with a cached squared norm.
///
/// Features of different degree are orthogonal, so terms are bucketed by
/// degree and inner products only visit the matching bucket. Terms whose
/// feature is identically zero are kept for bookkeeping but never visited.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    kernel: Kernel,
    p: f64,
    alphas: Vec<f64>,
    features: Vec<FeatureEstimate>,
    buckets: BTreeMap<usize, Vec<usize>>,
    norm_sq: f64,
}

impl Hypothesis {
    pub fn new(kernel: Kernel, p: f64) -> Self {
        Self {
            kernel,
            p,
            alphas: Vec::new(),
            features: Vec::new(),
            buckets: BTreeMap::new(),
            norm_sq: 0.0,
        }
    }

    /// Builds a hypothesis term by term, maintaining the norm incrementally.
    pub fn from_terms(kernel: Kernel, p: f64, terms: impl IntoIterator<Item = (f64, FeatureEstimate)>) -> Result<Self> {
        let mut h = Self::new(kernel, p);
        for (alpha, f) in terms {
            h.push(alpha, f)?;
        }
        Ok(h)
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &FeatureEstimate)> {
        self.alphas.iter().copied().zip(&self.features)
    }

    /// Cached `|w|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn check(&self, f: &FeatureEstimate) -> Result<()> {
        if f.kernel() != self.kernel || f.p().to_bits() != self.p.to_bits() {
            return Err(Error::KernelMismatch(format!(
                "hypothesis uses {} with p = {}, feature uses {} with p = {}",
                self.kernel.name(),
                self.p,
                f.kernel().name(),
                f.p()
            )));
        }
        if let Some(&i) = self.buckets.get(&f.degree()).and_then(|b| b.first()) {
            prod_pair(&self.features[i], f)?;
        }
        Ok(())
    }

    /// `<w, f>` for a feature estimate.
    pub fn inner_with(&self, f: &FeatureEstimate) -> Result<f64> {
        self.check(f)?;
        Ok(self.inner_unchecked(f))
    }

    pub(crate) fn inner_unchecked(&self, f: &FeatureEstimate) -> f64 {
        if f.is_zero() {
            return 0.0;
        }
        let mut sum = NeumaierSum::default();
        if let Some(bucket) = self.buckets.get(&f.degree()) {
            for &i in bucket {
                sum.add(self.alphas[i] * prod_pair_unchecked(&self.features[i], f));
            }
        }
        sum.value()
    }

    /// `<w, Psi(x)>` for an exactly known `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let mut sum = NeumaierSum::default();
        for bucket in self.buckets.values() {
            for &i in bucket {
                let f = &self.features[i];
                if f.degree() > 0 && f.copy(0).len() != x.len() {
                    return Err(Error::DimensionMismatch(f.copy(0).len(), x.len()));
                }
            }
        }
        for (i, f) in self.features.iter().enumerate() {
            if !f.is_zero() {
                sum.add(self.alphas[i] * prod_exact_unchecked(f, x));
            }
        }
        Ok(sum.value())
    }

    /// Appends `alpha Psi~`, updating the cached norm with
    /// `|w|^2 + 2 alpha <w, f> + alpha^2 |f|^2`.
    pub fn push(&mut self, alpha: f64, f: FeatureEstimate) -> Result<()> {
        self.check(&f)?;
        let cross = self.inner_unchecked(&f);
        let self_sq = f.squared_norm();
        let norm = norm_after_step(self.norm_sq, alpha, cross, self_sq);
        if !norm.is_finite() {
            return Err(Error::numeric("hypothesis norm overflowed"));
        }
        self.norm_sq = norm;
        let idx = self.features.len();
        if !f.is_zero() {
            self.buckets.entry(f.degree()).or_default().push(idx);
        }
        self.alphas.push(alpha);
        self.features.push(f);
        Ok(())
    }

    /// Multiplies every coefficient by `k`.
    pub fn scale(&mut self, k: f64) {
        self.alphas.iter_mut().for_each(|a| *a *= k);
        self.norm_sq *= k * k;
    }

    /// Rescales onto `|w|^2 <= B_w` if needed; returns the factor applied.
    pub fn project(&mut self, b_w: f64) -> Option<f64> {
        let factor = projection_factor(self.norm_sq, b_w)?;
        self.scale(factor);
        Some(factor)
    }

    /// `sum_i sum_j alpha_i alpha_j <f_i, f_j>` from scratch.
    pub fn exact_squared_norm(&self) -> f64 {
        let mut total = NeumaierSum::default();
        for bucket in self.buckets.values() {
            for &i in bucket {
                for &j in bucket {
                    total.add(
                        self.alphas[i] * self.alphas[j] * prod_pair_unchecked(&self.features[i], &self.features[j]),
                    );
                }
            }
        }
        total.value()
    }
}
