use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Computes coefficient `n` given the already-memoized prefix `c_0..c_{n-1}`.
type Generator = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;

/// Largest index the memo will grow to. Matches the sampler's safety cap.
pub const MAX_COEFF_INDEX: usize = 1_000_000;

/// Consecutive negligible terms required before a series sum is declared converged.
const CONVERGED_RUN: usize = 3;
const SUM_REL_TOL: f64 = 1e-16;
const MAX_SUM_TERMS: usize = 100_000;

struct Inner {
    label: String,
    finite_degree: Option<usize>,
    generator: Box<Generator>,
    memo: RwLock<Vec<f64>>,
}

/// Lazily evaluated, memoized Taylor coefficients `c_n` of an analytic function.
///
/// Cloning is cheap and clones share the memo, which is safe for concurrent readers.
#[derive(Clone)]
pub struct CoefficientStream {
    inner: Arc<Inner>,
}

impl fmt::Debug for CoefficientStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientStream")
            .field("label", &self.inner.label)
            .field("finite_degree", &self.inner.finite_degree)
            .finish()
    }
}

impl CoefficientStream {
    /// Stream whose coefficients follow a recurrence over the memoized prefix.
    pub fn from_recurrence(
        label: impl Into<String>,
        generator: impl Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(label.into(), None, Box::new(generator))
    }

    /// Stream with a closed form for each coefficient.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self::build(label.into(), None, Box::new(move |n, _| f(n)))
    }

    /// Finite coefficient list; everything past the last entry is zero.
    pub fn polynomial(label: impl Into<String>, coeffs: Vec<f64>) -> Self {
        let degree = coeffs
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0);
        let generator = move |n: usize, _: &[f64]| coeffs.get(n).copied().unwrap_or(0.0);
        Self::build(label.into(), Some(degree), Box::new(generator))
    }

    /// `sum_n k^n/n! a^n`, i.e. `exp(k a)`.
    pub fn exp_linear(k: f64) -> Self {
        Self::from_recurrence(format!("exp({k}*a)"), move |n, prev| {
            if n == 0 {
                1.0
            } else {
                prev[n - 1] * k / n as f64
            }
        })
    }

    /// Coefficients of `exp(-s^2 (a - c)^2)` from the ODE `h' = -2 s^2 (a - c) h`,
    /// i.e. `h_{n+1} = 2 s^2 (c h_n - h_{n-1}) / (n + 1)`.
    pub fn gaussian_bump(s: f64, c: f64) -> Self {
        let s2 = s * s;
        Self::from_recurrence(format!("exp(-{s}^2 (a - {c})^2)"), move |n, prev| match n {
            0 => (-s2 * c * c).exp(),
            1 => 2.0 * s2 * c * prev[0],
            _ => 2.0 * s2 * (c * prev[n - 1] - prev[n - 2]) / n as f64,
        })
    }

    /// Identically zero stream.
    pub fn zero() -> Self {
        Self::polynomial("0", vec![])
    }

    fn build(label: String, finite_degree: Option<usize>, generator: Box<Generator>) -> Self {
        Self {
            inner: Arc::new(Inner {
                label,
                finite_degree,
                generator,
                memo: RwLock::new(Vec::new()),
            }),
        }
    }

    /// Declares that all coefficients past `degree` vanish.
    pub fn with_finite_degree(self, degree: usize) -> Self {
        let inner = Arc::try_unwrap(self.inner).unwrap_or_else(|shared| Inner {
            label: shared.label.clone(),
            finite_degree: shared.finite_degree,
            generator: {
                let shared = Arc::clone(&shared);
                Box::new(move |n, _| CoefficientStream { inner: Arc::clone(&shared) }.coeff(n))
            },
            memo: RwLock::new(Vec::new()),
        });
        let finite_degree = Some(inner.finite_degree.map_or(degree, |d| d.min(degree)));
        Self {
            inner: Arc::new(Inner { finite_degree, ..inner }),
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// Smallest `D` with `c_n = 0` for all `n > D`, when known.
    pub fn known_finite_degree(&self) -> Option<usize> {
        self.inner.finite_degree
    }

    /// Coefficient `c_n`. Pure: the same `n` always yields the same value.
    pub fn coeff(&self, n: usize) -> f64 {
        if let Some(d) = self.inner.finite_degree {
            if n > d {
                return 0.0;
            }
        }
        {
            let memo = self.inner.memo.read().expect("coefficient memo poisoned");
            if let Some(c) = memo.get(n) {
                return *c;
            }
        }
        let mut memo = self.inner.memo.write().expect("coefficient memo poisoned");
        while memo.len() <= n {
            let k = memo.len();
            let c = (self.inner.generator)(k, &memo);
            memo.push(c);
        }
        memo[n]
    }

    /// Like [`coeff`](Self::coeff), but reports overflow as a numeric fault.
    pub fn checked_coeff(&self, n: usize) -> Result<f64> {
        if n > MAX_COEFF_INDEX {
            return Err(Error::CapExceeded {
                drawn: n as u64,
                cap: MAX_COEFF_INDEX as u64,
            });
        }
        let c = self.coeff(n);
        if c.is_finite() {
            Ok(c)
        } else {
            Err(Error::numeric(format!(
                "coefficient {n} of {} is {c}",
                self.inner.label
            )))
        }
    }

    /// `sum_n c_n x^n`, stopping once three consecutive terms are negligible
    /// relative to the running sum.
    pub fn eval(&self, x: f64) -> f64 {
        self.sum_terms(x, |c| c)
    }

    /// `sum_n |c_n| x^n`, the absolute companion series (for `x >= 0`).
    pub fn eval_abs(&self, x: f64) -> f64 {
        self.sum_terms(x, f64::abs)
    }

    fn sum_terms(&self, x: f64, map: impl Fn(f64) -> f64) -> f64 {
        let mut sum = NeumaierSum::default();
        let mut power = 1.0;
        let mut small_run = 0;
        let limit = self.inner.finite_degree.map_or(MAX_SUM_TERMS, |d| d + 1);
        for n in 0..limit {
            let term = map(self.coeff(n)) * power;
            sum.add(term);
            if term.abs() < SUM_REL_TOL * sum.value().abs() {
                small_run += 1;
                if small_run >= CONVERGED_RUN {
                    break;
                }
            } else {
                small_run = 0;
            }
            power *= x;
        }
        sum.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_reports_degree_and_zero_tail() {
        let s = CoefficientStream::polynomial("q", vec![1.0, 2.0, 1.0, 0.0]);
        assert_eq!(s.known_finite_degree(), Some(2));
        assert_eq!(s.coeff(2), 1.0);
        assert_eq!(s.coeff(3), 0.0);
        assert_eq!(s.coeff(1000), 0.0);
    }

    #[test]
    fn exp_coefficients_and_sum() {
        let s = CoefficientStream::exp_linear(1.0);
        assert!((s.coeff(3) - 1.0 / 6.0).abs() < 1e-16);
        assert!((s.eval(1.0) - std::f64::consts::E).abs() < 1e-15);
        assert!((s.eval(-2.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn coefficients_are_pure_across_clones() {
        let s = CoefficientStream::exp_linear(0.5);
        let a = s.coeff(40);
        let t = s.clone();
        assert_eq!(t.coeff(40), a);
        assert_eq!(s.coeff(10), t.coeff(10));
    }

    #[test]
    fn with_finite_degree_truncates_shared_streams() {
        let s = CoefficientStream::exp_linear(1.0);
        let keep = s.clone();
        let t = s.with_finite_degree(2);
        assert_eq!(t.known_finite_degree(), Some(2));
        assert_eq!(t.coeff(3), 0.0);
        assert_eq!(t.coeff(2), 0.5);
        assert!(keep.coeff(3) > 0.0);
    }

    #[test]
    fn gaussian_bump_matches_direct_evaluation() {
        // exp(-s^2 (a - 1)^2) at a = 0.5 with s = 1.5
        let s = CoefficientStream::gaussian_bump(1.5, 1.0);
        let direct = (-(1.5f64 * 1.5) * 0.25).exp();
        assert!((s.eval(0.5) - direct).abs() < 1e-14);
    }

    #[test]
    fn zero_stream_sums_to_zero() {
        let z = CoefficientStream::zero();
        assert_eq!(z.eval(3.0), 0.0);
        assert_eq!(z.eval_abs(3.0), 0.0);
    }

    #[test]
    fn checked_coeff_flags_overflow() {
        let s = CoefficientStream::from_fn("blowup", |n| if n == 3 { f64::INFINITY } else { 1.0 });
        assert!(s.checked_coeff(2).is_ok());
        assert!(matches!(s.checked_coeff(3), Err(Error::NumericFault(_))));
    }

    #[test]
    fn concurrent_readers_agree() {
        let s = CoefficientStream::exp_linear(2.0);
        let values: Vec<f64> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|i| {
                    let s = s.clone();
                    scope.spawn(move || s.coeff(50 + i) * 0.0 + s.coeff(50))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(values.windows(2).all(|w| w[0] == w[1]));
    }
}
