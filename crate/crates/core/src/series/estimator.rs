use rand::RngCore;

use super::{CoefficientStream, IndexSampler};
use crate::error::{Error, Result};
use crate::numeric::CompensatedProduct;

/// Source of independent realizations of a real random variable `X`.
pub trait ScalarSampleSource {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<f64>;
}

impl<F> ScalarSampleSource for F
where
    F: FnMut(&mut dyn RngCore) -> f64,
{
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<f64> {
        Ok(self(rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEstimate {
    pub theta: f64,
    /// Number of draws consumed; always equals the sampled index `N`.
    pub samples_used: u64,
}

/// Unbiased estimate of `f(E[X])` for analytic `f(a) = sum_n c_n a^n`.
///
/// Draws `N` from `law`, takes `N` independent samples of `X` and returns
/// `c_N / Pr(N) * x_1 * ... * x_N`. For the geometric law the weight is
/// `p^(N+1) / (p - 1)`, and `N = 0` yields `p/(p-1) * c_0`.
///
/// The caller is responsible for `f`'s series converging absolutely on the
/// range that matters; that is not checked.
pub fn estimate_scalar<L, R, S>(
    f: &CoefficientStream,
    src: &mut S,
    law: &L,
    rng: &mut R,
) -> Result<ScalarEstimate>
where
    L: IndexSampler + ?Sized,
    R: RngCore,
    S: ScalarSampleSource + ?Sized,
{
    let n = law.sample_index(rng)?;
    let mut product = CompensatedProduct::one();
    for _ in 0..n {
        let x = src.draw(rng)?;
        if !x.is_finite() {
            return Err(Error::numeric(format!("sample source produced {x}")));
        }
        product.mul(x);
    }
    let coeff = f.checked_coeff(n as usize)?;
    let theta = if coeff == 0.0 {
        0.0
    } else {
        coeff * law.inverse_pmf(n) * product.value()
    };
    if !theta.is_finite() {
        return Err(Error::numeric(format!("estimate overflowed at N = {n}")));
    }
    Ok(ScalarEstimate {
        theta,
        samples_used: n,
    })
}

/// Upper bound on `E[theta^2]`: `p/(p-1) * f_+(sqrt(p E[X^2]))^2`, where
/// `f_+(x) = sum_n |c_n| x^n`.
pub fn second_moment_bound(
    f_plus_at: impl Fn(f64) -> f64,
    law: &super::GeometricLaw,
    second_moment_x: f64,
) -> Result<f64> {
    if !(second_moment_x >= 0.0) {
        return Err(Error::invalid(format!(
            "second moment must be nonnegative, got {second_moment_x}"
        )));
    }
    let p = law.p();
    let f_plus = f_plus_at((p * second_moment_x).sqrt());
    Ok(p / (p - 1.0) * f_plus * f_plus)
}
