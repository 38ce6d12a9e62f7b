//! Exact formal power-series operations on [`CoefficientStream`]s.
//!
//! Every result is computed coefficient-by-coefficient from its operands by
//! a finite recurrence; nothing here evaluates a function numerically.

use std::f64::consts::PI;

use super::CoefficientStream;
use crate::error::{Error, Result};

/// Cauchy product `(a * b)_n = sum_k a_k b_(n-k)`.
pub fn multiply(a: &CoefficientStream, b: &CoefficientStream) -> CoefficientStream {
    let degree = a.known_finite_degree().zip(b.known_finite_degree()).map(|(x, y)| x + y);
    let (a2, b2) = (a.clone(), b.clone());
    let out = CoefficientStream::from_fn(format!("({})*({})", a.label(), b.label()), move |n| {
        (0..=n).map(|k| a2.coeff(k) * b2.coeff(n - k)).sum()
    });
    match degree {
        Some(d) => out.with_finite_degree(d),
        None => out,
    }
}

/// `k * f`.
pub fn scale(a: &CoefficientStream, k: f64) -> CoefficientStream {
    let a2 = a.clone();
    let out = CoefficientStream::from_fn(format!("{k}*({})", a.label()), move |n| k * a2.coeff(n));
    match a.known_finite_degree() {
        Some(d) => out.with_finite_degree(d),
        None => out,
    }
}

/// `f + g`.
pub fn add(a: &CoefficientStream, b: &CoefficientStream) -> CoefficientStream {
    let degree = a.known_finite_degree().zip(b.known_finite_degree()).map(|(x, y)| x.max(y));
    let (a2, b2) = (a.clone(), b.clone());
    let out = CoefficientStream::from_fn(format!("({})+({})", a.label(), b.label()), move |n| {
        a2.coeff(n) + b2.coeff(n)
    });
    match degree {
        Some(d) => out.with_finite_degree(d),
        None => out,
    }
}

/// Antiderivative `F` with `F(0) = constant`, i.e. `F_0 = constant`, `F_n = f_(n-1) / n`.
pub fn integrate(a: &CoefficientStream, constant: f64) -> CoefficientStream {
    let a2 = a.clone();
    let out = CoefficientStream::from_fn(format!("int({})", a.label()), move |n| {
        if n == 0 {
            constant
        } else {
            a2.coeff(n - 1) / n as f64
        }
    });
    match a.known_finite_degree() {
        Some(d) => out.with_finite_degree(d + 1),
        None => out,
    }
}

/// Formal derivative `f'_n = (n + 1) f_(n+1)`.
pub fn differentiate(a: &CoefficientStream) -> CoefficientStream {
    let a2 = a.clone();
    let out = CoefficientStream::from_fn(format!("d({})", a.label()), move |n| {
        (n + 1) as f64 * a2.coeff(n + 1)
    });
    match a.known_finite_degree() {
        Some(d) => out.with_finite_degree(d.saturating_sub(1)),
        None => out,
    }
}

/// `a -> f(s * (a + c))`.
///
/// With `c = 0` this is the exact rescaling `f_n s^n`. A nonzero shift needs
/// every coefficient of `f` above `n`, so it is only accepted for streams with
/// a known finite degree; infinite series must be shifted through a dedicated
/// recurrence instead (see [`CoefficientStream::gaussian_bump`]).
pub fn compose_affine(a: &CoefficientStream, s: f64, c: f64) -> Result<CoefficientStream> {
    if !(s.is_finite() && c.is_finite()) {
        return Err(Error::invalid("affine map parameters must be finite"));
    }
    let a2 = a.clone();
    let label = format!("({})∘({s}*(a+{c}))", a.label());
    if c == 0.0 {
        let out = CoefficientStream::from_recurrence(label, move |n, _| a2.coeff(n) * s.powi(n as i32));
        return Ok(match a.known_finite_degree() {
            Some(d) => out.with_finite_degree(d),
            None => out,
        });
    }
    let Some(d) = a.known_finite_degree() else {
        return Err(Error::invalid(
            "shifted composition of an infinite series has no finite recurrence",
        ));
    };
    // f(s(a + c)) = sum_m f_m s^m sum_n C(m, n) c^(m-n) a^n
    let out = CoefficientStream::from_fn(label, move |n| {
        let mut total = 0.0;
        let mut binom = 1.0;
        for m in n..=d {
            if m > n {
                binom = binom * m as f64 / (m - n) as f64;
            }
            total += a2.coeff(m) * s.powi(m as i32) * binom * c.powi((m - n) as i32);
        }
        total
    });
    Ok(out.with_finite_degree(d))
}

/// Maclaurin series of `Erf(s a)`, built as `(2 s / sqrt(pi))` times the
/// antiderivative of `exp(-s^2 a^2)`.
pub fn erf_scaled(s: f64) -> CoefficientStream {
    let bump = CoefficientStream::gaussian_bump(s, 0.0);
    scale(&integrate(&bump, 0.0), 2.0 * s / PI.sqrt())
}

/// Checks every coefficient up to `upto` is finite.
pub fn check_finite(a: &CoefficientStream, upto: usize) -> Result<()> {
    for n in 0..=upto {
        a.checked_coeff(n)?;
    }
    Ok(())
}
