//! Best fixed predictor in hindsight over the ball `|w|^2 <= B_w`.
//!
//! The cumulative loss `F(w) = sum_t l(<w, Psi(x_t)>, y_t)` is minimized by
//! accelerated projected gradient descent with backtracking and adaptive
//! restart. For the linear kernel the search runs over `w` in `R^d`; for
//! other kernels over the span of `Psi(x_1), ..., Psi(x_T)` (which contains a
//! minimizer), with the Gram matrix in memory.
//!
//! Optimality is certified by the Frank-Wolfe gap
//! `max_{|v|^2 <= B_w} <grad F(w), w - v> = <grad F(w), w> + sqrt(B_w) |grad F(w)|`,
//! an upper bound on `F(w) - min F` for convex `F`.

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::losses::AnalyticLoss;
use crate::numeric::{dot, NeumaierSum};

/// Largest number of examples accepted for the Gram-matrix path.
const MAX_GRAM_EXAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorOptions {
    pub max_iter: usize,
    /// Stop once the gap is below `rel_tol * max(1, F(w))`.
    pub rel_tol: f64,
}

impl Default for ComparatorOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            rel_tol: 1e-10,
        }
    }
}

/// The best-found predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Explicit weights (linear kernel).
    Primal(Vec<f64>),
    /// `w = sum_t alpha_t Psi(x_t)` over the examples.
    Expansion(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorSolution {
    pub w: Representation,
    pub norm_sq: f64,
    /// `F(w)` at the returned, feasible `w`: an upper bound on the minimum.
    pub min_cumulative_loss: f64,
    /// Certified bound on `F(w) - min F`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ComparatorSolution {
    /// Lower bound on the true minimum.
    pub fn lower_bound(&self) -> f64 {
        self.min_cumulative_loss - self.gap
    }

    pub fn primal(&self) -> Option<&[f64]> {
        match &self.w {
            Representation::Primal(w) => Some(w),
            Representation::Expansion(_) => None,
        }
    }

    /// Error if the optimizer stopped before reaching its tolerance.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { gap: self.gap })
        }
    }
}

/// Vector space in which the search runs.
trait Space {
    type V: Clone;
    fn zero(&self) -> Self::V;
    fn predictions(&self, v: &Self::V) -> Vec<f64>;
    /// Representation of `sum_t g_t Psi(x_t)`.
    fn gradient(&self, g: &[f64]) -> Self::V;
    fn inner(&self, a: &Self::V, b: &Self::V) -> f64;
    /// `a + c b`
    fn axpy(&self, a: &Self::V, c: f64, b: &Self::V) -> Self::V;
    fn scale(&self, a: &Self::V, c: f64) -> Self::V;
}

struct Primal<'a> {
    xs: &'a [Vec<f64>],
    dim: usize,
}

impl Space for Primal<'_> {
    type V = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn predictions(&self, v: &Vec<f64>) -> Vec<f64> {
        self.xs.iter().map(|x| dot(v, x)).collect()
    }

    fn gradient(&self, g: &[f64]) -> Vec<f64> {
        let mut acc = vec![NeumaierSum::default(); self.dim];
        for (gi, x) in g.iter().zip(self.xs) {
            for (a, xk) in acc.iter_mut().zip(x) {
                a.add(gi * xk);
            }
        }
        acc.iter().map(NeumaierSum::value).collect()
    }

    fn inner(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        dot(a, b)
    }

    fn axpy(&self, a: &Vec<f64>, c: f64, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + c * y).collect()
    }

    fn scale(&self, a: &Vec<f64>, c: f64) -> Vec<f64> {
        a.iter().map(|x| c * x).collect()
    }
}

/// Coefficients `alpha` together with `K alpha`.
#[derive(Clone)]
struct Dual {
    alpha: Vec<f64>,
    image: Vec<f64>,
}

struct Gram {
    k: Vec<f64>,
    n: usize,
}

impl Gram {
    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(&self.k[i * self.n..(i + 1) * self.n], v)).collect()
    }
}

impl Space for Gram {
    type V = Dual;

    fn zero(&self) -> Dual {
        Dual {
            alpha: vec![0.0; self.n],
            image: vec![0.0; self.n],
        }
    }

    fn predictions(&self, v: &Dual) -> Vec<f64> {
        v.image.clone()
    }

    fn gradient(&self, g: &[f64]) -> Dual {
        Dual {
            alpha: g.to_vec(),
            image: self.matvec(g),
        }
    }

    fn inner(&self, a: &Dual, b: &Dual) -> f64 {
        dot(&a.alpha, &b.image)
    }

    fn axpy(&self, a: &Dual, c: f64, b: &Dual) -> Dual {
        Dual {
            alpha: a.alpha.iter().zip(&b.alpha).map(|(x, y)| x + c * y).collect(),
            image: a.image.iter().zip(&b.image).map(|(x, y)| x + c * y).collect(),
        }
    }

    fn scale(&self, a: &Dual, c: f64) -> Dual {
        Dual {
            alpha: a.alpha.iter().map(|x| c * x).collect(),
            image: a.image.iter().map(|x| c * x).collect(),
        }
    }
}

struct Eval<V> {
    v: V,
    value: f64,
    grad: V,
    norm_sq: f64,
}

struct Problem<'a, S: Space> {
    space: S,
    ys: &'a [f64],
    loss: &'a AnalyticLoss,
    b_w: f64,
}

impl<S: Space> Problem<'_, S> {
    fn eval(&self, v: S::V) -> Result<Eval<S::V>> {
        let preds = self.space.predictions(&v);
        let mut value = NeumaierSum::default();
        let mut slopes = Vec::with_capacity(preds.len());
        for (a, y) in preds.iter().zip(self.ys) {
            value.add(self.loss.loss(*a, *y));
            slopes.push(self.loss.loss_slope(*a, *y));
        }
        let value = value.value();
        if !value.is_finite() {
            return Err(Error::numeric("comparator objective is not finite"));
        }
        let grad = self.space.gradient(&slopes);
        let norm_sq = self.space.inner(&v, &v).max(0.0);
        Ok(Eval { v, value, grad, norm_sq })
    }

    fn project(&self, v: S::V) -> S::V {
        let n = self.space.inner(&v, &v);
        if n > self.b_w {
            self.space.scale(&v, (self.b_w / n).sqrt())
        } else {
            v
        }
    }

    fn gap(&self, e: &Eval<S::V>) -> f64 {
        let g_norm = self.space.inner(&e.grad, &e.grad).max(0.0).sqrt();
        (self.space.inner(&e.grad, &e.v) + self.b_w.sqrt() * g_norm).max(0.0)
    }

    fn solve(&self, opts: &ComparatorOptions) -> Result<(Eval<S::V>, f64, usize, bool)> {
        let mut x = self.eval(self.space.zero())?;
        let mut best_gap = self.gap(&x);
        let target = |value: f64| opts.rel_tol * value.abs().max(1.0);
        if self.b_w == 0.0 || best_gap <= target(x.value) {
            return Ok((x, best_gap, 0, true));
        }
        let mut y = self.eval(x.v.clone())?;
        let mut t = 1.0f64;
        let mut lip = 1.0f64;
        for iter in 1..=opts.max_iter {
            // Backtracking on the curvature along the step, measured through
            // gradients: objective values lose all resolution near the
            // optimum once the loss sum is large, gradients do not.
            let z = loop {
                let cand = self.project(self.space.axpy(&y.v, -1.0 / lip, &y.grad));
                let cand = self.eval(cand)?;
                let diff = self.space.axpy(&cand.v, -1.0, &y.v);
                let step_sq = self.space.inner(&diff, &diff);
                let curvature = self.space.inner(&self.space.axpy(&cand.grad, -1.0, &y.grad), &diff);
                if step_sq == 0.0 || curvature <= lip * step_sq * (1.0 + 1e-10) {
                    break cand;
                }
                lip *= 2.0;
                if !lip.is_finite() {
                    return Err(Error::numeric("comparator step size collapsed"));
                }
            };
            // Gradient-mapping restart test: momentum points uphill.
            let restart = self
                .space
                .inner(&self.space.axpy(&y.v, -1.0, &z.v), &self.space.axpy(&z.v, -1.0, &x.v))
                > 0.0;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let diff = self.space.axpy(&z.v, -1.0, &x.v);
            let momentum = self.project(self.space.axpy(&z.v, (t - 1.0) / t_next, &diff));
            x = z;
            let gap = self.gap(&x);
            best_gap = gap;
            if gap <= target(x.value) {
                return Ok((x, best_gap, iter, true));
            }
            if restart {
                t = 1.0;
                y = self.eval(x.v.clone())?;
            } else {
                t = t_next;
                y = self.eval(momentum)?;
            }
            lip *= 0.95;
        }
        Ok((x, best_gap, opts.max_iter, false))
    }
}

/// Minimum of the cumulative loss over `|w|^2 <= B_w` on exact examples,
/// with default options.
pub fn batch_comparator(
    examples: &[(Vec<f64>, f64)],
    loss: &AnalyticLoss,
    kernel: &Kernel,
    b_w: f64,
) -> Result<ComparatorSolution> {
    batch_comparator_with(examples, loss, kernel, b_w, &ComparatorOptions::default())
}

pub fn batch_comparator_with(
    examples: &[(Vec<f64>, f64)],
    loss: &AnalyticLoss,
    kernel: &Kernel,
    b_w: f64,
    opts: &ComparatorOptions,
) -> Result<ComparatorSolution> {
    if !(b_w >= 0.0 && b_w.is_finite()) {
        return Err(Error::invalid(format!("B_w must be nonnegative, got {b_w}")));
    }
    if examples.is_empty() {
        return Err(Error::InsufficientData("comparator needs at least one example".into()));
    }
    let dim = examples[0].0.len();
    if let Some((x, _)) = examples.iter().find(|(x, _)| x.len() != dim) {
        return Err(Error::DimensionMismatch(dim, x.len()));
    }
    let xs: Vec<Vec<f64>> = examples.iter().map(|(x, _)| x.clone()).collect();
    let ys: Vec<f64> = examples.iter().map(|(_, y)| *y).collect();
    let finish = |w: Representation, e_value: f64, norm_sq: f64, gap: f64, iterations: usize, converged: bool| {
        if !converged {
            log::warn!("batch comparator stopped after {iterations} iterations with gap {gap:e}");
        }
        ComparatorSolution {
            w,
            norm_sq,
            min_cumulative_loss: e_value,
            gap,
            iterations,
            converged,
        }
    };
    if kernel.is_linear() {
        let problem = Problem {
            space: Primal { xs: &xs, dim },
            ys: &ys,
            loss,
            b_w,
        };
        let (e, gap, it, ok) = problem.solve(opts)?;
        Ok(finish(Representation::Primal(e.v.clone()), e.value, e.norm_sq, gap, it, ok))
    } else {
        let n = xs.len();
        if n > MAX_GRAM_EXAMPLES {
            return Err(Error::invalid(format!(
                "kernelized comparator limited to {MAX_GRAM_EXAMPLES} examples, got {n}"
            )));
        }
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = kernel.eval(&xs[i], &xs[j])?;
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let problem = Problem {
            space: Gram { k, n },
            ys: &ys,
            loss,
            b_w,
        };
        let (e, gap, it, ok) = problem.solve(opts)?;
        Ok(finish(Representation::Expansion(e.v.alpha.clone()), e.value, e.norm_sq, gap, it, ok))
    }
}
