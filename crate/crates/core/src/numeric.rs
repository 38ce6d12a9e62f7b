//! Small floating-point kernels shared by the estimators: compensated
//! products, Neumaier summation and pairwise dot products.

/// Running product kept as an unevaluated sum `hi + lo` (double-double).
#[derive(Debug, Clone, Copy)]
pub(crate) struct CompensatedProduct {
    hi: f64,
    lo: f64,
}

impl CompensatedProduct {
    pub(crate) fn one() -> Self {
        Self { hi: 1.0, lo: 0.0 }
    }

    pub(crate) fn mul(&mut self, x: f64) {
        let p = self.hi * x;
        let err = self.hi.mul_add(x, -p);
        let lo = err + self.lo * x;
        let s = p + lo;
        self.lo = lo - (s - p);
        self.hi = s;
    }

    pub(crate) fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Ordered product of `xs` with compensated accumulation.
pub(crate) fn ordered_product(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedProduct::one();
    for x in xs {
        acc.mul(x);
    }
    acc.value()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise-summed inner product. Summation order depends only on the
/// length, so results are reproducible.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            s += x * y;
        }
        return s;
    }
    let mid = a.len() / 2;
    dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..])
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
