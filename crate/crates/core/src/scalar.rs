//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the solvers are generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for [`Real::lit`].
#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Pairwise-blocked sum: blocks of 1024 summed sequentially, block sums
/// summed sequentially. Order is fixed, so results are reproducible.
pub fn stable_sum<T: Real, I: IntoIterator<Item = T>>(items: I) -> T {
    const BLOCK: usize = 1024;
    let mut total = T::zero();
    let mut block = T::zero();
    let mut count = 0usize;
    for x in items {
        block = block + x;
        count += 1;
        if count == BLOCK {
            total = total + block;
            block = T::zero();
            count = 0;
        }
    }
    total + block
}

/// Dot product with the same blocking as [`stable_sum`].
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    stable_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r2: T,
    pub samples: usize,
}

/// Streaming accumulator for [`LineFit`]; works on centred sums once
/// finished so large sample counts keep their precision.
#[derive(Clone, Debug, Default)]
pub struct LineFitter {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
}

impl LineFitter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0.0
    }

    /// `None` when fewer than two samples or all `x` coincide.
    pub fn finish<T: Real>(&self) -> Option<LineFit<T>> {
        if self.n < 2.0 {
            return None;
        }
        let n = self.n;
        let cxx = self.sxx - self.sx * self.sx / n;
        let cxy = self.sxy - self.sx * self.sy / n;
        let cyy = self.syy - self.sy * self.sy / n;
        if cxx <= 1e-300 * n.max(1.0) || !cxx.is_finite() {
            return None;
        }
        let slope = cxy / cxx;
        let intercept = (self.sy - slope * self.sx) / n;
        let r2 = if cyy <= 0.0 { 1.0 } else { (cxy * cxy / (cxx * cyy)).min(1.0) };
        Some(LineFit { slope: T::lit(slope), intercept: T::lit(intercept), r2: T::lit(r2), samples: n as usize })
    }
}

/// Least-squares fit of `ys` against `xs`.
pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Option<LineFit<T>> {
    let mut f = LineFitter::new();
    for (x, y) in xs.iter().zip(ys) {
        f.push(x.to_f64_lossy(), y.to_f64_lossy());
    }
    f.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fit_is_none() {
        assert!(fit_line(&[1.0f64, 1.0], &[2.0, 3.0]).is_none());
        assert!(fit_line(&[1.0f64], &[2.0]).is_none());
    }

    #[test]
    fn stable_sum_matches_naive_for_small_inputs() {
        let v: Vec<f32> = (0..5000).map(|i| i as f32 * 0.5).collect();
        let s: f32 = stable_sum(v.iter().copied());
        assert!((s as f64 - 0.5 * 4999.0 * 5000.0 / 2.0).abs() < 1.0);
    }
}
