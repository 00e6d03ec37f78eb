//! Scalar abstraction shared by the pointwise and geometric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the curvature algebra is written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Binomial coefficient C(n, k) as a scalar; zero when k > n.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    acc
}

/// Surface area of the unit sphere S^m in R^{m+1}.
///
/// Uses |S^m| = 2π^{(m+1)/2} / Γ((m+1)/2), evaluated through the
/// recurrence |S^m| = 2π/(m-1) |S^{m-2}| so integer dimensions stay exact
/// up to rounding.
pub fn sphere_area<T: Real>(m: usize) -> T {
    let two = T::lit(2.0);
    let two_pi = two * T::PI();
    let mut area = if m % 2 == 0 { two } else { two_pi };
    let mut d = if m % 2 == 0 { 0 } else { 1 };
    while d < m {
        d += 2;
        area = area * two_pi / T::from_usize_lossy(d - 1);
    }
    area
}

/// Pairwise summation; deterministic for a given input order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().copied().fold(T::zero(), |a, b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Composite Simpson weights on `panels` (even) equal intervals of width `h`.
pub fn simpson_weights<T: Real>(panels: usize, h: T) -> Vec<T> {
    assert!(panels >= 2 && panels % 2 == 0, "Simpson needs an even panel count");
    let third = h / T::lit(3.0);
    (0..=panels)
        .map(|i| {
            if i == 0 || i == panels {
                third
            } else if i % 2 == 1 {
                third * T::lit(4.0)
            } else {
                third * T::lit(2.0)
            }
        })
        .collect()
}

/// Richardson extrapolation of a quantity of the given order from step `2h` and `h`.
pub fn richardson<T: Real>(coarse: T, fine: T, order: i32) -> T {
    let f = T::lit(2.0).powi(order);
    (f * fine - coarse) / (f - T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn binomials() {
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f64>(6, 0), 1.0);
        assert_eq!(binomial::<f64>(3, 5), 0.0);
        assert_eq!(binomial::<f32>(7, 3), 35.0);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area::<f64>(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area::<f64>(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area::<f64>(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_area::<f64>(6) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_integrates_cubics() {
        let w = simpson_weights::<f64>(8, 0.25);
        let s: f64 = w.iter().enumerate().map(|(i, w)| w * (0.25 * i as f64).powi(3)).sum();
        assert!((s - 4.0).abs() < 1e-13);
    }
}
