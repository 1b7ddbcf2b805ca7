//! Planar points and small geometric helpers.

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Self) -> T {
        (self - other).norm_sq()
    }

    /// Rotation about the origin by `angle` radians.
    pub fn rotated(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn cast<U: Real>(self) -> Point<U> {
        Point::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x.to_f64_lossy(), self.y.to_f64_lossy()]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self::new(T::lit(a[0]), T::lit(a[1]))
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Real> Div<T> for Point<T> {
    type Output = Self;
    fn div(self, k: T) -> Self {
        Self::new(self.x / k, self.y / k)
    }
}

/// Area of the intersection of two discs.
pub fn disc_intersection_area<T: Real>(c1: Point<T>, r1: T, c2: Point<T>, r2: T) -> T {
    let d = c1.dist(c2);
    let pi = T::PI();
    if d >= r1 + r2 {
        return T::zero();
    }
    let (small, large) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if d <= large - small {
        return pi * small * small;
    }
    let two = T::lit(2.0);
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (two * d * r1)).max(-T::one()).min(T::one()).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (two * d * r2)).max(-T::one()).min(T::one()).acos();
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - T::lit(0.5) * k.max(T::zero()).sqrt()
}

/// Parameter interval `[t0, t1] ⊂ [0, 1]` of the segment `a + t (b - a)`
/// lying inside the closed disc `B(center, radius)`.
pub fn segment_disc_overlap<T: Real>(a: Point<T>, b: Point<T>, center: Point<T>, radius: T) -> Option<(T, T)> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sq();
    if qa == T::zero() {
        return if f.norm() <= radius { Some((T::zero(), T::one())) } else { None };
    }
    let qb = T::lit(2.0) * (f.x * d.x + f.y * d.y);
    let qc = f.norm_sq() - radius * radius;
    let disc = qb * qb - T::lit(4.0) * qa * qc;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    let two_a = T::lit(2.0) * qa;
    let t0 = ((-qb - sq) / two_a).max(T::zero());
    let t1 = ((-qb + sq) / two_a).min(T::one());
    if t1 < t0 {
        None
    } else {
        Some((t0, t1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_area_limits() {
        let o = Point::new(0.0f64, 0.0);
        let pi = std::f64::consts::PI;
        assert!((disc_intersection_area(o, 1.0, o, 0.5) - pi * 0.25).abs() < 1e-14);
        assert_eq!(disc_intersection_area(o, 1.0, Point::new(3.0, 0.0), 1.0), 0.0);
        // Two unit discs at distance 1: 2π/3 − √3/2.
        let a = disc_intersection_area(o, 1.0, Point::new(1.0, 0.0), 1.0);
        assert!((a - (2.0 * pi / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn segment_overlap_clips() {
        let a = Point::new(-1.0f64, 0.0);
        let b = Point::new(1.0, 0.0);
        let (t0, t1) = segment_disc_overlap(a, b, Point::new(0.0, 0.0), 0.5).unwrap();
        assert!((t0 - 0.25).abs() < 1e-12 && (t1 - 0.75).abs() < 1e-12);
        assert!(segment_disc_overlap(a, b, Point::new(0.0, 1.0), 0.5).is_none());
    }
}
