//! Ball-scan estimate of the Frostman exponent `d` in `σ(B(x, ε)) ≤ C ε^d`.

use super::DiskMeasure;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{fit_line, Real};

/// Centres at which `sup_x σ(B(x, ε))` is probed.
#[derive(Clone, Debug)]
pub enum Probes<T> {
    /// The same explicit list at every scale.
    Explicit(Vec<Point<T>>),
    /// Support points plus a grid of pitch `ε/2` over the support's
    /// bounding box (grown by `ε`), rebuilt at each scale.
    Auto,
    /// [`Probes::Auto`] plus a fixed list of extra centres.
    Augmented(Vec<Point<T>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrostmanEstimate<T> {
    pub d_hat: T,
    pub c_hat: T,
    pub radii: Vec<T>,
    pub sup_masses: Vec<T>,
}

/// Probe set used by [`Probes::Auto`] at scale `eps`.
pub fn auto_probes<T: Real>(m: &DiskMeasure<T>, eps: T) -> Vec<Point<T>> {
    let resolution = ((T::lit(2.0) / eps).to_f64_lossy().ceil() as usize).clamp(8, 4096);
    let mut probes = m.support_points(resolution);
    let (lo, hi) = m.support_bounds();
    let pitch = eps * T::lit(0.5);
    let nx = ((hi.x - lo.x + eps * T::lit(2.0)) / pitch).ceil().to_f64_lossy() as usize + 1;
    let ny = ((hi.y - lo.y + eps * T::lit(2.0)) / pitch).ceil().to_f64_lossy() as usize + 1;
    for j in 0..ny {
        for i in 0..nx {
            let p =
                Point::new(lo.x - eps + T::from_usize_lossy(i) * pitch, lo.y - eps + T::from_usize_lossy(j) * pitch);
            // Balls centred farther than ε outside the disk are empty.
            if p.norm() <= T::one() + eps {
                probes.push(p);
            }
        }
    }
    probes
}

/// Fits `log sup_x σ(B(x, ε)) = d log ε + log C` over `radii`.
///
/// Radii whose supremum is zero carry no information and are skipped; at
/// least two informative radii are required. The slope is clamped to
/// `[0, 2]`.
pub fn estimate_frostman<T: Real>(m: &DiskMeasure<T>, radii: &[T], probes: &Probes<T>) -> Result<FrostmanEstimate<T>> {
    if radii.len() < 2 {
        return Err(Error::InsufficientScaleRange(format!("{} radii supplied", radii.len())));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
    }
    if radii.iter().any(|&r| !(r > T::zero() && r < T::one())) {
        return Err(Error::InvalidArgument("radii must lie in (0, 1)".into()));
    }
    let mut sup_masses = Vec::with_capacity(radii.len());
    for &eps in radii {
        let auto;
        let pts: &[Point<T>] = match probes {
            Probes::Explicit(p) => p,
            Probes::Auto => {
                auto = auto_probes(m, eps);
                &auto
            }
            Probes::Augmented(extra) => {
                auto = [auto_probes(m, eps), extra.clone()].concat();
                &auto
            }
        };
        let sup = pts.iter().map(|&x| m.ball_mass(x, eps)).fold(T::zero(), T::max);
        sup_masses.push(sup);
    }
    let (xs, ys): (Vec<T>, Vec<T>) =
        radii.iter().zip(&sup_masses).filter(|(_, &s)| s > T::zero()).map(|(&r, &s)| (r.ln(), s.ln())).unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientScaleRange("fewer than two radii with positive ball mass".into()));
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::InsufficientScaleRange("degenerate least-squares fit".into()))?;
    Ok(FrostmanEstimate {
        d_hat: fit.slope.max(T::zero()).min(T::lit(2.0)),
        c_hat: fit.intercept.exp(),
        radii: radii.to_vec(),
        sup_masses,
    })
}

/// Geometric radius ladder `start, start·ratio, …` (`count` entries).
pub fn geometric_radii<T: Real>(start: T, ratio: T, count: usize) -> Vec<T> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}
