//! t-independent flow-box lifts of vortex solutions and the 3D identities
//! they must satisfy.
//!
//! On the box `(0,1) × D` with `X = ∂_t`, `λ = dt` and the flat product metric,
//! a solution with `β = A_t = 0` and no `t`-dependence is a vortex on each
//! slice. Gauge-dependent data (connection components, the phase of `α`)
//! are never built; every check goes through `u = log |α|²`.

use std::io::Write;

use crate::concentrate::{hausdorff_distance, sublevel_set, LevelSetKind};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{fit_line, stable_sum, Real};
use crate::vortex::{grad_p, laplacian, pde_residual, sup_gradient_ratio, total_energy, VortexField};

#[derive(Clone, Debug, PartialEq)]
pub struct FlowBoxSolution<T> {
    pub base: VortexField<T>,
    /// Length of the `t` fibre.
    pub t_length: T,
    /// `∫ λ ∧ F_A` over the box.
    pub energy_3d: T,
}

impl<T: Real> FlowBoxSolution<T> {
    /// `|α|² = e^u` at node `(i, j)` of any slice.
    pub fn alpha_sq(&self, i: usize, j: usize) -> T {
        self.base.at(i, j).exp()
    }

    /// `β ≡ 0`.
    pub fn beta(&self) -> T {
        T::zero()
    }

    /// `A_t ≡ 0`.
    pub fn a_t(&self) -> T {
        T::zero()
    }
}

pub fn lift_to_flowbox<T: Real>(f: VortexField<T>) -> FlowBoxSolution<T> {
    let t_length = T::one();
    let energy_3d = total_energy(&f) * t_length;
    FlowBoxSolution { base: f, t_length, energy_3d }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport<T> {
    pub name: String,
    pub sup_residual: T,
    /// Root mean square over the evaluated nodes.
    pub l2_residual: T,
    pub spacing: T,
    /// Slope of `log sup_residual` against `log h`, set by [`with_refinement`].
    pub refinement_slope: Option<T>,
}

impl<T: Real> IdentityReport<T> {
    fn exact(name: &str, spacing: T) -> Self {
        Self { name: name.into(), sup_residual: T::zero(), l2_residual: T::zero(), spacing, refinement_slope: None }
    }
}

/// Residuals of the three curvature equations and the `β` Dirac component.
///
/// Line 1 is `⋆dA = r(1 − |α|²)`, evaluated gauge-invariantly as the scalar
/// equation for `u` at nodes `2h` away from the zeros. The mixed lines and
/// the `β` equation vanish term by term for the lift.
pub fn curvature_residual<T: Real>(s: &FlowBoxSolution<T>) -> Result<Vec<IdentityReport<T>>> {
    curvature_residual_with(s, T::lit(2.0) * s.base.grid.spacing)
}

/// As [`curvature_residual`] with an explicit exclusion radius (at least `2h`).
pub fn curvature_residual_with<T: Real>(s: &FlowBoxSolution<T>, exclusion: T) -> Result<Vec<IdentityReport<T>>> {
    let h = s.base.grid.spacing;
    let (sup, rms) = pde_residual(&s.base, exclusion)?;
    Ok(vec![
        IdentityReport {
            name: "curvature-xy".into(),
            sup_residual: sup,
            l2_residual: rms,
            spacing: h,
            refinement_slope: None,
        },
        IdentityReport::exact("curvature-tx", h),
        IdentityReport::exact("curvature-ty", h),
        IdentityReport::exact("dirac-beta", h),
    ])
}

/// `p Δp − |∇p|² + 2r p² (1 − p)` with `p = |α|²` and `β = 0`, which is
/// identically zero for a vortex lift; evaluated with central differences
/// at nodes `2h` away from the zeros.
pub fn albe_identity_residual<T: Real>(s: &FlowBoxSolution<T>) -> Result<IdentityReport<T>> {
    albe_identity_residual_with(s, T::lit(2.0) * s.base.grid.spacing)
}

/// As [`albe_identity_residual`] with an explicit exclusion radius (at least `2h`).
pub fn albe_identity_residual_with<T: Real>(s: &FlowBoxSolution<T>, exclusion: T) -> Result<IdentityReport<T>> {
    let f = &s.base;
    let g = &f.grid;
    if exclusion < T::lit(2.0) * g.spacing * (T::one() - T::lit(1e-12)) {
        return Err(Error::InvalidArgument(format!("exclusion radius {exclusion} below 2h")));
    }
    let p: Vec<T> = f.u.iter().map(|&u| u.exp()).collect();
    let two_r = T::lit(2.0) * f.r;
    let mut sup = T::zero();
    let mut squares = Vec::new();
    for j in 1..g.intervals {
        for i in 1..g.intervals {
            if f.zero_distance(g.node(i, j)) < exclusion {
                continue;
            }
            let pk = p[g.index(i, j)];
            let (gx, gy) = grad_p(f, i, j);
            let res = (pk * laplacian(&p, g, i, j) - (gx * gx + gy * gy) + two_r * pk * pk * (T::one() - pk)).abs();
            sup = sup.max(res);
            squares.push(res * res);
        }
    }
    let l2 = if squares.is_empty() {
        T::zero()
    } else {
        (stable_sum(squares.iter().copied()) / T::from_usize_lossy(squares.len())).sqrt()
    };
    Ok(IdentityReport {
        name: "albe".into(),
        sup_residual: sup,
        l2_residual: l2,
        spacing: g.spacing,
        refinement_slope: None,
    })
}

/// Fits `log sup_residual = p log h + c` across reports of one identity on
/// nested grids and records `p` in each. Needs at least two grids with
/// positive residuals.
pub fn with_refinement<T: Real>(mut reports: Vec<IdentityReport<T>>) -> Result<Vec<IdentityReport<T>>> {
    if reports.len() < 2 {
        return Err(Error::InsufficientSamples { found: reports.len(), needed: 2 });
    }
    if reports.iter().any(|r| !(r.sup_residual > T::zero())) {
        return Err(Error::InvalidArgument("refinement needs positive residuals".into()));
    }
    let xs: Vec<T> = reports.iter().map(|r| r.spacing.ln()).collect();
    let ys: Vec<T> = reports.iter().map(|r| r.sup_residual.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::InvalidArgument("grids share one spacing".into()))?;
    for r in &mut reports {
        r.refinement_slope = Some(fit.slope);
    }
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriBounds<T> {
    /// `r · max(|α|² − 1)`; the negative part of `1 − |α|²` is at most this over `r`.
    pub negative_part: T,
    /// `sup |∇_∥ |α|²|`, zero by `t`-independence.
    pub parallel_gradient: T,
    /// `sup |∇_⊥ |α|²| / √r`.
    pub transverse_ratio: T,
}

pub fn apriori_check<T: Real>(s: &FlowBoxSolution<T>) -> AprioriBounds<T> {
    let f = &s.base;
    let max_u = f.u.iter().copied().fold(T::neg_infinity(), T::max);
    AprioriBounds {
        negative_part: f.r * max_u.exp_m1(),
        parallel_gradient: T::zero(),
        transverse_ratio: sup_gradient_ratio(f),
    }
}

/// `η = r^{−1/2} + ρ²`.
pub fn eta<T: Real>(r: T, rho: T) -> T {
    T::one() / r.sqrt() + rho * rho
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MinimumClass {
    NearZero,
    NearOne,
    Violation,
}

impl MinimumClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MinimumClass::NearZero => "near-zero",
            MinimumClass::NearOne => "near-one",
            MinimumClass::Violation => "violation",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMinimum<T> {
    pub t: T,
    pub point: Point<T>,
    pub alpha_sq: T,
    pub class: MinimumClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxPrincipleScan<T> {
    pub rho: T,
    pub eta: T,
    pub c0: T,
    pub minima: Vec<LocalMinimum<T>>,
    pub near_zero: usize,
    pub near_one: usize,
    pub violations: usize,
}

impl<T: Real> MaxPrincipleScan<T> {
    /// CSV with columns `t,x,y,e^u,class`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,y,e^u,class")?;
        for m in &self.minima {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{}",
                m.t,
                m.point.x,
                m.point.y,
                m.alpha_sq,
                m.class.as_str()
            )?;
        }
        Ok(())
    }
}

/// Classifies every strict local minimum of `|α|²` on the transverse disks
/// `B(x, ρ) ∩ D` of the slice `t = 1/2` (all slices coincide).
pub fn max_principle_scan<T: Real>(s: &FlowBoxSolution<T>, rho: T, c0: T) -> Result<MaxPrincipleScan<T>> {
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must lie in (0, 1)")));
    }
    let f = &s.base;
    let g = &f.grid;
    let e = eta(f.r, rho);
    let t = s.t_length / T::lit(2.0);
    let in_disk = |p: Point<T>| p.norm() <= T::one();
    let reach = (rho / g.spacing).floor().to_usize().unwrap_or(0);
    let mut minima = Vec::new();
    for j in 1..g.intervals {
        for i in 1..g.intervals {
            let x = g.node(i, j);
            if !in_disk(x) {
                continue;
            }
            let v = f.at(i, j);
            // A strict minimum on the disk is one among its neighbours first.
            let neighbours = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
            if neighbours.iter().any(|&(a, b)| in_disk(g.node(a, b)) && f.at(a, b) <= v) {
                continue;
            }
            let mut strict = true;
            'ball: for b in j.saturating_sub(reach)..=(j + reach).min(g.intervals) {
                for a in i.saturating_sub(reach)..=(i + reach).min(g.intervals) {
                    if (a, b) == (i, j) {
                        continue;
                    }
                    let q = g.node(a, b);
                    if in_disk(q) && q.dist(x) <= rho && f.at(a, b) <= v {
                        strict = false;
                        break 'ball;
                    }
                }
            }
            if !strict {
                continue;
            }
            let p = v.exp();
            let class = if p <= c0 * e.sqrt() {
                MinimumClass::NearZero
            } else if -v.exp_m1() <= c0 * e {
                MinimumClass::NearOne
            } else {
                MinimumClass::Violation
            };
            minima.push(LocalMinimum { t, point: x, alpha_sq: p, class });
        }
    }
    let count = |c| minima.iter().filter(|m| m.class == c).count();
    Ok(MaxPrincipleScan {
        rho,
        eta: e,
        c0,
        near_zero: count(MinimumClass::NearZero),
        near_one: count(MinimumClass::NearOne),
        violations: count(MinimumClass::Violation),
        minima,
    })
}

/// Threshold `C · max(r^{−1/4}, E r^{−1/2})` of the near-zero set `Z_n`.
pub fn nodal_threshold<T: Real>(r: T, energy: T, c: T) -> T {
    c * r.powf(T::lit(-0.25)).max(energy / r.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalRow<T> {
    pub n: usize,
    pub r: T,
    pub n_vortices: u64,
    /// `d_H(Z^θ_n, Z_n)`; `None` when either set is empty.
    pub to_near_zero: Option<T>,
    /// `d_H(Z^θ_n, P_n)`; `None` when `Z^θ_n` is empty.
    pub to_zeros: Option<T>,
    pub empty_level: bool,
}

/// Hausdorff distances from `Z^θ_n` to the near-zero set `Z_n` and to the
/// zero set `P_n`, one row per lift. `c` scales the `Z_n` threshold.
pub fn nodal_set_diagnostics<T: Real>(seq: &[FlowBoxSolution<T>], theta: T, c: T) -> Result<Vec<NodalRow<T>>> {
    let mut rows = Vec::with_capacity(seq.len());
    for (n, s) in seq.iter().enumerate() {
        let f = &s.base;
        let z_theta = sublevel_set(f, LevelSetKind::ZTheta(theta))?.points();
        let thr = nodal_threshold(f.r, total_energy(f), c);
        let z_near = sublevel_set(f, LevelSetKind::NearZero(thr))?.points();
        let empty_level = z_theta.is_empty();
        let to_near_zero = optional(hausdorff_distance(&z_theta, &z_near))?;
        let to_zeros = optional(hausdorff_distance(&z_theta, &f.zeros.points))?;
        rows.push(NodalRow { n: n + 1, r: f.r, n_vortices: f.zeros.degree(), to_near_zero, to_zeros, empty_level });
    }
    Ok(rows)
}

/// `d_H(Z^a, Z^b)` on one field; `None` when either set is empty.
pub fn theta_distance<T: Real>(f: &VortexField<T>, a: T, b: T) -> Result<Option<T>> {
    let za = sublevel_set(f, LevelSetKind::ZTheta(a))?.points();
    let zb = sublevel_set(f, LevelSetKind::ZTheta(b))?.points();
    optional(hausdorff_distance(&za, &zb))
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptySet) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_quarter_power_radius() {
        for r in [16.0f64, 64.0, 256.0, 1e4] {
            let rho = r.powf(-0.25);
            assert!((eta(r, rho) - 2.0 / r.sqrt()).abs() <= 1e-15 * r);
        }
    }

    #[test]
    fn refinement_slope_of_exact_square_law() {
        let reports = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h: &f64| IdentityReport {
                name: "x".into(),
                sup_residual: 3.0 * h * h,
                l2_residual: 0.0,
                spacing: h,
                refinement_slope: None,
            })
            .collect();
        let out = with_refinement(reports).unwrap();
        assert!((out[0].refinement_slope.unwrap() - 2.0).abs() < 1e-12);
        assert!(with_refinement(out[..1].to_vec()).is_err());
    }
}
