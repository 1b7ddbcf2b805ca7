//! Rotationally symmetric oracle: `u'' + u'/ρ = 2r(e^u − 1)` on
//! `(0, ρ_max)` with `u ~ 2m log ρ` at the origin and `u(ρ_max) = 0`.
//!
//! Cell-centred finite volumes for `w = u − 2m log(ρ/(1+ρ))`, which obeys
//! `(ρw')' = 2rρ(e^u − 1) + 2m/(1+ρ)²` with zero flux at `ρ = 0`.

use crate::error::{Error, Result};
use crate::scalar::{stable_sum, Real};

const CELLS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile<T> {
    pub m: u64,
    pub r: T,
    pub rho_max: T,
    /// Cell centres.
    pub rho: Vec<T>,
    pub u: Vec<T>,
    w: Vec<T>,
    w_outer: T,
}

fn log_weight<T: Real>(m: T, rho: T) -> T {
    T::lit(2.0) * m * (rho.ln() - rho.ln_1p())
}

impl<T: Real> RadialProfile<T> {
    /// `u(ρ)`, linear in the regular part between cell centres; `0` past `ρ_max`.
    pub fn u_at(&self, rho: T) -> T {
        if rho >= self.rho_max {
            return T::zero();
        }
        let m = T::lit(self.m as f64);
        let delta = self.rho_max / T::from_usize_lossy(self.rho.len());
        let last = self.rho.len() - 1;
        let w = if rho <= self.rho[0] {
            self.w[0]
        } else if rho >= self.rho[last] {
            let t = (rho - self.rho[last]) / (self.rho_max - self.rho[last]);
            self.w[last] + t * (self.w_outer - self.w[last])
        } else {
            let f = rho / delta - T::lit(0.5);
            let i = f.floor().to_usize().unwrap_or(0).min(last - 1);
            let t = f - T::from_usize_lossy(i);
            self.w[i] + t * (self.w[i + 1] - self.w[i])
        };
        w + log_weight(m, rho)
    }

    /// `2πr ∫_0^{ρ_max} (1 − e^u) ρ dρ` by the midpoint rule.
    pub fn energy(&self) -> T {
        let delta = self.rho_max / T::from_usize_lossy(self.rho.len());
        let sum = stable_sum(self.rho.iter().zip(&self.u).map(|(&p, &u)| -u.exp_m1() * p));
        T::lit(2.0) * T::PI() * self.r * sum * delta
    }
}

/// Solves the radial problem by Newton iteration with a tridiagonal solve.
pub fn solve_radial<T: Real>(m: u64, r: T, rho_max: T) -> Result<RadialProfile<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("multiplicity must be >= 1".into()));
    }
    if !(r > T::zero()) || !(rho_max * r.sqrt() >= T::lit(20.0) * (T::one() - T::lit(1e-12))) {
        return Err(Error::InvalidArgument(format!(
            "need r > 0 and rho_max * sqrt(r) >= 20 (r = {r}, rho_max = {rho_max})"
        )));
    }
    let mm = T::lit(m as f64);
    let two = T::lit(2.0);
    let two_r = two * r;
    let n = CELLS;
    let delta = rho_max / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let rho: Vec<T> = (0..n).map(|i| (T::from_usize_lossy(i) + half) * delta).collect();
    let face = |i: usize| T::from_usize_lossy(i) * delta;
    let q: Vec<T> = rho.iter().map(|&p| log_weight(mm, p)).collect();
    let w_outer = -log_weight(mm, rho_max);
    // Exact cell integral of 2m/(1+ρ)².
    let source: Vec<T> =
        (0..n).map(|i| two * mm * (T::one() / (T::one() + face(i)) - T::one() / (T::one() + face(i + 1)))).collect();
    let mut w: Vec<T> =
        rho.iter().zip(&q).map(|(&p, &qi)| mm * (r.ln() + two * p.ln() - (r * p * p).ln_1p()) - qi).collect();

    let residual = |w: &[T], g: &mut [T]| -> T {
        let mut sup = T::zero();
        for i in 0..n {
            let flux_out = if i + 1 < n {
                face(i + 1) * (w[i + 1] - w[i]) / delta
            } else {
                rho_max * (w_outer - w[i]) / (half * delta)
            };
            let flux_in = if i == 0 { T::zero() } else { face(i) * (w[i] - w[i - 1]) / delta };
            let u = w[i] + q[i];
            let v = flux_out - flux_in - delta * rho[i] * two_r * u.exp_m1() - source[i];
            g[i] = v;
            sup = if v.is_nan() { T::infinity() } else { sup.max(v.abs()) };
        }
        sup
    };

    let mut g = vec![T::zero(); n];
    let mut res = residual(&w, &mut g);
    let step_tol = T::lit(1e4) * T::epsilon();
    let mut lower = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut upper = vec![T::zero(); n];
    let mut delta_w = vec![T::zero(); n];
    let mut trial = vec![T::zero(); n];
    let mut trial_g = vec![T::zero(); n];
    let mut converged = false;
    for _ in 0..200 {
        for i in 0..n {
            let a_out = if i + 1 < n { face(i + 1) / delta } else { rho_max / (half * delta) };
            let a_in = if i == 0 { T::zero() } else { face(i) / delta };
            lower[i] = a_in;
            upper[i] = if i + 1 < n { a_out } else { T::zero() };
            diag[i] = -a_out - a_in - delta * rho[i] * two_r * (w[i] + q[i]).exp();
        }
        for i in 0..n {
            delta_w[i] = -g[i];
        }
        thomas(&lower, &mut diag, &upper, &mut delta_w);
        let step = delta_w.iter().fold(T::zero(), |a, &d| a.max(d.abs()));
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = w[i] + t * delta_w[i];
            }
            let tr = residual(&trial, &mut trial_g);
            if tr.is_finite() && tr <= (T::one() - T::lit(1e-4) * t) * res {
                std::mem::swap(&mut w, &mut trial);
                std::mem::swap(&mut g, &mut trial_g);
                res = tr;
                accepted = true;
                break;
            }
            t = t / two;
        }
        // Flux terms are of size ρ_max |w| / Δ; residuals at that scale
        // times machine precision cannot be reduced further.
        let w_max = w.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        let res_tol = T::lit(1e3) * T::epsilon() * rho_max / delta * (T::one() + w_max);
        if !accepted || step <= step_tol || res <= res_tol {
            converged = step <= step_tol || res <= res_tol;
            break;
        }
    }
    if !converged {
        return Err(Error::RadialDiverged(format!("Newton stalled with residual {res:e}")));
    }
    let u: Vec<T> = w.iter().zip(&q).map(|(&wi, &qi)| wi + qi).collect();
    // Newton leaves round-off of order 1e-12 in the flat tail.
    let slack = T::lit(1e-10).max(T::lit(1e3) * T::epsilon());
    if u.iter().any(|&v| v > slack) || u.windows(2).any(|p| p[1] < p[0] - slack) {
        return Err(Error::RadialDiverged("profile is not negative and increasing".into()));
    }
    Ok(RadialProfile { m, r, rho_max, rho, u, w, w_outer })
}

/// Thomas algorithm; `sub[i]` couples to `i − 1`, `sup[i]` to `i + 1`.
/// Overwrites `diag` and leaves the solution in `rhs`.
fn thomas<T: Real>(sub: &[T], diag: &mut [T], sup: &[T], rhs: &mut [T]) {
    let n = diag.len();
    for i in 1..n {
        let f = sub[i] / diag[i - 1];
        diag[i] = diag[i] - f * sup[i - 1];
        rhs[i] = rhs[i] - f * rhs[i - 1];
    }
    rhs[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}
