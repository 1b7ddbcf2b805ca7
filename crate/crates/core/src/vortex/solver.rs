//! Damped Newton on the regular part `w` with multigrid-preconditioned CG
//! for the SPD system `(−Δ_h + 2r diag e^u) δ = F`.

use super::multigrid::Multigrid;
use super::{laplacian, singular_part, Convergence, GridSpec, VortexField, ZeroConfig};
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialGuess {
    /// `w₀ = 0` on the interior, i.e. `u₀ = s`.
    Zero,
    /// `w₀ = Σ m_j [log r − log(1 + r|z − z_j|²)]`, i.e. a product of
    /// single-vortex profiles `u₀ = Σ m_j log(rρ_j² / (1 + rρ_j²))`.
    Profile,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings<T> {
    /// Stop once `‖F‖_∞ / 2r ≤ tol`.
    pub tol: T,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub initial: InitialGuess,
    /// Core resolution: `h ≤ κ / √r`.
    pub kappa: T,
    /// Absolute cap on `h`.
    pub h_max: T,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_newton: 60,
            max_halvings: 30,
            initial: InitialGuess::Profile,
            kappa: T::lit(0.25),
            h_max: T::lit(0.02),
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }

    /// The coarsest grid these settings accept at strength `r`.
    pub fn grid_for(&self, r: T) -> Result<GridSpec<T>> {
        GridSpec::for_strength(r, self.kappa, self.h_max)
    }
}

/// Solves `Δ_h v + Δb + 2r(1 − e^{b+v}) = 0` on interior nodes with
/// `u = b + v = 0` on the boundary, where `b = Σ m_j log(1 − e^{−rρ_j²})`
/// carries the singularities and `Δb` (away from them) is evaluated in
/// closed form. `b` decays like `e^{−rρ²}`, so `v` inherits the exponential
/// decay of `u` and the far-field truncation error of `Δ_h` stays relative. Zeros closer than `h/3` to a node
/// are snapped first. The grid must satisfy the resolution rule of
/// `settings` at strength `r`.
pub fn solve_vortex<T: Real>(
    zeros: &ZeroConfig<T>,
    r: T,
    grid: &GridSpec<T>,
    settings: &SolverSettings<T>,
) -> Result<VortexField<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!("r = {r} must be > 0")));
    }
    if !(settings.tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    if grid.intervals < 2 {
        return Err(Error::UnderResolved("grid needs at least one interior node".into()));
    }
    grid.check(r, settings.kappa, settings.h_max)?;
    let zeros = zeros.snapped(grid)?;
    let len = grid.len();
    if zeros.is_empty() {
        return Ok(VortexField {
            r,
            zeros,
            grid: *grid,
            u: vec![T::zero(); len],
            w: vec![T::zero(); len],
            convergence: Convergence {
                iterations: 0,
                residual: T::zero(),
                history: vec![T::zero()],
                linear_iterations: 0,
            },
        });
    }

    let n = grid.intervals;
    let mut base = Vec::with_capacity(len);
    let mut lap_base = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    for j in 0..=n {
        for i in 0..=n {
            let z = grid.node(i, j);
            let mut b = T::zero();
            let mut lap = T::zero();
            let mut profile = T::zero();
            let mut zero_guess = T::zero();
            for (&p, &m) in zeros.points.iter().zip(&zeros.multiplicities) {
                let rd2 = r * z.dist_sq(p);
                if rd2 == T::zero() {
                    return Err(Error::SingularPoint { x: z.x.to_f64_lossy(), y: z.y.to_f64_lossy() });
                }
                let m = T::lit(m as f64);
                b = b + m * (-(-rd2).exp_m1()).ln();
                lap = lap + T::lit(4.0) * m * r * bernoulli_slope(rd2);
                profile = profile + m * (rd2.ln() - rd2.ln_1p());
                zero_guess = zero_guess + m * (rd2.ln_1p() - r.ln());
            }
            base.push(b);
            lap_base.push(lap);
            v.push(if grid.is_boundary(i, j) {
                -b
            } else {
                match settings.initial {
                    InitialGuess::Zero => zero_guess + profile - b,
                    InitialGuess::Profile => profile - b,
                }
            });
        }
    }

    let two_r = T::lit(2.0) * r;
    let mut problem = Problem { grid, base: &base, lap_base: &lap_base, two_r };
    let mut u = vec![T::zero(); len];
    let mut f = vec![T::zero(); len];
    let mut res = problem.residual(&v, &mut u, &mut f);
    let mut history = vec![res / two_r];
    let mut linear_iterations = 0;
    let mut cg = Cg::new(grid);
    let mut trial_v = vec![T::zero(); len];
    let mut trial_u = vec![T::zero(); len];
    let mut trial_f = vec![T::zero(); len];
    let mut delta = vec![T::zero(); len];
    let mut iterations = 0;

    while res / two_r > settings.tol {
        if iterations == settings.max_newton {
            return Err(Error::SolverDiverged { iterations, residual: (res / two_r).to_f64_lossy() });
        }
        iterations += 1;
        linear_iterations += cg.solve(&mut problem, &u, &f, &mut delta, settings.tol / T::lit(10.0))?;
        let mut t = T::one();
        let mut halvings = 0;
        loop {
            for k in 0..len {
                trial_v[k] = v[k] + t * delta[k];
            }
            let trial = problem.residual(&trial_v, &mut trial_u, &mut trial_f);
            if trial.is_finite() && trial <= (T::one() - T::lit(1e-4) * t) * res {
                std::mem::swap(&mut v, &mut trial_v);
                std::mem::swap(&mut u, &mut trial_u);
                std::mem::swap(&mut f, &mut trial_f);
                res = trial;
                break;
            }
            halvings += 1;
            if halvings > settings.max_halvings {
                return Err(Error::SolverDiverged { iterations, residual: (res / two_r).to_f64_lossy() });
            }
            t = t / T::lit(2.0);
        }
        history.push(res / two_r);
    }

    let mut w = Vec::with_capacity(len);
    for j in 0..=n {
        for i in 0..=n {
            w.push(u[grid.index(i, j)] - singular_part(&zeros, grid.node(i, j))?);
        }
    }
    Ok(VortexField {
        r,
        zeros,
        grid: *grid,
        u,
        w,
        convergence: Convergence { iterations, residual: res / two_r, history, linear_iterations },
    })
}

/// `d/dt [t / (e^t − 1)]`, so that `Δ log(1 − e^{−rρ²}) = 4r · (this at rρ²)`.
fn bernoulli_slope<T: Real>(t: T) -> T {
    if t < T::lit(0.1) {
        // −1/2 + t/6 − t³/180 + t⁵/5040 − t⁷/151200
        let t2 = t * t;
        let tail = T::lit(1.0 / 5040.0) - t2 / T::lit(151_200.0);
        T::lit(-0.5) + t * (T::lit(1.0 / 6.0) + t2 * (T::lit(-1.0 / 180.0) + t2 * tail))
    } else {
        let e = (-t).exp();
        let d = -(-t).exp_m1();
        (T::one() - e - t) * e / (d * d)
    }
}

struct Problem<'a, T> {
    grid: &'a GridSpec<T>,
    base: &'a [T],
    lap_base: &'a [T],
    two_r: T,
}

impl<T: Real> Problem<'_, T> {
    /// Fills `u = b + v` and `F = Δ_h v + Δb + 2r(1 − e^u)` (zero on the
    /// boundary); returns `‖F‖_∞`.
    fn residual(&self, v: &[T], u: &mut [T], f: &mut [T]) -> T {
        let n = self.grid.intervals;
        for k in 0..v.len() {
            u[k] = self.base[k] + v[k];
        }
        let mut sup = T::zero();
        for j in 0..=n {
            for i in 0..=n {
                let k = self.grid.index(i, j);
                if self.grid.is_boundary(i, j) {
                    f[k] = T::zero();
                    continue;
                }
                let res = laplacian(v, self.grid, i, j) + self.lap_base[k] - self.two_r * u[k].exp_m1();
                f[k] = res;
                sup = if res.is_nan() { T::infinity() } else { sup.max(res.abs()) };
            }
        }
        sup
    }

    /// `y = (−Δ_h + diag(shift)) x` on interior nodes, zero on the boundary.
    fn apply(&self, shift: &[T], x: &[T], y: &mut [T]) {
        let n = self.grid.intervals;
        let side = self.grid.side();
        let inv_h2 = T::one() / (self.grid.spacing * self.grid.spacing);
        let four = T::lit(4.0);
        for v in y[..side].iter_mut() {
            *v = T::zero();
        }
        for v in y[n * side..].iter_mut() {
            *v = T::zero();
        }
        for j in 1..n {
            let row = j * side;
            y[row] = T::zero();
            y[row + n] = T::zero();
            for k in row + 1..row + n {
                let nb = x[k - 1] + x[k + 1] + x[k - side] + x[k + side];
                y[k] = (four * x[k] - nb) * inv_h2 + shift[k] * x[k];
            }
        }
    }
}

struct Cg<T> {
    shift: Vec<T>,
    mg: Multigrid<T>,
    r: Vec<T>,
    z: Vec<T>,
    p: Vec<T>,
    q: Vec<T>,
}

impl<T: Real> Cg<T> {
    fn new(grid: &GridSpec<T>) -> Self {
        let zero = vec![T::zero(); grid.len()];
        Self {
            shift: zero.clone(),
            mg: Multigrid::new(grid.intervals, grid.spacing),
            r: zero.clone(),
            z: zero.clone(),
            p: zero.clone(),
            q: zero,
        }
    }

    /// Solves `(−Δ_h + 2r e^u) x = b` to relative residual `rel_tol`;
    /// returns the iteration count.
    fn solve(&mut self, pb: &mut Problem<'_, T>, u: &[T], b: &[T], x: &mut [T], rel_tol: T) -> Result<usize> {
        let g = pb.grid;
        for (k, &uk) in u.iter().enumerate() {
            self.shift[k] = pb.two_r * uk.exp();
        }
        self.mg.set_shift(&self.shift);
        for v in x.iter_mut() {
            *v = T::zero();
        }
        self.r.copy_from_slice(b);
        let b_norm = dot(b, b).sqrt();
        if b_norm == T::zero() {
            return Ok(0);
        }
        self.mg.apply(&self.r, &mut self.z);
        self.p.copy_from_slice(&self.z);
        let mut rz = dot(&self.r, &self.z);
        let max_iter = 4 * g.intervals + 500;
        for it in 1..=max_iter {
            pb.apply(&self.shift, &self.p, &mut self.q);
            let alpha = rz / dot(&self.p, &self.q);
            for k in 0..b.len() {
                x[k] = x[k] + alpha * self.p[k];
                self.r[k] = self.r[k] - alpha * self.q[k];
            }
            if dot(&self.r, &self.r).sqrt() <= rel_tol * b_norm {
                return Ok(it);
            }
            self.mg.apply(&self.r, &mut self.z);
            let rz_new = dot(&self.r, &self.z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..b.len() {
                self.p[k] = self.z[k] + beta * self.p[k];
            }
        }
        Err(Error::LinearSolver(format!("CG did not reach relative residual {rel_tol} in {max_iter} iterations")))
    }
}

#[cfg(test)]
mod tests {
    use super::bernoulli_slope;

    fn direct(t: f64) -> f64 {
        let em1 = t.exp_m1();
        (em1 - t * t.exp()) / (em1 * em1)
    }

    #[test]
    fn bernoulli_slope_matches_direct_formula() {
        assert!((bernoulli_slope(0.0f64) + 0.5).abs() < 1e-16);
        for t in [0.05, 0.0999, 0.1, 0.5, 2.0, 10.0] {
            let a = bernoulli_slope(t);
            assert!((a - direct(t)).abs() <= 1e-12 * a.abs().max(1e-3), "{t}: {a} {}", direct(t));
        }
        assert!(bernoulli_slope(800.0f64).abs() < 1e-300);
        // Finite difference of t / (e^t − 1).
        let g = |t: f64| t / t.exp_m1();
        for t in [0.3, 1.7] {
            let fd = (g(t + 1e-5) - g(t - 1e-5)) / 2e-5;
            assert!((fd - bernoulli_slope(t)).abs() < 1e-8);
        }
    }
}
