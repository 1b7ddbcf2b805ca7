//! Rescaled vortex solutions through the scalar reduction
//! `Δu + 2r(1 − e^u) = 4π Σ m_j δ(z − z_j)`, `u = log|φ|²`.
//!
//! The logarithmic singularities `s(z) = Σ 2m_j log|z − z_j|` are carried
//! analytically and `w = u − s` is the regular part.

mod dump;
mod multigrid;
mod radial;
mod solver;

pub use dump::{read_field, read_field_file, write_field, write_field_file};
pub use radial::{solve_radial, RadialProfile};
pub use solver::{solve_vortex, InitialGuess, SolverSettings};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::separation;
use crate::scalar::{stable_sum, Real};

pub const INTERVAL_QUANTUM: usize = 64;

/// Square node grid `[offset − R, offset + R]²` with `n + 1` nodes per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub half_width: T,
    pub spacing: T,
    pub intervals: usize,
    pub offset: Point<T>,
}

/// Smallest admissible half-width for strength `r`.
pub fn min_half_width<T: Real>(r: T) -> T {
    T::one() + T::lit(0.5).max(T::lit(10.0) / r.sqrt())
}

/// Largest admissible spacing for strength `r`.
pub fn max_spacing<T: Real>(r: T, kappa: T, h_max: T) -> T {
    h_max.min(kappa / r.sqrt())
}

impl<T: Real> GridSpec<T> {
    /// Grid with spacing exactly `spacing` and the smallest half-width
    /// `≥ half_width` that is a multiple of `spacing / 2`.
    pub fn new(half_width: T, spacing: T, offset: Point<T>) -> Result<Self> {
        if !(spacing > T::zero() && half_width > spacing) {
            return Err(Error::InvalidArgument(format!("grid needs 0 < h < R (h = {spacing}, R = {half_width})")));
        }
        let ratio = (T::lit(2.0) * half_width / spacing).to_f64_lossy();
        let nearest = ratio.round();
        let intervals = if (ratio - nearest).abs() <= 1e-9 * ratio { nearest } else { ratio.ceil() } as usize;
        let half_width = T::from_usize_lossy(intervals) * spacing / T::lit(2.0);
        Ok(Self { half_width, spacing, intervals, offset })
    }

    /// The coarsest compliant grid for strength `r`, with the interval
    /// count rounded up to a multiple of [`INTERVAL_QUANTUM`] so that the
    /// multigrid hierarchy is deep.
    pub fn for_strength(r: T, kappa: T, h_max: T) -> Result<Self> {
        let h = max_spacing(r, kappa, h_max);
        let g = Self::new(min_half_width(r), h, Point::origin())?;
        let n = g.intervals.div_ceil(INTERVAL_QUANTUM) * INTERVAL_QUANTUM;
        Self::new(T::from_usize_lossy(n) * h / T::lit(2.0), h, Point::origin())
    }

    /// Same extent, spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            half_width: self.half_width,
            spacing: self.spacing / T::from_usize_lossy(factor),
            intervals: self.intervals * factor,
            offset: self.offset,
        }
    }

    pub fn shifted(&self, by: Point<T>) -> Self {
        Self { offset: self.offset + by, ..*self }
    }

    /// Fails with `UnderResolved` unless `h ≤ min(h_max, κ/√r)` and
    /// `R ≥ 1 + max(0.5, 10/√r)`.
    pub fn check(&self, r: T, kappa: T, h_max: T) -> Result<()> {
        let slack = T::one() + T::lit(1e-9);
        let h_lim = max_spacing(r, kappa, h_max);
        if self.spacing > h_lim * slack {
            return Err(Error::UnderResolved(format!("h = {} exceeds {} at r = {}", self.spacing, h_lim, r)));
        }
        let r_lim = min_half_width(r);
        if self.half_width * slack < r_lim {
            return Err(Error::UnderResolved(format!("R = {} below {} at r = {}", self.half_width, r_lim, r)));
        }
        Ok(())
    }

    pub fn side(&self) -> usize {
        self.intervals + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> (T, T) {
        let t = T::from_usize_lossy(i) * self.spacing - self.half_width;
        (self.offset.x + t, self.offset.y + t)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Point<T> {
        let ti = T::from_usize_lossy(i) * self.spacing - self.half_width;
        let tj = T::from_usize_lossy(j) * self.spacing - self.half_width;
        Point::new(self.offset.x + ti, self.offset.y + tj)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.intervals || j == self.intervals
    }

    /// Fractional node coordinates of `p`.
    pub fn locate(&self, p: Point<T>) -> (T, T) {
        let lo = Point::new(self.offset.x - self.half_width, self.offset.y - self.half_width);
        ((p.x - lo.x) / self.spacing, (p.y - lo.y) / self.spacing)
    }

    /// Nearest node (clamped to the grid).
    pub fn nearest(&self, p: Point<T>) -> (usize, usize) {
        let (fx, fy) = self.locate(p);
        let clamp = |v: T| v.round().max(T::zero()).min(T::from_usize_lossy(self.intervals)).to_usize().unwrap_or(0);
        (clamp(fx), clamp(fy))
    }
}

/// Zero set with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroConfig<T> {
    pub points: Vec<Point<T>>,
    pub multiplicities: Vec<u64>,
}

impl<T: Real> ZeroConfig<T> {
    pub fn new(points: Vec<Point<T>>, multiplicities: Vec<u64>) -> Result<Self> {
        if points.len() != multiplicities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} zeros but {} multiplicities",
                points.len(),
                multiplicities.len()
            )));
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidArgument("multiplicities must be >= 1".into()));
        }
        if !points.is_empty() {
            separation(&points)?;
        }
        Ok(Self { points, multiplicities })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new(), multiplicities: Vec::new() }
    }

    pub fn single(p: Point<T>, m: u64) -> Result<Self> {
        Self::new(vec![p], vec![m])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total multiplicity `N`.
    pub fn degree(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// `ε` of the configuration (half the minimal pairwise/boundary gap).
    pub fn epsilon(&self) -> Result<T> {
        separation(&self.points)
    }

    /// Moves any zero closer than `h/3` to a node onto `node ± h/3` in each
    /// coordinate, away from the node (or away from the origin for an exact
    /// hit), so that snapping commutes with reflections.
    pub fn snapped(&self, grid: &GridSpec<T>) -> Result<Self> {
        let third = grid.spacing / T::lit(3.0);
        let away = |d: T, coord: T| {
            let reference = if d.abs() > T::lit(1e-9) * grid.spacing { d } else { coord };
            if reference < T::zero() {
                -third
            } else {
                third
            }
        };
        let points = self
            .points
            .iter()
            .map(|&p| {
                let (i, j) = grid.nearest(p);
                let node = grid.node(i, j);
                if p.dist(node) < third {
                    Point::new(node.x + away(p.x - node.x, p.x), node.y + away(p.y - node.y, p.y))
                } else {
                    p
                }
            })
            .collect();
        Self::new(points, self.multiplicities.clone())
    }

    pub fn translated(&self, by: Point<T>) -> Self {
        Self { points: self.points.iter().map(|&p| p + by).collect(), multiplicities: self.multiplicities.clone() }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { points: self.points.iter().map(|&p| p * factor).collect(), multiplicities: self.multiplicities.clone() }
    }

    pub fn reflected_x(&self) -> Self {
        Self {
            points: self.points.iter().map(|&p| Point::new(p.x, -p.y)).collect(),
            multiplicities: self.multiplicities.clone(),
        }
    }
}

/// `s(z) = Σ_j 2 m_j log|z − z_j|`.
pub fn singular_part<T: Real>(zeros: &ZeroConfig<T>, z: Point<T>) -> Result<T> {
    let mut s = T::zero();
    for (&p, &m) in zeros.points.iter().zip(&zeros.multiplicities) {
        let d2 = z.dist_sq(p);
        if d2 == T::zero() {
            return Err(Error::SingularPoint { x: z.x.to_f64_lossy(), y: z.y.to_f64_lossy() });
        }
        s = s + T::lit(m as f64) * d2.ln();
    }
    Ok(s)
}

/// Newton history of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergence<T> {
    pub iterations: usize,
    /// Final `‖F‖_∞ / 2r`.
    pub residual: T,
    /// `‖F‖_∞ / 2r` after the initial guess and after each accepted step.
    pub history: Vec<T>,
    pub linear_iterations: usize,
}

/// A solved field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VortexField<T> {
    pub r: T,
    pub zeros: ZeroConfig<T>,
    pub grid: GridSpec<T>,
    /// `u = s + w`, row-major.
    pub u: Vec<T>,
    /// Regular part `w`, row-major.
    pub w: Vec<T>,
    pub convergence: Convergence<T>,
}

impl<T: Real> VortexField<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.u[self.grid.index(i, j)]
    }

    /// `u(z)` from bilinear interpolation of `w` plus the exact singular part;
    /// `0` outside the computational square.
    pub fn u_at(&self, z: Point<T>) -> Result<T> {
        let (fx, fy) = self.grid.locate(z);
        let n = T::from_usize_lossy(self.grid.intervals);
        if fx < T::zero() || fy < T::zero() || fx > n || fy > n {
            return Ok(T::zero());
        }
        let last = self.grid.intervals - 1;
        let i = fx.floor().to_usize().unwrap_or(0).min(last);
        let j = fy.floor().to_usize().unwrap_or(0).min(last);
        let tx = fx - T::from_usize_lossy(i);
        let ty = fy - T::from_usize_lossy(j);
        let g = &self.grid;
        let w00 = self.w[g.index(i, j)];
        let w10 = self.w[g.index(i + 1, j)];
        let w01 = self.w[g.index(i, j + 1)];
        let w11 = self.w[g.index(i + 1, j + 1)];
        let one = T::one();
        let w = (one - tx) * (one - ty) * w00 + tx * (one - ty) * w10 + (one - tx) * ty * w01 + tx * ty * w11;
        Ok(w + singular_part(&self.zeros, z)?)
    }

    /// Iterates `(i, j, node)` over all nodes in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, Point<T>)> + '_ {
        let side = self.grid.side();
        (0..side).flat_map(move |j| (0..side).map(move |i| (i, j, self.grid.node(i, j))))
    }

    /// Distance from `z` to the nearest zero (infinite without zeros).
    pub fn zero_distance(&self, z: Point<T>) -> T {
        self.zeros.points.iter().map(|&p| z.dist(p)).fold(T::infinity(), T::min)
    }
}

/// `E = r Σ (1 − e^u) h²` over the whole grid.
pub fn total_energy<T: Real>(f: &VortexField<T>) -> T {
    let h2 = f.grid.spacing * f.grid.spacing;
    f.r * h2 * stable_sum(f.u.iter().map(|&u| -u.exp_m1()))
}

/// Five-point Laplacian of a row-major array at an interior node.
#[inline]
pub(crate) fn laplacian<T: Real>(v: &[T], grid: &GridSpec<T>, i: usize, j: usize) -> T {
    let k = grid.index(i, j);
    let side = grid.side();
    (v[k - 1] + v[k + 1] + v[k - side] + v[k + side] - T::lit(4.0) * v[k]) / (grid.spacing * grid.spacing)
}

/// `(sup, rms)` of `|Δ_h u + 2r(1 − e^u)|` over interior nodes at distance
/// at least `exclusion_radius` from every zero.
pub fn pde_residual<T: Real>(f: &VortexField<T>, exclusion_radius: T) -> Result<(T, T)> {
    if exclusion_radius < T::lit(2.0) * f.grid.spacing * (T::one() - T::lit(1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "exclusion radius {exclusion_radius} below 2h = {}",
            T::lit(2.0) * f.grid.spacing
        )));
    }
    let two_r = T::lit(2.0) * f.r;
    let mut sup = T::zero();
    let mut squares = Vec::new();
    for j in 1..f.grid.intervals {
        for i in 1..f.grid.intervals {
            if f.zero_distance(f.grid.node(i, j)) < exclusion_radius {
                continue;
            }
            let u = f.at(i, j);
            let res = (laplacian(&f.u, &f.grid, i, j) - two_r * u.exp_m1()).abs();
            sup = sup.max(res);
            squares.push(res * res);
        }
    }
    let rms = if squares.is_empty() {
        T::zero()
    } else {
        (stable_sum(squares.iter().copied()) / T::from_usize_lossy(squares.len())).sqrt()
    };
    Ok((sup, rms))
}

/// Central-difference gradient of `e^u` at an interior node.
pub(crate) fn grad_p<T: Real>(f: &VortexField<T>, i: usize, j: usize) -> (T, T) {
    let two_h = T::lit(2.0) * f.grid.spacing;
    let gx = (f.at(i + 1, j).exp() - f.at(i - 1, j).exp()) / two_h;
    let gy = (f.at(i, j + 1).exp() - f.at(i, j - 1).exp()) / two_h;
    (gx, gy)
}

/// `max |∇_h e^u| / √r` over interior nodes.
pub fn sup_gradient_ratio<T: Real>(f: &VortexField<T>) -> T {
    let mut sup = T::zero();
    for j in 1..f.grid.intervals {
        for i in 1..f.grid.intervals {
            let (gx, gy) = grad_p(f, i, j);
            sup = sup.max(gx.hypot(gy));
        }
    }
    sup / f.r.sqrt()
}

/// Samples of `h_j = e^u r^{−m_j} |z − z_j|^{−2m_j}` near one zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactor<T> {
    pub samples: Vec<(Point<T>, T)>,
    /// `∫_{B(z_j, ρ)} log h_j` by the midpoint rule.
    pub log_integral: T,
}

/// Local factorisation `|φ|² = r^{m_j} h_j(z) |z − z_j|^{2m_j}` around zero `j`.
///
/// `log h_j` is evaluated through the regular part, so the integrand is
/// smooth on the whole ball.
pub fn local_factor_h<T: Real>(f: &VortexField<T>, j: usize, ball_radius: T) -> Result<LocalFactor<T>> {
    let zj = *f.zeros.points.get(j).ok_or_else(|| Error::InvalidArgument(format!("zero index {j} out of range")))?;
    if ball_radius < T::lit(3.0) * f.grid.spacing * (T::one() - T::lit(1e-12)) {
        return Err(Error::InvalidArgument(format!("ball radius {ball_radius} below 3h")));
    }
    if f.zeros.points.iter().enumerate().any(|(k, &p)| k != j && p.dist(zj) <= ball_radius) {
        return Err(Error::BallOverlap { index: j });
    }
    let mj = T::lit(f.zeros.multiplicities[j] as f64);
    let shift = mj * f.r.ln();
    let h2 = f.grid.spacing * f.grid.spacing;
    let (ci, cj) = f.grid.nearest(zj);
    let reach = (ball_radius / f.grid.spacing).ceil().to_usize().unwrap_or(0) + 1;
    let mut samples = Vec::new();
    let mut logs = Vec::new();
    for jj in cj.saturating_sub(reach)..=(cj + reach).min(f.grid.intervals) {
        for ii in ci.saturating_sub(reach)..=(ci + reach).min(f.grid.intervals) {
            let z = f.grid.node(ii, jj);
            if z.dist(zj) > ball_radius {
                continue;
            }
            let mut log_h = f.w[f.grid.index(ii, jj)] - shift;
            for (k, (&p, &m)) in f.zeros.points.iter().zip(&f.zeros.multiplicities).enumerate() {
                if k != j {
                    log_h = log_h + T::lit(m as f64) * z.dist_sq(p).ln();
                }
            }
            samples.push((z, log_h.exp()));
            logs.push(log_h);
        }
    }
    Ok(LocalFactor { samples, log_integral: h2 * stable_sum(logs) })
}
