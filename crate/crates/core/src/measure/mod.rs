//! Probability measures on the closed unit disk.
//!
//! A [`DiskMeasure`] is stored in one of three representations (weighted
//! atoms, a cell-mass grid, or a named generator with closed-form ball
//! masses). Everything downstream only needs [`DiskMeasure::ball_mass`] and
//! a finite atomic discretisation ([`DiskMeasure::atoms`]).

mod dirac;
mod frostman;
pub mod spec;
mod transport;

pub use dirac::{
    dirac_approximate, dirac_approximate_with, largest_remainder, separation, DiracApproximation,
    DiracApproximationRecord,
};
pub use frostman::{auto_probes, estimate_frostman, geometric_radii, FrostmanEstimate, Probes};
pub use transport::{pool_atoms, transport_cost, w1_distance, DEFAULT_SUPPORT_CAP};

use crate::error::{Error, Result};
use crate::geometry::{disc_intersection_area, segment_disc_overlap, Point};
use crate::scalar::{stable_sum, Real};

/// Slack used when testing membership of the closed unit disk.
pub(crate) const DISK_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<T> {
    pub point: Point<T>,
    pub weight: T,
}

impl<T: Real> Atom<T> {
    pub fn new(point: Point<T>, weight: T) -> Self {
        Self { point, weight }
    }
}

/// Cell masses on a regular grid. Cell `(i, j)` (column `i`, row `j`) is the
/// square `[origin.x + i·s, origin.x + (i+1)·s] × [origin.y + j·s, …]`; its
/// mass is `mass[j * cols + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity<T> {
    pub cell_size: T,
    pub origin: Point<T>,
    pub cols: usize,
    pub rows: usize,
    pub mass: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    pub fn cell_center(&self, i: usize, j: usize) -> Point<T> {
        let half = T::lit(0.5);
        Point::new(
            self.origin.x + (T::from_usize_lossy(i) + half) * self.cell_size,
            self.origin.y + (T::from_usize_lossy(j) + half) * self.cell_size,
        )
    }

    /// Index range of cells whose centres can lie within `radius` of `center`.
    fn cell_window(&self, center: Point<T>, radius: T) -> Option<(usize, usize, usize, usize)> {
        let s = self.cell_size;
        let half = T::lit(0.5);
        let lo_x = ((center.x - radius - self.origin.x) / s - half).floor();
        let hi_x = ((center.x + radius - self.origin.x) / s - half).ceil();
        let lo_y = ((center.y - radius - self.origin.y) / s - half).floor();
        let hi_y = ((center.y + radius - self.origin.y) / s - half).ceil();
        let clamp = |v: T, n: usize| -> Option<usize> {
            let v = v.max(T::zero()).to_f64_lossy();
            if v.is_nan() {
                None
            } else {
                Some((v as usize).min(n.saturating_sub(1)))
            }
        };
        if hi_x < T::zero() || hi_y < T::zero() {
            return None;
        }
        if lo_x > T::from_usize_lossy(self.cols) || lo_y > T::from_usize_lossy(self.rows) {
            return None;
        }
        Some((clamp(lo_x, self.cols)?, clamp(hi_x, self.cols)?, clamp(lo_y, self.rows)?, clamp(hi_y, self.rows)?))
    }
}

/// Named measure families with closed-form ball masses.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator<T> {
    /// Normalised area measure of the unit disk.
    UniformDisk,
    /// Normalised length measure on the segment `[a, b]`.
    UniformSegment {
        a: Point<T>,
        b: Point<T>,
    },
    /// Self-similar Cantor measure on `[a, b]`: each stage keeps the two
    /// outer sub-intervals of relative length `ratio`, each with half the
    /// mass; mass is uniform on the `2^depth` final intervals.
    ProductCantor {
        ratio: T,
        depth: u32,
        a: Point<T>,
        b: Point<T>,
    },
    SingleAtom(Point<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation<T> {
    Atoms(Vec<Atom<T>>),
    Grid(GridDensity<T>),
    Generator(Generator<T>),
}

/// A finite measure on the closed unit disk (a probability measure after
/// [`DiskMeasure::normalized`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DiskMeasure<T> {
    repr: Representation<T>,
    total_mass: T,
}

fn check_in_disk<T: Real>(p: Point<T>) -> Result<()> {
    if !(p.norm() <= T::one() + T::lit(DISK_SLACK)) {
        return Err(Error::OutsideDisk { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
    }
    Ok(())
}

impl<T: Real> DiskMeasure<T> {
    /// Weighted atoms; weights are kept as given (use [`Self::normalized`]).
    pub fn from_atoms(atoms: Vec<Atom<T>>) -> Result<Self> {
        for a in &atoms {
            if !(a.weight >= T::zero()) || !a.weight.is_finite() {
                return Err(Error::InvalidArgument(format!("atom weight {} must be finite and >= 0", a.weight)));
            }
            if a.weight > T::zero() {
                check_in_disk(a.point)?;
            }
        }
        let total_mass = stable_sum(atoms.iter().map(|a| a.weight));
        Ok(Self { repr: Representation::Atoms(atoms), total_mass })
    }

    pub fn from_grid(grid: GridDensity<T>) -> Result<Self> {
        if grid.mass.len() != grid.rows * grid.cols {
            return Err(Error::InvalidArgument(format!(
                "grid mass has {} entries, expected {}x{}",
                grid.mass.len(),
                grid.rows,
                grid.cols
            )));
        }
        if !(grid.cell_size > T::zero()) {
            return Err(Error::InvalidArgument("grid cell_size must be > 0".into()));
        }
        for j in 0..grid.rows {
            for i in 0..grid.cols {
                let m = grid.mass[j * grid.cols + i];
                if !(m >= T::zero()) || !m.is_finite() {
                    return Err(Error::InvalidArgument(format!("grid mass {m} must be finite and >= 0")));
                }
                if m > T::zero() {
                    check_in_disk(grid.cell_center(i, j))?;
                }
            }
        }
        let total_mass = stable_sum(grid.mass.iter().copied());
        Ok(Self { repr: Representation::Grid(grid), total_mass })
    }

    pub fn from_generator(generator: Generator<T>) -> Result<Self> {
        match &generator {
            Generator::UniformDisk => {}
            Generator::UniformSegment { a, b } => {
                check_in_disk(*a)?;
                check_in_disk(*b)?;
            }
            Generator::ProductCantor { ratio, depth, a, b } => {
                check_in_disk(*a)?;
                check_in_disk(*b)?;
                if !(*ratio > T::zero() && *ratio < T::lit(0.5)) {
                    return Err(Error::InvalidArgument(format!("cantor ratio {ratio} must lie in (0, 1/2)")));
                }
                if *depth > 24 {
                    return Err(Error::InvalidArgument(format!("cantor depth {depth} exceeds 24")));
                }
            }
            Generator::SingleAtom(p) => check_in_disk(*p)?,
        }
        Ok(Self { repr: Representation::Generator(generator), total_mass: T::one() })
    }

    pub fn uniform_disk() -> Self {
        Self { repr: Representation::Generator(Generator::UniformDisk), total_mass: T::one() }
    }

    pub fn single_atom(p: Point<T>) -> Result<Self> {
        Self::from_generator(Generator::SingleAtom(p))
    }

    pub fn uniform_segment(a: Point<T>, b: Point<T>) -> Result<Self> {
        Self::from_generator(Generator::UniformSegment { a, b })
    }

    pub fn cantor(ratio: T, depth: u32, a: Point<T>, b: Point<T>) -> Result<Self> {
        Self::from_generator(Generator::ProductCantor { ratio, depth, a, b })
    }

    pub fn representation(&self) -> &Representation<T> {
        &self.repr
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    /// Rescales to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.total_mass > T::zero()) {
            return Err(Error::Unnormalized { mass: self.total_mass.to_f64_lossy() });
        }
        let k = self.total_mass;
        let repr = match &self.repr {
            Representation::Atoms(atoms) => {
                Representation::Atoms(atoms.iter().map(|a| Atom::new(a.point, a.weight / k)).collect())
            }
            Representation::Grid(g) => {
                let mut g = g.clone();
                g.mass.iter_mut().for_each(|m| *m = *m / k);
                Representation::Grid(g)
            }
            Representation::Generator(g) => Representation::Generator(g.clone()),
        };
        let mut out = Self { repr, total_mass: T::one() };
        // Recompute so that stored total reflects the actual weights.
        out.total_mass = out.mass_sum();
        Ok(out)
    }

    fn mass_sum(&self) -> T {
        match &self.repr {
            Representation::Atoms(a) => stable_sum(a.iter().map(|a| a.weight)),
            Representation::Grid(g) => stable_sum(g.mass.iter().copied()),
            Representation::Generator(_) => T::one(),
        }
    }

    /// `σ(B(center, radius))` for the closed ball.
    pub fn ball_mass(&self, center: Point<T>, radius: T) -> T {
        let r2 = radius * radius;
        match &self.repr {
            Representation::Atoms(atoms) => {
                stable_sum(atoms.iter().filter(|a| a.point.dist_sq(center) <= r2).map(|a| a.weight))
            }
            Representation::Grid(g) => {
                let Some((i0, i1, j0, j1)) = g.cell_window(center, radius) else {
                    return T::zero();
                };
                let mut total = T::zero();
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let m = g.mass[j * g.cols + i];
                        if m > T::zero() && g.cell_center(i, j).dist_sq(center) <= r2 {
                            total = total + m;
                        }
                    }
                }
                total
            }
            Representation::Generator(gen) => generator_ball_mass(gen, center, radius),
        }
    }

    /// Finite atomic discretisation. Atoms and grids are returned exactly
    /// (grid cells as atoms at their centres); generators are sampled with
    /// roughly `resolution` points per unit length (per axis for the disk).
    pub fn atoms(&self, resolution: usize) -> Vec<Atom<T>> {
        match &self.repr {
            Representation::Atoms(a) => a.iter().copied().filter(|a| a.weight > T::zero()).collect(),
            Representation::Grid(g) => {
                let mut out = Vec::new();
                for j in 0..g.rows {
                    for i in 0..g.cols {
                        let m = g.mass[j * g.cols + i];
                        if m > T::zero() {
                            out.push(Atom::new(g.cell_center(i, j), m));
                        }
                    }
                }
                out
            }
            Representation::Generator(gen) => generator_atoms(gen, resolution.max(4)),
        }
    }

    /// Points that carry mass: atoms, positive cells, or a sampling of the
    /// generator's support.
    pub fn support_points(&self, resolution: usize) -> Vec<Point<T>> {
        self.atoms(resolution).into_iter().map(|a| a.point).collect()
    }

    /// Axis-aligned box containing the support.
    pub fn support_bounds(&self) -> (Point<T>, Point<T>) {
        let one = T::one();
        match &self.repr {
            Representation::Generator(Generator::UniformDisk) => (Point::new(-one, -one), Point::new(one, one)),
            Representation::Generator(Generator::UniformSegment { a, b })
            | Representation::Generator(Generator::ProductCantor { a, b, .. }) => {
                (Point::new(a.x.min(b.x), a.y.min(b.y)), Point::new(a.x.max(b.x), a.y.max(b.y)))
            }
            Representation::Generator(Generator::SingleAtom(p)) => (*p, *p),
            _ => {
                let pts = self.support_points(0);
                let mut lo = Point::new(one, one);
                let mut hi = Point::new(-one, -one);
                for p in pts {
                    lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                if lo.x > hi.x {
                    (Point::origin(), Point::origin())
                } else {
                    (lo, hi)
                }
            }
        }
    }

    /// Push-forward under a rotation about the origin.
    pub fn rotated(&self, angle: T) -> Result<Self> {
        match &self.repr {
            Representation::Atoms(a) => {
                let mut out =
                    Self::from_atoms(a.iter().map(|a| Atom::new(a.point.rotated(angle), a.weight)).collect())?;
                out.total_mass = self.total_mass;
                Ok(out)
            }
            Representation::Generator(g) => Self::from_generator(match g {
                Generator::UniformDisk => Generator::UniformDisk,
                Generator::UniformSegment { a, b } => {
                    Generator::UniformSegment { a: a.rotated(angle), b: b.rotated(angle) }
                }
                Generator::ProductCantor { ratio, depth, a, b } => {
                    Generator::ProductCantor { ratio: *ratio, depth: *depth, a: a.rotated(angle), b: b.rotated(angle) }
                }
                Generator::SingleAtom(p) => Generator::SingleAtom(p.rotated(angle)),
            }),
            Representation::Grid(_) => Self::from_atoms(
                self.atoms(0).into_iter().map(|a| Atom::new(a.point.rotated(angle), a.weight)).collect(),
            ),
        }
    }
}

/// Final intervals of the Cantor construction on `[0, 1]`.
pub fn cantor_intervals<T: Real>(ratio: T, depth: u32) -> Vec<(T, T)> {
    let mut intervals = vec![(T::zero(), T::one())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (lo, hi) in intervals {
            let len = (hi - lo) * ratio;
            next.push((lo, lo + len));
            next.push((hi - len, hi));
        }
        intervals = next;
    }
    intervals
}

fn generator_ball_mass<T: Real>(gen: &Generator<T>, center: Point<T>, radius: T) -> T {
    match gen {
        Generator::UniformDisk => disc_intersection_area(center, radius, Point::origin(), T::one()) / T::PI(),
        Generator::UniformSegment { a, b } => match segment_disc_overlap(*a, *b, center, radius) {
            Some((t0, t1)) => t1 - t0,
            None => T::zero(),
        },
        Generator::ProductCantor { ratio, depth, a, b } => {
            let Some((t0, t1)) = segment_disc_overlap(*a, *b, center, radius) else {
                return T::zero();
            };
            cantor_interval_mass(*ratio, *depth, t0, t1)
        }
        Generator::SingleAtom(p) => {
            if p.dist_sq(center) <= radius * radius {
                T::one()
            } else {
                T::zero()
            }
        }
    }
}

/// Cantor mass of the parameter interval `[t0, t1]`, by recursion on the
/// construction (whole sub-intervals are counted without descending).
pub(crate) fn cantor_interval_mass<T: Real>(ratio: T, depth: u32, t0: T, t1: T) -> T {
    fn rec<T: Real>(ratio: T, depth: u32, lo: T, hi: T, mass: T, t0: T, t1: T) -> T {
        if t1 <= lo || t0 >= hi {
            // Closed-interval contact at a single point carries no mass.
            return T::zero();
        }
        if t0 <= lo && t1 >= hi {
            return mass;
        }
        if depth == 0 {
            let ov = t1.min(hi) - t0.max(lo);
            return mass * ov.max(T::zero()) / (hi - lo);
        }
        let len = (hi - lo) * ratio;
        let half = mass * T::lit(0.5);
        rec(ratio, depth - 1, lo, lo + len, half, t0, t1) + rec(ratio, depth - 1, hi - len, hi, half, t0, t1)
    }
    if t1 <= t0 {
        return T::zero();
    }
    rec(ratio, depth, T::zero(), T::one(), T::one(), t0, t1)
}

fn generator_atoms<T: Real>(gen: &Generator<T>, resolution: usize) -> Vec<Atom<T>> {
    match gen {
        Generator::UniformDisk => {
            let n = resolution.max(8);
            let pitch = T::lit(2.0) / T::from_usize_lossy(n);
            let half = T::lit(0.5);
            let mut pts = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let p = Point::new(
                        -T::one() + (T::from_usize_lossy(i) + half) * pitch,
                        -T::one() + (T::from_usize_lossy(j) + half) * pitch,
                    );
                    if p.norm() < T::one() {
                        pts.push(p);
                    }
                }
            }
            let w = T::one() / T::from_usize_lossy(pts.len());
            pts.into_iter().map(|p| Atom::new(p, w)).collect()
        }
        Generator::UniformSegment { a, b } => {
            let len = a.dist(*b).to_f64_lossy();
            let n = ((len * resolution as f64).ceil() as usize).max(1);
            let w = T::one() / T::from_usize_lossy(n);
            (0..n)
                .map(|k| {
                    let t = (T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(n);
                    Atom::new(*a + (*b - *a) * t, w)
                })
                .collect()
        }
        Generator::ProductCantor { ratio, depth, a, b } => {
            let intervals = cantor_intervals(*ratio, *depth);
            let len = a.dist(*b).to_f64_lossy();
            let per = ((len * resolution as f64 / intervals.len() as f64).ceil() as usize).max(1);
            let w = T::one() / T::from_usize_lossy(intervals.len() * per);
            let mut out = Vec::with_capacity(intervals.len() * per);
            for (lo, hi) in intervals {
                for k in 0..per {
                    let t = lo + (hi - lo) * (T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(per);
                    out.push(Atom::new(*a + (*b - *a) * t, w));
                }
            }
            out
        }
        Generator::SingleAtom(p) => vec![Atom::new(*p, T::one())],
    }
}
