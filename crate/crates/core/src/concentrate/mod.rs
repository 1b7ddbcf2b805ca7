//! Concentration measures `σ = r(1 − e^u) dx dy / E`, sublevel sets of `|φ|²`
//! and the localisation, decay and convergence diagnostics built on them.

mod edt;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::{w1_distance, DiracApproximation, DiskMeasure, GridDensity, DISK_SLACK};
use crate::scalar::{stable_sum, LineFitter, Real};
use crate::schedule::ScheduleParams;
use crate::vortex::{local_factor_h, total_energy, GridSpec, VortexField};

pub(crate) use edt::squared_distance;

/// Node masses `r(1 − e^u)h² / E`, row-major.
fn node_masses<T: Real>(f: &VortexField<T>) -> Result<Vec<T>> {
    let e = total_energy(f);
    if f.zeros.is_empty() || !(e > T::zero()) {
        return Err(Error::ZeroEnergy);
    }
    let scale = f.r * f.grid.spacing * f.grid.spacing / e;
    Ok(f.u.iter().map(|&u| -u.exp_m1() * scale).collect())
}

fn in_unit_disk<T: Real>(p: Point<T>) -> bool {
    p.norm() <= T::one() + T::lit(DISK_SLACK)
}

/// `σ` restricted to the closed unit disk, as a grid measure with one cell
/// per node. Its total mass is `σ(D) ≤ 1`.
pub fn sigma_measure<T: Real>(f: &VortexField<T>) -> Result<DiskMeasure<T>> {
    let masses = node_masses(f)?;
    let g = &f.grid;
    let (lo, _) = g.nearest(Point::new(-T::one(), -T::one()));
    let (hi, _) = g.nearest(Point::new(T::one(), T::one()));
    let lo = lo.saturating_sub(1);
    let hi = (hi + 1).min(g.intervals);
    let cols = hi - lo + 1;
    let mut mass = vec![T::zero(); cols * cols];
    for j in lo..=hi {
        for i in lo..=hi {
            if in_unit_disk(g.node(i, j)) {
                mass[(j - lo) * cols + (i - lo)] = masses[g.index(i, j)];
            }
        }
    }
    let half = g.spacing / T::lit(2.0);
    let corner = g.node(lo, lo);
    DiskMeasure::from_grid(GridDensity {
        cell_size: g.spacing,
        origin: Point::new(corner.x - half, corner.y - half),
        cols,
        rows: cols,
        mass,
    })
}

/// `(σ(D), σ(ℂ ∖ D))`; the two add up to 1 up to rounding.
pub fn sigma_split<T: Real>(f: &VortexField<T>) -> Result<(T, T)> {
    let masses = node_masses(f)?;
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (k, (_, _, p)) in f.nodes().enumerate() {
        if in_unit_disk(p) {
            inside.push(masses[k]);
        } else {
            outside.push(masses[k]);
        }
    }
    Ok((stable_sum(inside), stable_sum(outside)))
}

/// Which sublevel set of `|φ|² = e^u` to extract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelSetKind<T> {
    /// `Z^θ = {1 − e^u ≥ θ}`.
    ZTheta(T),
    /// `Ω⁻ = {e^u ≤ 1/2}`.
    OmegaMinus,
    /// `{e^u ≤ threshold}`.
    NearZero(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component<T> {
    /// Node indices, ascending.
    pub nodes: Vec<usize>,
    /// Indices of zeros whose nearest node lies in the component.
    pub zeros: Vec<usize>,
    /// Maximal distance between two nodes of the component.
    pub diameter: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubLevelSet<T> {
    pub kind: LevelSetKind<T>,
    pub grid: GridSpec<T>,
    /// Node indices, ascending.
    pub cells: Vec<usize>,
    /// 4-connected components, ordered by their smallest node.
    pub components: Vec<Component<T>>,
}

impl<T: Real> SubLevelSet<T> {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.cells.binary_search(&node).is_ok()
    }

    pub fn points(&self) -> Vec<Point<T>> {
        let side = self.grid.side();
        self.cells.iter().map(|&k| self.grid.node(k % side, k / side)).collect()
    }
}

/// Thresholds `e^u`, splits the result into 4-connected components and
/// attaches zeros and diameters.
pub fn sublevel_set<T: Real>(f: &VortexField<T>, kind: LevelSetKind<T>) -> Result<SubLevelSet<T>> {
    let member: Vec<bool> = match kind {
        LevelSetKind::ZTheta(theta) => {
            if !(theta > T::zero() && theta < T::one()) {
                return Err(Error::InvalidArgument(format!("theta = {theta} must lie in (0, 1)")));
            }
            f.u.iter().map(|&u| -u.exp_m1() >= theta).collect()
        }
        LevelSetKind::OmegaMinus => f.u.iter().map(|&u| u.exp() <= T::lit(0.5)).collect(),
        LevelSetKind::NearZero(t) => f.u.iter().map(|&u| u.exp() <= t).collect(),
    };
    let g = &f.grid;
    let side = g.side();
    let cells: Vec<usize> = (0..member.len()).filter(|&k| member[k]).collect();
    let mut label = vec![usize::MAX; member.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for &start in &cells {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        label[start] = id;
        queue.push_back(start);
        let mut nodes = Vec::new();
        while let Some(k) = queue.pop_front() {
            nodes.push(k);
            let (i, j) = (k % side, k / side);
            let mut visit = |n: usize| {
                if member[n] && label[n] == usize::MAX {
                    label[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < side {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - side);
            }
            if j + 1 < side {
                visit(k + side);
            }
        }
        nodes.sort_unstable();
        let diameter = component_diameter(g, &nodes, &member);
        components.push(Component { nodes, zeros: Vec::new(), diameter });
    }
    for (z, &p) in f.zeros.points.iter().enumerate() {
        let (i, j) = g.nearest(p);
        let id = label[g.index(i, j)];
        if id != usize::MAX {
            components[id].zeros.push(z);
        }
    }
    Ok(SubLevelSet { kind, grid: *g, cells, components })
}

/// Diameter from the convex hull of the component's boundary nodes.
fn component_diameter<T: Real>(g: &GridSpec<T>, nodes: &[usize], member: &[bool]) -> T {
    let side = g.side();
    let mut pts: Vec<(i64, i64)> = nodes
        .iter()
        .filter(|&&k| {
            let (i, j) = (k % side, k / side);
            i == 0
                || j == 0
                || i + 1 == side
                || j + 1 == side
                || !member[k - 1]
                || !member[k + 1]
                || !member[k - side]
                || !member[k + side]
        })
        .map(|&k| ((k % side) as i64, (k / side) as i64))
        .collect();
    let hull = convex_hull(&mut pts);
    let mut best = 0i64;
    for (a, &p) in hull.iter().enumerate() {
        for &q in &hull[a + 1..] {
            best = best.max((p.0 - q.0).pow(2) + (p.1 - q.1).pow(2));
        }
    }
    T::lit((best as f64).sqrt()) * g.spacing
}

/// Andrew's monotone chain on integer points.
fn convex_hull(pts: &mut Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts.clone();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// `max(sup_{x∈a} d(x, b), sup_{y∈b} d(y, a))`, exact.
pub fn hausdorff_distance<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> T {
    let mut worst = T::zero();
    for &x in a {
        let mut nearest = T::infinity();
        for &y in b {
            let d = x.dist_sq(y);
            if d < nearest {
                nearest = d;
                // x cannot raise the running maximum any more.
                if nearest <= worst {
                    break;
                }
            }
        }
        worst = worst.max(nearest);
    }
    worst.sqrt()
}

/// Localisation of `Ω⁻` around one zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroRadius<T> {
    pub zero: usize,
    /// Radius of the smallest disk about the zero containing its `Ω⁻`
    /// component (0 if the zero's nearest node is not in `Ω⁻`).
    pub radius: T,
    /// `radius · √r / N`.
    pub ratio: T,
}

/// For each zero, `radius(Ω⁻ component about z_j) · √r / N`.
pub fn component_radius_check<T: Real>(f: &VortexField<T>) -> Result<Vec<ZeroRadius<T>>> {
    if f.zeros.is_empty() {
        return Ok(Vec::new());
    }
    let set = sublevel_set(f, LevelSetKind::OmegaMinus)?;
    let side = f.grid.side();
    if let Some(orphan) = set.components.iter().find(|c| c.zeros.is_empty()) {
        let k = orphan.nodes[0];
        let p = f.grid.node(k % side, k / side);
        return Err(Error::OrphanComponent { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
    }
    let scale = f.r.sqrt() / T::lit(f.zeros.degree() as f64);
    let mut out: Vec<ZeroRadius<T>> =
        (0..f.zeros.len()).map(|zero| ZeroRadius { zero, radius: T::zero(), ratio: T::zero() }).collect();
    for c in &set.components {
        for &z in &c.zeros {
            let zp = f.zeros.points[z];
            let radius = c.nodes.iter().map(|&k| f.grid.node(k % side, k / side).dist(zp)).fold(T::zero(), T::max);
            out[z] = ZeroRadius { zero: z, radius, ratio: radius * scale };
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<T> {
    /// `−slope`, the fitted rate in `1 − e^u ≈ A e^{−c √r dist(z, Ω⁻)}`.
    pub c_hat: T,
    pub slope: T,
    pub intercept: T,
    pub r2: T,
    pub samples: usize,
}

const MIN_DECAY_SAMPLES: usize = 30;

/// Least-squares fit of `log(1 − e^u)` against `√r · dist(z, Ω⁻)` over nodes
/// with `dist ≥ 2/√r`, `1 − e^u > 1e-12`, and at least `2/√r` away from the
/// Dirichlet boundary of the computational square.
pub fn decay_fit<T: Real>(f: &VortexField<T>) -> Result<DecayFit<T>> {
    decay_fit_with_samples(f, |_, _| ())
}

/// As [`decay_fit`], also reporting every `(√r·dist, log(1 − e^u))` sample.
pub fn decay_fit_with_samples<T: Real>(f: &VortexField<T>, mut sample: impl FnMut(f64, f64)) -> Result<DecayFit<T>> {
    let g = &f.grid;
    let side = g.side();
    let mask: Vec<bool> = f.u.iter().map(|&u| u.exp() <= T::lit(0.5)).collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptySet);
    }
    let d2 = squared_distance(&mask, side);
    let h = g.spacing.to_f64_lossy();
    let sr = f.r.sqrt().to_f64_lossy();
    let collar = 2.0 / sr;
    let mut fit = LineFitter::new();
    for j in 0..side {
        for i in 0..side {
            let edge = i.min(j).min(g.intervals - i).min(g.intervals - j) as f64 * h;
            if edge < collar {
                continue;
            }
            let k = j * side + i;
            let dist = d2[k].sqrt() * h;
            let tail = -f.u[k].exp_m1().to_f64_lossy();
            if dist >= collar && tail > 1e-12 {
                let (x, y) = (sr * dist, tail.ln());
                fit.push(x, y);
                sample(x, y);
            }
        }
    }
    if fit.len() < MIN_DECAY_SAMPLES {
        return Err(Error::InsufficientSamples { found: fit.len(), needed: MIN_DECAY_SAMPLES });
    }
    let line = fit.finish::<T>().ok_or(Error::InsufficientSamples { found: fit.len(), needed: MIN_DECAY_SAMPLES })?;
    Ok(DecayFit {
        c_hat: -line.slope,
        slope: line.slope,
        intercept: line.intercept,
        r2: line.r2,
        samples: line.samples,
    })
}

/// A test region for vanishing-mass checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region<T> {
    Disk { center: Point<T>, radius: T },
    Annulus { center: Point<T>, inner: T, outer: T },
}

impl<T: Real> Region<T> {
    pub fn contains(&self, p: Point<T>) -> bool {
        match *self {
            Region::Disk { center, radius } => p.dist(center) <= radius,
            Region::Annulus { center, inner, outer } => {
                let d = p.dist(center);
                d >= inner && d <= outer
            }
        }
    }

    /// Distance from `p` to the region (0 inside).
    pub fn distance(&self, p: Point<T>) -> T {
        match *self {
            Region::Disk { center, radius } => (p.dist(center) - radius).max(T::zero()),
            Region::Annulus { center, inner, outer } => {
                let d = p.dist(center);
                (inner - d).max(d - outer).max(T::zero())
            }
        }
    }
}

/// `σ_n(region ∩ D)` for each field; the region must keep a distance of at
/// least twice the largest `Ω⁻` radius from every zero.
pub fn vanishing_mass_check<T: Real>(seq: &[VortexField<T>], region: &Region<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(seq.len());
    for f in seq {
        let radii = component_radius_check(f)?;
        let reach = radii.iter().map(|z| z.radius).fold(T::zero(), T::max) * T::lit(2.0);
        for (index, &p) in f.zeros.points.iter().enumerate() {
            let distance = region.distance(p);
            if distance < reach {
                return Err(Error::RegionOverlap { index, distance: distance.to_f64_lossy() });
            }
        }
        let masses = node_masses(f)?;
        let inside: Vec<T> = f
            .nodes()
            .enumerate()
            .filter(|(_, (_, _, p))| region.contains(*p) && in_unit_disk(*p))
            .map(|(k, _)| masses[k])
            .collect();
        out.push(stable_sum(inside));
    }
    Ok(out)
}

/// Settings of the concentration report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportSettings<T> {
    /// Support cap for W1 pooling.
    pub w1_cap: usize,
    /// Sampling density for generator measures.
    pub resolution: usize,
    /// `C` in the ball radius `C · N / √r` of the local-factor integrals.
    pub ball_constant: T,
}

impl<T: Real> Default for ReportSettings<T> {
    fn default() -> Self {
        Self { w1_cap: crate::measure::DEFAULT_SUPPORT_CAP, resolution: 256, ball_constant: T::one() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationRow<T> {
    pub n: usize,
    pub r: T,
    pub n_vortices: u64,
    pub energy: T,
    /// `E / 2πN`.
    pub energy_ratio: T,
    /// `W1(σ_n, σ_D)` with `σ_n` renormalised on the disk.
    pub w1_target: T,
    /// `W1(σ_n, δ_{P_n})`.
    pub w1_diracs: T,
    /// `E r^{−θ}`.
    pub energy_growth: T,
    pub decay_c_hat: T,
    pub decay_r2: T,
    /// `max_j radius_j · √r / N`.
    pub ball_ratio: T,
    /// `max component diameter · √r / N`.
    pub diameter_ratio: T,
    /// `(1/N) Σ_j |∫ log h_j|` over balls of radius `clamp(C N/√r, 3h, ε)`.
    pub log_h_mean: T,
    /// `σ_n(D)` before renormalisation.
    pub disk_mass: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport<T> {
    pub theta: T,
    pub rows: Vec<ConcentrationRow<T>>,
}

/// `W1(σ_n, μ)` after renormalising `σ_n` on the disk.
pub fn sigma_w1<T: Real>(f: &VortexField<T>, target: &DiskMeasure<T>, cap: usize) -> Result<T> {
    let sigma = sigma_measure(f)?.normalized()?;
    w1_distance(&sigma, target, cap)
}

/// `(1/N) Σ_j |∫_{B(z_j, ρ)} log h_j|` with `ρ = clamp(C·N/√r, 3h, ε)`.
pub fn log_h_mean<T: Real>(f: &VortexField<T>, ball_constant: T) -> Result<T> {
    if f.zeros.is_empty() {
        return Ok(T::zero());
    }
    let n = T::lit(f.zeros.degree() as f64);
    let eps = f.zeros.epsilon()?;
    let radius = (ball_constant * n / f.r.sqrt()).max(T::lit(3.0) * f.grid.spacing).min(eps);
    let mut parts = Vec::with_capacity(f.zeros.len());
    for j in 0..f.zeros.len() {
        parts.push(local_factor_h(f, j, radius)?.log_integral.abs());
    }
    Ok(stable_sum(parts) / n)
}

/// One row per level: energy bookkeeping, layered W1 distances, decay and
/// localisation constants.
pub fn convergence_report<T: Real>(
    target: &DiskMeasure<T>,
    schedule: &ScheduleParams<T>,
    fields: &[VortexField<T>],
    approxes: &[DiracApproximation<T>],
    settings: &ReportSettings<T>,
) -> Result<ConcentrationReport<T>> {
    if fields.len() != approxes.len() || fields.len() > schedule.entries.len() {
        return Err(Error::SequenceMismatch(format!(
            "{} fields, {} approximations, {} schedule entries",
            fields.len(),
            approxes.len(),
            schedule.entries.len()
        )));
    }
    let mut rows = Vec::with_capacity(fields.len());
    for ((f, a), entry) in fields.iter().zip(approxes).zip(&schedule.entries) {
        rows.push(report_row(target, schedule.theta, entry.n, f, a, settings)?);
    }
    Ok(ConcentrationReport { theta: schedule.theta, rows })
}

/// A single report row.
pub fn report_row<T: Real>(
    target: &DiskMeasure<T>,
    theta: T,
    n: usize,
    f: &VortexField<T>,
    approx: &DiracApproximation<T>,
    settings: &ReportSettings<T>,
) -> Result<ConcentrationRow<T>> {
    let nv = f.zeros.degree();
    if nv != approx.n_total {
        return Err(Error::SequenceMismatch(format!("field degree {nv} but approximation N = {}", approx.n_total)));
    }
    let nt = T::lit(nv as f64);
    let energy = total_energy(f);
    let sigma = sigma_measure(f)?;
    let disk_mass = sigma.total_mass();
    let sigma = sigma.normalized()?;
    let w1_target = w1_distance(&sigma, target, settings.w1_cap)?;
    let w1_diracs = w1_distance(&sigma, &approx.to_measure(), settings.w1_cap)?;
    let decay = decay_fit(f)?;
    let radii = component_radius_check(f)?;
    let ball_ratio = radii.iter().map(|z| z.ratio).fold(T::zero(), T::max);
    let omega = sublevel_set(f, LevelSetKind::OmegaMinus)?;
    let diameter = omega.components.iter().map(|c| c.diameter).fold(T::zero(), T::max);
    Ok(ConcentrationRow {
        n,
        r: f.r,
        n_vortices: nv,
        energy,
        energy_ratio: energy / (T::lit(2.0) * T::PI() * nt),
        w1_target,
        w1_diracs,
        energy_growth: energy * f.r.powf(-theta),
        decay_c_hat: decay.c_hat,
        decay_r2: decay.r2,
        ball_ratio,
        diameter_ratio: diameter * f.r.sqrt() / nt,
        log_h_mean: log_h_mean(f, settings.ball_constant)?,
        disk_mass,
    })
}
