//! Weighted Dirac approximation of a disk measure on a triangular lattice
//! of disjoint balls, with largest-remainder rationalisation of weights.

use serde::{Deserialize, Serialize};

use super::{Atom, DiskMeasure, Generator, Representation};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{stable_sum, Real};

/// Finite configuration `{(z_j, m_j)}` with `N = Σ m_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracApproximation<T> {
    pub points: Vec<Point<T>>,
    pub multiplicities: Vec<u64>,
    pub n_total: u64,
    /// Half the minimum of pairwise and boundary distances.
    pub epsilon: T,
    /// `M = Σ_j σ(B_j)`.
    pub captured_mass: T,
    pub cell_radius: T,
    /// `σ(B_j)` for each kept ball, in the order of `points`.
    pub ball_masses: Vec<T>,
}

impl<T: Real> DiracApproximation<T> {
    /// `(1/N) Σ m_j δ_{z_j}` as a disk measure.
    pub fn to_measure(&self) -> DiskMeasure<T> {
        let n = T::lit(self.n_total as f64);
        DiskMeasure::from_atoms(
            self.points.iter().zip(&self.multiplicities).map(|(&p, &m)| Atom::new(p, T::lit(m as f64) / n)).collect(),
        )
        .expect("approximation points lie inside the disk")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Serializable mirror of [`DiracApproximation`] for `f64` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracApproximationRecord {
    pub points: Vec<[f64; 2]>,
    pub multiplicities: Vec<u64>,
    pub n_total: u64,
    pub epsilon: f64,
    pub captured_mass: f64,
    pub cell_radius: f64,
}

impl<T: Real> From<&DiracApproximation<T>> for DiracApproximationRecord {
    fn from(a: &DiracApproximation<T>) -> Self {
        Self {
            points: a.points.iter().map(|p| p.to_array()).collect(),
            multiplicities: a.multiplicities.clone(),
            n_total: a.n_total,
            epsilon: a.epsilon.to_f64_lossy(),
            captured_mass: a.captured_mass.to_f64_lossy(),
            cell_radius: a.cell_radius.to_f64_lossy(),
        }
    }
}

/// `ε = ½ min(min_{j≠k} |z_j − z_k|, min_j (1 − |z_j|))`.
pub fn separation<T: Real>(points: &[Point<T>]) -> Result<T> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("separation of an empty point set".into()));
    }
    let mut best = T::infinity();
    for (j, p) in points.iter().enumerate() {
        let r = p.norm();
        if !(r < T::one()) {
            return Err(Error::OutsideDisk { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
        }
        best = best.min(T::one() - r);
        for q in &points[..j] {
            if p == q {
                return Err(Error::DuplicatePoint { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
            }
            best = best.min(p.dist(*q));
        }
    }
    Ok(best * T::lit(0.5))
}

/// Apportions `n` seats to `weights` (summing to 1) by the largest
/// remainder method; ties go to the lower index.
pub fn largest_remainder<T: Real>(weights: &[T], n: u64) -> Vec<u64> {
    let nf = n as f64;
    let quotas: Vec<f64> = weights.iter().map(|w| w.to_f64_lossy() * nf).collect();
    let mut seats: Vec<u64> = quotas.iter().map(|q| q.floor().max(0.0) as u64).collect();
    let assigned: u64 = seats.iter().sum();
    if assigned >= n {
        return seats;
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &j in order.iter().take((n - assigned) as usize) {
        seats[j] += 1;
    }
    seats
}

/// Relative ball mass below which a ball counts as empty.
const NEGLIGIBLE_MASS: f64 = 1e-12;

fn lattice_centers<T: Real>(cell_radius: T, offset: Point<T>) -> Vec<Point<T>> {
    let a = cell_radius * T::lit(2.0);
    let row = a * T::lit(3f64.sqrt() / 2.0);
    let reach = T::one() + offset.norm();
    let jmax = (reach / row).ceil().to_f64_lossy() as i64 + 1;
    let imax = (reach / a).ceil().to_f64_lossy() as i64 + jmax + 1;
    let mut out = Vec::new();
    for j in -jmax..=jmax {
        for i in -imax..=imax {
            let jf = T::lit(j as f64);
            let c = Point::new(offset.x + T::lit(i as f64) * a + jf * a * T::lit(0.5), offset.y + jf * row);
            if c.norm() + cell_radius < T::one() {
                out.push(c);
            }
        }
    }
    out
}

/// Mass of each lattice ball. Discrete representations assign every atom
/// to at most one ball so that tangency points are not double counted.
fn lattice_masses<T: Real>(m: &DiskMeasure<T>, centers: &[Point<T>], radius: T) -> Vec<T> {
    let discrete: Option<Vec<Atom<T>>> = match m.representation() {
        Representation::Atoms(_) | Representation::Grid(_) => Some(m.atoms(0)),
        Representation::Generator(Generator::SingleAtom(p)) => Some(vec![Atom::new(*p, T::one())]),
        Representation::Generator(_) => None,
    };
    match discrete {
        None => centers.iter().map(|&c| m.ball_mass(c, radius)).collect(),
        Some(atoms) => {
            let mut masses = vec![T::zero(); centers.len()];
            let r2 = radius * radius;
            let a = radius * T::lit(2.0);
            for atom in atoms {
                // Only the few centres within one lattice step can contain it.
                let mut best: Option<(usize, T)> = None;
                for (k, c) in centers.iter().enumerate() {
                    if (c.x - atom.point.x).abs() > a || (c.y - atom.point.y).abs() > a {
                        continue;
                    }
                    let d2 = c.dist_sq(atom.point);
                    if d2 <= r2 && best.is_none_or(|(_, b)| d2 < b) {
                        best = Some((k, d2));
                    }
                }
                if let Some((k, _)) = best {
                    masses[k] = masses[k] + atom.weight;
                }
            }
            masses
        }
    }
}

/// Lattice anchored at the origin; see [`dirac_approximate_with`].
pub fn dirac_approximate<T: Real>(
    m: &DiskMeasure<T>,
    cell_radius: T,
    denominator_cap: u64,
) -> Result<DiracApproximation<T>> {
    dirac_approximate_with(m, cell_radius, denominator_cap, Point::origin())
}

/// Covers the disk by disjoint balls of radius `cell_radius` centred on a
/// triangular lattice through `offset`, keeps the balls strictly inside the
/// disk whose relative mass exceeds `1e-12`, and rationalises their
/// normalised masses to `m_j / N` with the smallest `N ≤ denominator_cap`
/// that gives every kept ball `m_j ≥ 1`.
pub fn dirac_approximate_with<T: Real>(
    m: &DiskMeasure<T>,
    cell_radius: T,
    denominator_cap: u64,
    offset: Point<T>,
) -> Result<DiracApproximation<T>> {
    if !(cell_radius > T::zero() && cell_radius < T::one()) {
        return Err(Error::InvalidArgument(format!("cell radius {cell_radius} must lie in (0, 1)")));
    }
    if denominator_cap < 1 {
        return Err(Error::InvalidArgument("denominator cap must be >= 1".into()));
    }
    let centers = lattice_centers(cell_radius, offset);
    let masses = lattice_masses(m, &centers, cell_radius);
    // Tangent balls can pick up rounding-level mass; drop those.
    let floor = stable_sum(masses.iter().copied()) * T::lit(NEGLIGIBLE_MASS);
    let (points, ball_masses): (Vec<_>, Vec<_>) = centers.into_iter().zip(masses).filter(|(_, s)| *s > floor).unzip();
    if points.is_empty() {
        let inner = m.ball_mass(Point::origin(), T::one() - cell_radius);
        return Err(if inner > T::zero() {
            Error::EmptyApproximation
        } else {
            Error::BoundarySupport { cell_radius: cell_radius.to_f64_lossy() }
        });
    }
    let captured_mass = stable_sum(ball_masses.iter().copied());
    let weights: Vec<T> = ball_masses.iter().map(|&s| s / captured_mass).collect();
    let kept = points.len() as u64;
    let mut chosen = None;
    for n in kept..=denominator_cap {
        let seats = largest_remainder(&weights, n);
        if seats.iter().all(|&s| s >= 1) {
            chosen = Some((n, seats));
            break;
        }
    }
    let (n_total, multiplicities) =
        chosen.ok_or(Error::DenominatorTooSmall { kept: points.len(), cap: denominator_cap })?;
    let epsilon = separation(&points)?;
    Ok(DiracApproximation { points, multiplicities, n_total, epsilon, captured_mass, cell_radius, ball_masses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn separation_examples() {
        assert!((separation(&[p(0.0, 0.0), p(0.5, 0.0)]).unwrap() - 0.25).abs() < 1e-15);
        assert!((separation(&[p(0.0, 0.0)]).unwrap() - 0.5).abs() < 1e-15);
        assert!((separation(&[p(0.9, 0.0)]).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn separation_rejects_duplicates_and_outside() {
        assert!(matches!(separation(&[p(0.1, 0.1), p(0.1, 0.1)]), Err(Error::DuplicatePoint { .. })));
        assert!(matches!(separation(&[p(1.0, 0.0)]), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn single_atom_gives_single_point() {
        let m = DiskMeasure::single_atom(p(0.2, 0.0)).unwrap();
        for eps in [0.3, 0.25, 0.2, 0.12, 0.05] {
            let a = dirac_approximate(&m, eps, 10).unwrap();
            assert_eq!(a.multiplicities, vec![1]);
            assert_eq!(a.n_total, 1);
            assert!(a.points[0].dist(p(0.2, 0.0)) <= eps + 1e-12);
        }
    }

    #[test]
    fn two_equal_atoms() {
        let m = DiskMeasure::from_atoms(vec![Atom::new(p(-0.4, 0.0), 0.5), Atom::new(p(0.4, 0.0), 0.5)]).unwrap();
        let a = dirac_approximate(&m, 0.1, 10).unwrap();
        assert_eq!(a.points.len(), 2);
        assert_eq!(a.multiplicities, vec![1, 1]);
        assert_eq!(a.n_total, 2);
    }

    #[test]
    fn denominator_too_small() {
        let m = DiskMeasure::from_atoms(vec![Atom::new(p(-0.4, 0.0), 0.9), Atom::new(p(0.4, 0.0), 0.1)]).unwrap();
        let err = dirac_approximate(&m, 0.1, 5).unwrap_err();
        assert!(matches!(err, Error::DenominatorTooSmall { .. }));
        let ok = dirac_approximate(&m, 0.1, 10).unwrap();
        assert_eq!(ok.n_total, 6);
        assert_eq!(ok.multiplicities, vec![5, 1]);
    }

    #[test]
    fn boundary_support_rejected() {
        let m = DiskMeasure::single_atom(p(0.99, 0.0)).unwrap();
        assert!(matches!(dirac_approximate(&m, 0.1, 10), Err(Error::BoundarySupport { .. })));
    }

    #[test]
    fn largest_remainder_properties() {
        let w = [0.6, 0.2, 0.2];
        assert_eq!(largest_remainder(&w, 3), vec![2, 1, 0]);
        assert_eq!(largest_remainder(&w, 4), vec![2, 1, 1]);
        assert_eq!(largest_remainder(&w, 5), vec![3, 1, 1]);
    }
}
