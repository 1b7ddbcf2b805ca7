//! Exact Wasserstein-1 distance between finitely supported measures.
//!
//! The balanced transportation problem is solved by the primal
//! transportation simplex (MODI potentials, spanning-tree basis, block
//! pricing). Supports are first pooled into square cells so that each side
//! has at most `support_cap` atoms.

use super::{Atom, DiskMeasure};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{stable_sum, Real};

pub const DEFAULT_SUPPORT_CAP: usize = 400;

/// Sampling density used to discretise generator measures before pooling.
const GENERATOR_RESOLUTION: usize = 256;

const MASS_TOLERANCE: f64 = 1e-9;

fn cell_key<T: Real>(p: Point<T>, inv: f64) -> (i64, i64) {
    (((p.x.to_f64_lossy() + 1.0) * inv).floor() as i64, ((p.y.to_f64_lossy() + 1.0) * inv).floor() as i64)
}

fn occupied_cells<T: Real>(atoms: &[Atom<T>], inv: f64) -> usize {
    let mut keys: Vec<(i64, i64)> = atoms.iter().map(|a| cell_key(a.point, inv)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Pools atoms into dyadic square cells (side `2^{1-k}`, finest `k ≤ 16`
/// with at most `cap` occupied cells); each cell becomes one atom at the
/// mass-weighted centroid. Inputs already within the cap are returned
/// unchanged.
pub fn pool_atoms<T: Real>(atoms: Vec<Atom<T>>, cap: usize) -> Vec<Atom<T>> {
    let atoms: Vec<Atom<T>> = atoms.into_iter().filter(|a| a.weight > T::zero()).collect();
    if atoms.len() <= cap {
        return atoms;
    }
    let (mut lo, mut hi) = (0u32, 16u32);
    if occupied_cells(&atoms, 0.5) > cap {
        lo = 0;
        hi = 0;
    }
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if occupied_cells(&atoms, f64::from(1u32 << mid) * 0.5) <= cap {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let inv = f64::from(1u32 << lo) * 0.5;
    let mut keyed: Vec<((i64, i64), Atom<T>)> = atoms.into_iter().map(|a| (cell_key(a.point, inv), a)).collect();
    keyed.sort_by_key(|a| a.0);
    let mut out = Vec::new();
    let mut i = 0;
    while i < keyed.len() {
        let key = keyed[i].0;
        let mut j = i;
        let (mut w, mut wx, mut wy) = (0.0f64, 0.0f64, 0.0f64);
        while j < keyed.len() && keyed[j].0 == key {
            let a = keyed[j].1;
            let aw = a.weight.to_f64_lossy();
            w += aw;
            wx += aw * a.point.x.to_f64_lossy();
            wy += aw * a.point.y.to_f64_lossy();
            j += 1;
        }
        out.push(Atom::new(Point::new(T::lit(wx / w), T::lit(wy / w)), T::lit(w)));
        i = j;
    }
    out
}

/// `W1` between two measures, each pooled to at most `support_cap` atoms.
pub fn w1_distance<T: Real>(a: &DiskMeasure<T>, b: &DiskMeasure<T>, support_cap: usize) -> Result<T> {
    if support_cap < 2 {
        return Err(Error::InvalidArgument("support_cap must be >= 2".into()));
    }
    for m in [a, b] {
        let mass = m.total_mass().to_f64_lossy();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Unnormalized { mass });
        }
    }
    let pa = pool_atoms(a.atoms(GENERATOR_RESOLUTION), support_cap);
    let pb = pool_atoms(b.atoms(GENERATOR_RESOLUTION), support_cap);
    transport_cost(&pa, &pb)
}

/// Optimal transport cost with Euclidean ground cost between two atomic
/// measures of equal total mass (the smaller side is rescaled by the ratio
/// of totals to absorb rounding).
pub fn transport_cost<T: Real>(a: &[Atom<T>], b: &[Atom<T>]) -> Result<T> {
    let src: Vec<(Point<f64>, f64)> =
        a.iter().filter(|x| x.weight > T::zero()).map(|x| (x.point.cast(), x.weight.to_f64_lossy())).collect();
    let dst: Vec<(Point<f64>, f64)> =
        b.iter().filter(|x| x.weight > T::zero()).map(|x| (x.point.cast(), x.weight.to_f64_lossy())).collect();
    if src.is_empty() || dst.is_empty() {
        return Err(Error::Transport("empty support".into()));
    }
    let ta: f64 = stable_sum(src.iter().map(|x| x.1));
    let tb: f64 = stable_sum(dst.iter().map(|x| x.1));
    if (ta - tb).abs() > MASS_TOLERANCE * ta.max(tb) {
        return Err(Error::Transport(format!("unbalanced masses {ta} vs {tb}")));
    }
    let supply: Vec<f64> = src.iter().map(|x| x.1 / ta).collect();
    let demand: Vec<f64> = dst.iter().map(|x| x.1 / tb).collect();
    let cost: Vec<f64> = src.iter().flat_map(|(p, _)| dst.iter().map(move |(q, _)| p.dist(*q))).collect();
    let value = TransportSimplex::new(supply, demand, cost)?.solve()?;
    Ok(T::lit(value * 0.5 * (ta + tb)))
}

/// Balanced transportation simplex on a dense cost matrix.
struct TransportSimplex {
    m: usize,
    n: usize,
    cost: Vec<f64>,
    /// Basic cells `(row, col, flow)`; always `m + n − 1` of them.
    basis: Vec<(usize, usize, f64)>,
    /// Incident basic-cell indices per tree node (rows `0..m`, cols `m..`).
    adj: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl TransportSimplex {
    fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        let m = supply.len();
        let n = demand.len();
        // North-west corner start; a simultaneous exhaustion of row and
        // column advances only the row, leaving a zero-flow basic cell.
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut s, mut d) = (supply[0], demand[0]);
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = s.min(d);
            basis.push((i, j, f));
            if i == m - 1 && j == n - 1 {
                break;
            }
            s -= f;
            d -= f;
            if (s <= d && i < m - 1) || j == n - 1 {
                i += 1;
                s = supply[i];
            } else {
                j += 1;
                d = demand[j];
            }
        }
        if basis.len() != m + n - 1 {
            return Err(Error::Transport(format!("initial basis has {} cells", basis.len())));
        }
        let mut adj = vec![Vec::new(); m + n];
        for (k, &(i, j, _)) in basis.iter().enumerate() {
            adj[i].push(k);
            adj[m + j].push(k);
        }
        Ok(Self { m, n, cost, basis, adj, u: vec![0.0; m], v: vec![0.0; n] })
    }

    fn potentials(&mut self) {
        let m = self.m;
        let mut seen = vec![false; m + self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        self.u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &self.adj[node] {
                let (i, j, _) = self.basis[k];
                let c = self.cost[i * self.n + j];
                if node < m {
                    if !seen[m + j] {
                        seen[m + j] = true;
                        self.v[j] = c - self.u[i];
                        stack.push(m + j);
                    }
                } else if !seen[i] {
                    seen[i] = true;
                    self.u[i] = c - self.v[j];
                    stack.push(i);
                }
            }
        }
    }

    /// Tree path from column node `m + col` to row node `row`, as basic-cell
    /// indices in order.
    fn path(&self, col: usize, row: usize) -> Vec<usize> {
        let total = self.m + self.n;
        let start = self.m + col;
        let mut via = vec![usize::MAX; total];
        let mut prev = vec![usize::MAX; total];
        let mut seen = vec![false; total];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            if node == row {
                break;
            }
            for &k in &self.adj[node] {
                let (i, j, _) = self.basis[k];
                let other = if node < self.m { self.m + j } else { i };
                if !seen[other] {
                    seen[other] = true;
                    via[other] = k;
                    prev[other] = node;
                    stack.push(other);
                }
            }
        }
        let mut edges = Vec::new();
        let mut node = row;
        while node != start {
            edges.push(via[node]);
            node = prev[node];
        }
        edges.reverse();
        edges
    }

    fn solve(mut self) -> Result<f64> {
        let (m, n) = (self.m, self.n);
        let max_cost = self.cost.iter().copied().fold(0.0f64, f64::max);
        let tol = 1e-12 * (1.0 + max_cost);
        let block = (4096 / n).max(1);
        let mut cursor = 0usize;
        let max_pivots = 200 * (m + n) * (m + n) + 10_000;
        self.potentials();
        for _ in 0..max_pivots {
            // Block pricing: scan whole rows, block by block, starting at the
            // row after the last entering variable.
            let mut entering = None;
            let mut scanned = 0;
            while scanned < m && entering.is_none() {
                let mut best = -tol;
                for r in 0..block.min(m - scanned) {
                    let i = (cursor + r) % m;
                    let ui = self.u[i];
                    let row = &self.cost[i * n..(i + 1) * n];
                    for (j, (&c, &vj)) in row.iter().zip(&self.v).enumerate() {
                        let red = c - ui - vj;
                        if red < best {
                            best = red;
                            entering = Some((i, j));
                        }
                    }
                }
                scanned += block.min(m - scanned);
                cursor = (cursor + block) % m;
            }
            let Some((ei, ej)) = entering else {
                let total = self.basis.iter().map(|&(i, j, f)| f * self.cost[i * n + j]);
                return Ok(stable_sum(total));
            };
            let path = self.path(ej, ei);
            // Edges alternate −, +, −, … starting next to the entering column.
            let mut theta = f64::INFINITY;
            let mut leave_pos = 0;
            for (pos, &k) in path.iter().enumerate().step_by(2) {
                if self.basis[k].2 < theta {
                    theta = self.basis[k].2;
                    leave_pos = pos;
                }
            }
            for (pos, &k) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    self.basis[k].2 -= theta;
                } else {
                    self.basis[k].2 += theta;
                }
            }
            let leave = path[leave_pos];
            let (li, lj, _) = self.basis[leave];
            self.adj[li].retain(|&k| k != leave);
            self.adj[m + lj].retain(|&k| k != leave);
            self.basis[leave] = (ei, ej, theta.max(0.0));
            self.adj[ei].push(leave);
            self.adj[m + ej].push(leave);
            self.potentials();
        }
        Err(Error::Transport("pivot limit exceeded".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(x: f64, y: f64, w: f64) -> Atom<f64> {
        Atom::new(Point::new(x, y), w)
    }

    #[test]
    fn single_atoms() {
        let c = transport_cost(&[atom(0.0, 0.0, 1.0)], &[atom(0.3, 0.0, 1.0)]).unwrap();
        assert!((c - 0.3).abs() < 1e-12);
    }

    #[test]
    fn two_point_example() {
        let a = [atom(0.0, 0.0, 0.5), atom(1.0, 0.0, 0.5)];
        let b = [atom(0.0, 0.0, 0.5), atom(0.0, 1.0, 0.5)];
        let c = transport_cost(&a, &b).unwrap();
        assert!((c - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_permutations() {
        // Uniform weights on equal-size supports: optimum is an assignment.
        let a: Vec<_> = [(0.1, 0.2), (-0.3, 0.5), (0.6, -0.1), (-0.2, -0.4), (0.0, 0.0)]
            .iter()
            .map(|&(x, y)| atom(x, y, 0.2))
            .collect();
        let b: Vec<_> = [(0.5, 0.5), (-0.5, 0.1), (0.2, -0.6), (0.1, 0.1), (-0.1, 0.3)]
            .iter()
            .map(|&(x, y)| atom(x, y, 0.2))
            .collect();
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..5).collect();
        permutations(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(i, &j)| 0.2 * a[i].point.dist(b[j].point)).sum();
            best = best.min(c);
        });
        let c = transport_cost(&a, &b).unwrap();
        assert!((c - best).abs() < 1e-12, "{c} vs {best}");
    }

    fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permutations(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn pooling_respects_cap_and_mass() {
        let atoms = DiskMeasure::<f64>::uniform_disk().atoms(100);
        let pooled = pool_atoms(atoms, 50);
        assert!(pooled.len() <= 50);
        let total: f64 = pooled.iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_rejected() {
        let a = DiskMeasure::from_atoms(vec![atom(0.0, 0.0, 0.5)]).unwrap();
        let b = DiskMeasure::single_atom(Point::new(0.0, 0.0)).unwrap();
        assert!(matches!(w1_distance(&a, &b, 10), Err(Error::Unnormalized { .. })));
    }
}
