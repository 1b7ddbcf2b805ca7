//! Geometric multigrid V-cycle for `−Δ_h + c(x)` with homogeneous Dirichlet
//! data, used as a symmetric preconditioner for CG.

use crate::scalar::Real;

/// Coarsening stops at this many intervals per side (or when odd).
const COARSEST: usize = 8;
const SMOOTH: usize = 2;

struct Level<T> {
    n: usize,
    inv_h2: T,
    c: Vec<T>,
    x: Vec<T>,
    b: Vec<T>,
    res: Vec<T>,
}

impl<T: Real> Level<T> {
    fn new(n: usize, h: T) -> Self {
        let len = (n + 1) * (n + 1);
        let zero = vec![T::zero(); len];
        Self { n, inv_h2: T::one() / (h * h), c: zero.clone(), x: zero.clone(), b: zero.clone(), res: zero }
    }

    fn side(&self) -> usize {
        self.n + 1
    }

    /// One red-black Gauss–Seidel half sweep over nodes with `(i + j) % 2 == color`.
    fn relax(&mut self, color: usize) {
        let side = self.side();
        let four = T::lit(4.0) * self.inv_h2;
        for j in 1..self.n {
            let start = 1 + (j + 1 + color) % 2;
            let row = j * side;
            let mut i = start;
            while i < self.n {
                let k = row + i;
                let nb = self.x[k - 1] + self.x[k + 1] + self.x[k - side] + self.x[k + side];
                self.x[k] = (self.b[k] + nb * self.inv_h2) / (four + self.c[k]);
                i += 2;
            }
        }
    }

    fn residual(&mut self) {
        let side = self.side();
        let four = T::lit(4.0);
        for j in 1..self.n {
            let row = j * side;
            for k in row + 1..row + self.n {
                let nb = self.x[k - 1] + self.x[k + 1] + self.x[k - side] + self.x[k + side];
                let ax = (four * self.x[k] - nb) * self.inv_h2 + self.c[k] * self.x[k];
                self.res[k] = self.b[k] - ax;
            }
        }
    }
}

/// Full-weighting average of `fine` around the fine node `(2I, 2J)`.
fn full_weight<T: Real>(fine: &[T], side_f: usize, i: usize, j: usize) -> T {
    let k = 2 * j * side_f + 2 * i;
    let edge = fine[k - 1] + fine[k + 1] + fine[k - side_f] + fine[k + side_f];
    let corner = fine[k - side_f - 1] + fine[k - side_f + 1] + fine[k + side_f - 1] + fine[k + side_f + 1];
    (T::lit(4.0) * fine[k] + T::lit(2.0) * edge + corner) / T::lit(16.0)
}

pub(crate) struct Multigrid<T> {
    levels: Vec<Level<T>>,
}

impl<T: Real> Multigrid<T> {
    pub(crate) fn new(n: usize, h: T) -> Self {
        let mut levels = vec![Level::new(n, h)];
        let (mut n, mut h) = (n, h);
        while n % 2 == 0 && n / 2 >= COARSEST {
            n /= 2;
            h = h * T::lit(2.0);
            levels.push(Level::new(n, h));
        }
        Self { levels }
    }

    /// Installs the zeroth-order coefficient `c ≥ 0` on every level.
    pub(crate) fn set_shift(&mut self, c: &[T]) {
        self.levels[0].c.copy_from_slice(c);
        for l in 1..self.levels.len() {
            let (fine, coarse) = self.levels.split_at_mut(l);
            let fine = &fine[l - 1];
            let coarse = &mut coarse[0];
            let side_f = fine.side();
            let side_c = coarse.side();
            for j in 1..coarse.n {
                for i in 1..coarse.n {
                    coarse.c[j * side_c + i] = full_weight(&fine.c, side_f, i, j);
                }
            }
        }
    }

    /// `z ≈ A⁻¹ r` by one V-cycle from a zero initial guess.
    pub(crate) fn apply(&mut self, r: &[T], z: &mut [T]) {
        self.levels[0].b.copy_from_slice(r);
        self.cycle(0);
        z.copy_from_slice(&self.levels[0].x);
    }

    fn cycle(&mut self, l: usize) {
        for v in self.levels[l].x.iter_mut() {
            *v = T::zero();
        }
        if l + 1 == self.levels.len() {
            let sweeps = 4 * self.levels[l].n.min(32);
            for _ in 0..sweeps {
                self.levels[l].relax(0);
                self.levels[l].relax(1);
            }
            for _ in 0..sweeps {
                self.levels[l].relax(1);
                self.levels[l].relax(0);
            }
            return;
        }
        for _ in 0..SMOOTH {
            self.levels[l].relax(0);
            self.levels[l].relax(1);
        }
        self.levels[l].residual();
        {
            let (fine, coarse) = self.levels.split_at_mut(l + 1);
            let fine = &fine[l];
            let coarse = &mut coarse[0];
            let side_f = fine.side();
            let side_c = coarse.side();
            for v in coarse.b.iter_mut() {
                *v = T::zero();
            }
            for j in 1..coarse.n {
                for i in 1..coarse.n {
                    coarse.b[j * side_c + i] = full_weight(&fine.res, side_f, i, j);
                }
            }
        }
        self.cycle(l + 1);
        {
            let (fine, coarse) = self.levels.split_at_mut(l + 1);
            let fine = &mut fine[l];
            let coarse = &coarse[0];
            let side_f = fine.side();
            let side_c = coarse.side();
            let half = T::lit(0.5);
            let quarter = T::lit(0.25);
            for j in 1..fine.n {
                let jc = j / 2;
                for i in 1..fine.n {
                    let ic = i / 2;
                    let e = |a: usize, b: usize| coarse.x[b * side_c + a];
                    let v = match (i % 2, j % 2) {
                        (0, 0) => e(ic, jc),
                        (1, 0) => half * (e(ic, jc) + e(ic + 1, jc)),
                        (0, 1) => half * (e(ic, jc) + e(ic, jc + 1)),
                        _ => quarter * (e(ic, jc) + e(ic + 1, jc) + e(ic, jc + 1) + e(ic + 1, jc + 1)),
                    };
                    fine.x[j * side_f + i] = fine.x[j * side_f + i] + v;
                }
            }
        }
        for _ in 0..SMOOTH {
            self.levels[l].relax(1);
            self.levels[l].relax(0);
        }
    }
}
