//! Strength schedule `r_n`: the decreasing function `F`, the power-of-two
//! search for `r`, and the checks on the three vanishing ratios.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `θ = min(1/4, d / (2(d + 1)))`.
pub fn theta_exponent<T: Real>(d: T) -> Result<T> {
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::InvalidDimension(d.to_f64_lossy()));
    }
    Ok(T::lit(0.25).min(d / (T::lit(2.0) * (d + T::one()))))
}

/// `F(x) = C x^{-1/d}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrostmanF<T> {
    pub d: T,
    pub c: T,
}

impl<T: Real> FrostmanF<T> {
    pub fn new(d: T, c: T) -> Result<Self> {
        if !(d > T::zero()) {
            return Err(Error::InvalidDimension(d.to_f64_lossy()));
        }
        if !(c > T::zero()) {
            return Err(Error::InvalidArgument(format!("Frostman constant {c} must be > 0")));
        }
        Ok(Self { d, c })
    }

    pub fn eval(&self, x: T) -> T {
        self.c * x.powf(-T::one() / self.d)
    }
}

/// Slope used to continue `F` past the supplied data in log-log space.
const MIN_TAIL_SLOPE: f64 = -0.01;

/// Non-increasing log-log piecewise-linear interpolant through the running
/// minimum of the supplied `(N_n, ε_n)` values.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolatedF<T> {
    log_x: Vec<T>,
    log_y: Vec<T>,
    /// Running-minimum values at the knots, returned exactly there.
    knots: Vec<T>,
    left_slope: T,
    right_slope: T,
}

impl<T: Real> InterpolatedF<T> {
    pub fn new(pairs: &[(u64, T)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("interpolated F needs at least one pair".into()));
        }
        if let Some(&(_, e)) = pairs.iter().find(|(_, e)| !(*e > T::zero())) {
            return Err(Error::InvalidEpsilon(e.to_f64_lossy()));
        }
        if pairs.iter().any(|&(n, _)| n == 0) {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|p| p.0);
        let mut log_x: Vec<T> = Vec::new();
        let mut log_y: Vec<T> = Vec::new();
        let mut knots: Vec<T> = Vec::new();
        let mut running = T::infinity();
        for (n, e) in sorted {
            running = running.min(e);
            let lx = T::lit(n as f64).ln();
            match log_x.last() {
                Some(&last) if last == lx => {
                    *log_y.last_mut().unwrap() = running.ln();
                    *knots.last_mut().unwrap() = running;
                }
                _ => {
                    log_x.push(lx);
                    log_y.push(running.ln());
                    knots.push(running);
                }
            }
        }
        let tail = T::lit(MIN_TAIL_SLOPE);
        let slope = |a: usize, b: usize| (log_y[b] - log_y[a]) / (log_x[b] - log_x[a]);
        let k = log_x.len();
        let (left_slope, right_slope) =
            if k == 1 { (tail, tail) } else { (slope(0, 1).min(tail), slope(k - 2, k - 1).min(tail)) };
        Ok(Self { log_x, log_y, knots, left_slope, right_slope })
    }

    pub fn eval(&self, x: T) -> T {
        let lx = x.ln();
        let k = self.log_x.len();
        if let Some(i) = self.log_x.iter().position(|&v| v == lx) {
            return self.knots[i];
        }
        let ly = if lx <= self.log_x[0] {
            self.log_y[0] + self.left_slope * (lx - self.log_x[0])
        } else if lx >= self.log_x[k - 1] {
            self.log_y[k - 1] + self.right_slope * (lx - self.log_x[k - 1])
        } else {
            let i = self.log_x.partition_point(|&v| v <= lx) - 1;
            let t = (lx - self.log_x[i]) / (self.log_x[i + 1] - self.log_x[i]);
            self.log_y[i] + t * (self.log_y[i + 1] - self.log_y[i])
        };
        ly.exp()
    }
}

/// The function `F` of the construction, on either path.
#[derive(Clone, Debug, PartialEq)]
pub enum DecayFunction<T> {
    Frostman(FrostmanF<T>),
    Interpolated(InterpolatedF<T>),
}

impl<T: Real> DecayFunction<T> {
    pub fn eval(&self, x: T) -> T {
        match self {
            DecayFunction::Frostman(f) => f.eval(x),
            DecayFunction::Interpolated(f) => f.eval(x),
        }
    }
}

/// The three ratios that must vanish along the schedule:
/// `N r^{-1/4}`, `N / (F √r)`, `log r / (F √r)`.
pub fn rn_ratios<T: Real>(n_vortices: u64, f_of_n: T, r: T) -> [T; 3] {
    let n = T::lit(n_vortices as f64);
    let sr = r.sqrt();
    [n * r.powf(T::lit(-0.25)), n / (f_of_n * sr), r.ln() / (f_of_n * sr)]
}

const MAX_EXPONENT: i32 = 120;

/// Smallest `r = 2^k`, `1 ≤ k ≤ 120`, with all three ratios `≤ margin`.
pub fn select_r<T: Real>(n_vortices: u64, f_of_n: T, margin: T) -> Result<T> {
    if n_vortices < 1 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    if !(f_of_n > T::zero()) {
        return Err(Error::InvalidArgument(format!("F(N) = {f_of_n} must be > 0")));
    }
    if !(margin > T::zero() && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin {margin} must be positive")));
    }
    for k in 1..=MAX_EXPONENT {
        let r = T::lit(2.0).powi(k);
        if rn_ratios(n_vortices, f_of_n, r).iter().all(|&q| q <= margin) {
            return Ok(r);
        }
    }
    Err(Error::ScheduleOverflow { n_vortices, margin: margin.to_f64_lossy() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleEntry<T> {
    /// 1-based level index.
    pub n: usize,
    pub n_vortices: u64,
    pub epsilon: T,
    pub f_value: T,
    pub r: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleParams<T> {
    pub entries: Vec<ScheduleEntry<T>>,
    pub theta: T,
    pub frostman_d: Option<T>,
    /// Level `n` targets `margin_scale / n` on each ratio.
    pub margin_scale: T,
}

impl<T: Real> ScheduleParams<T> {
    pub fn margin(&self, n: usize) -> T {
        self.margin_scale / T::from_usize_lossy(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleRow<T> {
    pub entry: ScheduleEntry<T>,
    pub ratios: [T; 3],
    pub n_r_theta: T,
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleReport<T> {
    pub rows: Vec<ScheduleRow<T>>,
    /// Per column (ratio1, ratio2, ratio3, N r^{-θ}): non-increasing from
    /// the second entry on and final value within the last margin.
    pub column_ok: [bool; 4],
    /// Every row satisfies its own margin on the three ratios.
    pub rows_within_margin: bool,
    pub r_strictly_increasing: bool,
    pub epsilon_dominates_f: bool,
}

impl<T: Real> ScheduleReport<T> {
    pub fn all_ok(&self) -> bool {
        self.column_ok.iter().all(|&b| b)
            && self.rows_within_margin
            && self.r_strictly_increasing
            && self.epsilon_dominates_f
    }

    /// Schedule export: `n,N_n,epsilon_n,F_n,r_n,ratio1,ratio2,ratio3,N_rtheta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,N_n,epsilon_n,F_n,r_n,ratio1,ratio2,ratio3,N_rtheta")?;
        for row in &self.rows {
            let e = &row.entry;
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                e.n,
                e.n_vortices,
                e.epsilon,
                e.f_value,
                e.r,
                row.ratios[0],
                row.ratios[1],
                row.ratios[2],
                row.n_r_theta
            )?;
        }
        Ok(())
    }
}

/// Tabulates the ratios of every entry and the per-column trend checks.
pub fn verify_schedule<T: Real>(s: &ScheduleParams<T>) -> ScheduleReport<T> {
    let rows: Vec<ScheduleRow<T>> = s
        .entries
        .iter()
        .map(|e| ScheduleRow {
            entry: *e,
            ratios: rn_ratios(e.n_vortices, e.f_value, e.r),
            n_r_theta: T::lit(e.n_vortices as f64) * e.r.powf(-s.theta),
            margin: s.margin(e.n),
        })
        .collect();
    let column = |k: usize, row: &ScheduleRow<T>| if k < 3 { row.ratios[k] } else { row.n_r_theta };
    let mut column_ok = [true; 4];
    for (k, ok) in column_ok.iter_mut().enumerate() {
        let values: Vec<T> = rows.iter().map(|r| column(k, r)).collect();
        let nonincreasing = values.windows(2).skip(1).all(|w| w[1] <= w[0]);
        let last_ok = match rows.last() {
            Some(last) if rows.len() > 1 => column(k, last) <= last.margin,
            _ => true,
        };
        *ok = nonincreasing && last_ok;
    }
    let rows_within_margin = rows.iter().all(|r| r.ratios.iter().all(|&q| q <= r.margin));
    let r_strictly_increasing = s.entries.windows(2).all(|w| w[1].r > w[0].r);
    let epsilon_dominates_f = s.entries.iter().all(|e| e.epsilon >= e.f_value);
    ScheduleReport { rows, column_ok, rows_within_margin, r_strictly_increasing, epsilon_dominates_f }
}
