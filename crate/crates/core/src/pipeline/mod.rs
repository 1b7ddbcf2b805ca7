//! End-to-end construction: target measure → Dirac approximations →
//! schedule → vortex solves → flow-box lifts → reports, with export of every
//! artifact and a pass/fail summary recomputable from the exported files.
//!
//! The pipeline runs in `f64`.

mod config;
mod export;
mod summary;

pub use config::{
    load_config, parse_config, AnnulusConfig, CellRadii, FrostmanConfig, ReportConfig, RunConfig, ScheduleConfig,
    SolverConfig,
};
pub use export::{export, read_manifest, verify_manifest, Manifest, ManifestEntry, MANIFEST_FILE};
pub use summary::{summarize_dir, RunInfo, Summary, Tables};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concentrate::{
    decay_fit_with_samples, report_row, vanishing_mass_check, ConcentrationRow, Region, ReportSettings,
};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::spec::MeasureSpec;
use crate::measure::{dirac_approximate, estimate_frostman, geometric_radii, DiracApproximation, DiskMeasure, Probes};
use crate::schedule::{
    select_r, theta_exponent, verify_schedule, DecayFunction, FrostmanF, InterpolatedF, ScheduleEntry, ScheduleParams,
    ScheduleReport,
};
use crate::swbox::{
    albe_identity_residual, apriori_check, curvature_residual, lift_to_flowbox, max_principle_scan,
    nodal_set_diagnostics, theta_distance, AprioriBounds, FlowBoxSolution, IdentityReport, MaxPrincipleScan, NodalRow,
};
use crate::vortex::{solve_vortex, InitialGuess, SolverSettings, ZeroConfig};

/// How the Frostman data entered the run.
#[derive(Clone, Debug, PartialEq)]
pub struct FrostmanInfo {
    pub d: f64,
    /// `true` when `d` came from the ball scan rather than the config.
    pub estimated: bool,
    pub c: f64,
}

/// Everything computed for one completed level.
#[derive(Clone, Debug)]
pub struct LevelArtifacts {
    pub level: usize,
    pub approx: DiracApproximation<f64>,
    pub lift: FlowBoxSolution<f64>,
    pub row: ConcentrationRow<f64>,
    pub identities: Vec<IdentityReport<f64>>,
    pub apriori: AprioriBounds<f64>,
    pub scan: MaxPrincipleScan<f64>,
    /// `d_H(Z^{θ₁}, Z^{θ₂})` for the configured pair.
    pub theta_gap: Option<f64>,
    /// Binned `(√r·dist, log(1 − e^u))` series of the decay fit.
    pub decay_series: Vec<(f64, f64)>,
}

/// The level at which a run stopped and why.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelFailure {
    pub level: usize,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub measure: MeasureSpec,
    pub theta: f64,
    pub frostman: Option<FrostmanInfo>,
    pub schedule: ScheduleParams<f64>,
    pub schedule_report: ScheduleReport<f64>,
    pub levels: Vec<LevelArtifacts>,
    pub nodal: Vec<NodalRow<f64>>,
    /// Annulus masses per completed level, or the reason they are missing.
    pub vanishing: Option<std::result::Result<Vec<f64>, String>>,
    pub failure: Option<LevelFailure>,
    pub summary: Summary,
}

impl RunArtifacts {
    pub fn info(&self) -> RunInfo {
        RunInfo {
            levels_requested: self.config.levels,
            levels_completed: self.levels.len(),
            theta: self.theta,
            margin_scale: self.config.schedule.margin_scale,
            frostman_d: self.frostman.as_ref().map(|f| f.d),
            frostman_estimated: self.frostman.as_ref().map(|f| f.estimated),
            frostman_c: self.frostman.as_ref().map(|f| f.c),
            annulus: self.config.report.annulus.is_some(),
            failure: self.failure.as_ref().map(|f| format!("level {} ({}): {}", f.level, f.stage, f.message)),
        }
    }
}

const DECAY_BINS: usize = 100;

fn solver_settings(c: &SolverConfig) -> SolverSettings<f64> {
    SolverSettings {
        tol: c.tol,
        max_newton: c.max_newton,
        kappa: c.kappa,
        h_max: c.h_max,
        initial: InitialGuess::Profile,
        ..SolverSettings::default()
    }
}

fn frostman_probes(c: &RunConfig) -> Probes<f64> {
    if c.report.random_probes == 0 {
        return Probes::Auto;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let extra = (0..c.report.random_probes)
        .map(|_| {
            let rho = rng.gen::<f64>().sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            Point::new(rho * phi.cos(), rho * phi.sin())
        })
        .collect();
    Probes::Augmented(extra)
}

/// Bins the decay samples by abscissa and averages each bin.
fn bin_series(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(x, _)| (a.min(x), b.max(x)));
    if samples.is_empty() || !(hi > lo) {
        return samples.iter().take(1).copied().collect();
    }
    let width = (hi - lo) / DECAY_BINS as f64;
    let mut acc = vec![(0.0, 0.0, 0usize); DECAY_BINS];
    for &(x, y) in samples {
        let b = (((x - lo) / width) as usize).min(DECAY_BINS - 1);
        acc[b].0 += x;
        acc[b].1 += y;
        acc[b].2 += 1;
    }
    acc.into_iter().filter(|a| a.2 > 0).map(|(x, y, n)| (x / n as f64, y / n as f64)).collect()
}

fn fail(level: usize, stage: &'static str, e: Error) -> LevelFailure {
    LevelFailure { level, stage, message: e.to_string() }
}

/// Approximations and strengths for every level, before any solve.
#[derive(Clone, Debug)]
pub struct Plan {
    pub measure: MeasureSpec,
    pub target: DiskMeasure<f64>,
    /// One per scheduled level.
    pub approxes: Vec<DiracApproximation<f64>>,
    pub theta: f64,
    pub frostman: Option<FrostmanInfo>,
    pub schedule: ScheduleParams<f64>,
    pub failure: Option<LevelFailure>,
}

/// Builds the target, its Dirac approximations, `F` and the strengths `r_n`.
pub fn plan(config: &RunConfig) -> Result<Plan> {
    config.validate()?;
    let measure = config.measure_spec()?;
    let target: DiskMeasure<f64> = measure.build()?;
    let mut failure = None;

    let mut approxes = Vec::new();
    for n in 1..=config.levels {
        match dirac_approximate(&target, config.cell_radii.radius(n), config.denominator_cap) {
            Ok(a) => approxes.push(a),
            Err(e) => {
                failure = Some(fail(n, "approximation", e));
                break;
            }
        }
    }
    let pairs: Vec<(u64, f64)> = approxes.iter().map(|a| (a.n_total, a.epsilon)).collect();
    let (f, theta, frostman) = if config.frostman.enabled {
        let (d, estimated) = match config.frostman.d {
            Some(d) => (d, false),
            None => {
                let r = &config.report;
                let radii = geometric_radii(r.frostman_start, r.frostman_ratio, r.frostman_count);
                (estimate_frostman(&target, &radii, &frostman_probes(config))?.d_hat, true)
            }
        };
        let theta = theta_exponent(d)?;
        let c = match config.frostman.c {
            Some(c) => c,
            // Largest C with F(N_n) ≤ ε_n on every level.
            None => pairs.iter().map(|&(n, e)| e * (n as f64).powf(1.0 / d)).fold(f64::INFINITY, f64::min),
        };
        let c = if c.is_finite() { c } else { 1.0 };
        (Some(DecayFunction::Frostman(FrostmanF::new(d, c)?)), theta, Some(FrostmanInfo { d, estimated, c }))
    } else {
        let f = if pairs.is_empty() { None } else { Some(DecayFunction::Interpolated(InterpolatedF::new(&pairs)?)) };
        (f, 0.25, None)
    };

    let mut schedule = ScheduleParams {
        entries: Vec::new(),
        theta,
        frostman_d: frostman.as_ref().map(|f| f.d),
        margin_scale: config.schedule.margin_scale,
    };
    if let Some(f) = &f {
        for (k, a) in approxes.iter().enumerate() {
            let n = k + 1;
            let f_value = f.eval(a.n_total as f64);
            let selected = match select_r(a.n_total, f_value, schedule.margin(n)) {
                Ok(r) => r,
                Err(e) => {
                    failure = Some(fail(n, "schedule", e));
                    break;
                }
            };
            // Strengths at least double so that r_n is strictly increasing.
            let floor = schedule.entries.last().map_or(config.schedule.r_min, |prev: &ScheduleEntry<f64>| 2.0 * prev.r);
            let r = selected.max(floor);
            if r > config.schedule.r_cap {
                let e = Error::ScheduleOverflow { n_vortices: a.n_total, margin: schedule.margin(n) };
                failure = Some(LevelFailure {
                    level: n,
                    stage: "schedule",
                    message: format!("r = {r} exceeds cap {}: {e}", config.schedule.r_cap),
                });
                break;
            }
            schedule.entries.push(ScheduleEntry { n, n_vortices: a.n_total, epsilon: a.epsilon, f_value, r });
        }
    }
    approxes.truncate(schedule.entries.len());
    Ok(Plan { measure, target, approxes, theta, frostman, schedule, failure })
}

/// Runs every stage. Module errors at level `k` stop the run there and keep
/// levels `1..k`; errors that concern the whole run are returned directly.
pub fn run_pipeline(config: &RunConfig) -> Result<RunArtifacts> {
    let Plan { measure, target, approxes, theta, frostman, schedule, mut failure } = plan(config)?;
    let schedule_report = verify_schedule(&schedule);

    let target_w1 = target.clone();
    let settings = solver_settings(&config.solver);
    let report_settings = ReportSettings {
        w1_cap: config.report.w1_cap,
        resolution: config.report.resolution,
        ball_constant: config.report.ball_constant,
    };
    let mut levels = Vec::new();
    for (entry, approx) in schedule.entries.iter().zip(&approxes) {
        match run_level(config, entry, approx, &target_w1, theta, &settings, &report_settings) {
            Ok(l) => levels.push(l),
            Err((stage, e)) => {
                failure = Some(fail(entry.n, stage, e));
                break;
            }
        }
    }

    let lifts: Vec<FlowBoxSolution<f64>> = levels.iter().map(|l| l.lift.clone()).collect();
    let nodal = nodal_set_diagnostics(&lifts, config.report.nodal_theta, config.report.nodal_constant)?;
    let vanishing = config.report.annulus.as_ref().map(|a| {
        let region = Region::Annulus { center: Point::from_array(a.center), inner: a.inner, outer: a.outer };
        let fields: Vec<_> = levels.iter().map(|l| l.lift.base.clone()).collect();
        vanishing_mass_check(&fields, &region).map_err(|e| e.to_string())
    });

    let mut run = RunArtifacts {
        config: config.clone(),
        measure,
        theta,
        frostman,
        schedule,
        schedule_report,
        levels,
        nodal,
        vanishing,
        failure,
        summary: Summary::default(),
    };
    run.summary = Summary::from_tables(&Tables::from_run(&run));
    Ok(run)
}

fn run_level(
    config: &RunConfig,
    entry: &ScheduleEntry<f64>,
    approx: &DiracApproximation<f64>,
    target: &DiskMeasure<f64>,
    theta: f64,
    settings: &SolverSettings<f64>,
    report: &ReportSettings<f64>,
) -> std::result::Result<LevelArtifacts, (&'static str, Error)> {
    let zeros = ZeroConfig::new(approx.points.clone(), approx.multiplicities.clone()).map_err(|e| ("solve", e))?;
    let grid = settings.grid_for(entry.r).map_err(|e| ("solve", e))?;
    let field = solve_vortex(&zeros, entry.r, &grid, settings).map_err(|e| ("solve", e))?;
    let row = report_row(target, theta, entry.n, &field, approx, report).map_err(|e| ("report", e))?;
    let mut samples = Vec::new();
    decay_fit_with_samples(&field, |x, y| samples.push((x, y))).map_err(|e| ("report", e))?;
    let [t1, t2] = config.report.theta_pair;
    let theta_gap = theta_distance(&field, t1, t2).map_err(|e| ("report", e))?;
    let lift = lift_to_flowbox(field);
    let mut identities = curvature_residual(&lift).map_err(|e| ("identities", e))?;
    identities.push(albe_identity_residual(&lift).map_err(|e| ("identities", e))?);
    let apriori = apriori_check(&lift);
    let scan = max_principle_scan(&lift, entry.r.powf(-0.25), config.report.c0).map_err(|e| ("identities", e))?;
    Ok(LevelArtifacts {
        level: entry.n,
        approx: approx.clone(),
        lift,
        row,
        identities,
        apriori,
        scan,
        theta_gap,
        decay_series: bin_series(&samples),
    })
}
