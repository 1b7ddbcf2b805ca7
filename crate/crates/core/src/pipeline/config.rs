//! Run configuration: a strict JSON schema with defaults and range checks.
//!
//! ```json
//! {
//!   "measure": {"kind": "generator", "name": "uniform-disk"},
//!   "levels": 3,
//!   "cell_radii": {"geometric": {"first": 0.5, "ratio": 0.5}},
//!   "frostman": {"enabled": true, "d": 2.0}
//! }
//! ```
//! Every other key has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, Error, Result};
use crate::measure::spec::MeasureSpec;
use crate::measure::DEFAULT_SUPPORT_CAP;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline target measure; exclusive with `measure_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    /// Measure spec file, relative paths resolved against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_file: Option<PathBuf>,
    pub levels: usize,
    #[serde(default)]
    pub cell_radii: CellRadii,
    /// Largest admissible `N` per level.
    #[serde(default = "default_denominator_cap")]
    pub denominator_cap: u64,
    #[serde(default)]
    pub frostman: FrostmanConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Seeds the random Frostman probes.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CellRadii {
    /// `ε′_n = first · ratio^{n−1}`.
    Geometric { first: f64, ratio: f64 },
    /// One radius per level.
    Explicit(Vec<f64>),
}

impl Default for CellRadii {
    fn default() -> Self {
        CellRadii::Geometric { first: 0.5, ratio: 0.5 }
    }
}

impl CellRadii {
    pub fn radius(&self, level: usize) -> f64 {
        match self {
            CellRadii::Geometric { first, ratio } => first * ratio.powi(level as i32 - 1),
            CellRadii::Explicit(v) => v[level - 1],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrostmanConfig {
    /// Use `F(x) = C x^{−1/d}` instead of the interpolated `F`.
    #[serde(default)]
    pub enabled: bool,
    /// Dimension override; estimated from the target when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Constant override; by default the largest `C` with `F(N_n) ≤ ε_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Level `n` bounds each ratio by `margin_scale / n`.
    #[serde(default = "one")]
    pub margin_scale: f64,
    /// Lower bound on every `r_n`.
    #[serde(default = "two")]
    pub r_min: f64,
    /// Strengths above this abort the level.
    #[serde(default = "default_r_cap")]
    pub r_cap: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { margin_scale: 1.0, r_min: 2.0, r_cap: default_r_cap() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_newton")]
    pub max_newton: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kappa: default_kappa(), h_max: default_h_max(), tol: default_tol(), max_newton: default_max_newton() }
    }
}

/// Annulus `inner ≤ |z − center| ≤ outer` for the vanishing-mass check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub center: [f64; 2],
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_w1_cap")]
    pub w1_cap: usize,
    /// Sampling density for generator measures in W1.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// `C` in the local-factor ball radius `C N / √r`.
    #[serde(default = "one")]
    pub ball_constant: f64,
    /// Dichotomy constant of the maximum-principle scan.
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Level of `Z^θ` compared with the near-zero set.
    #[serde(default = "half")]
    pub nodal_theta: f64,
    /// `C` in the near-zero threshold `C max(r^{−1/4}, E r^{−1/2})`.
    #[serde(default = "one")]
    pub nodal_constant: f64,
    /// Pair of levels whose Hausdorff gap is tracked.
    #[serde(default = "default_theta_pair")]
    pub theta_pair: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus: Option<AnnulusConfig>,
    /// Largest radius of the Frostman ball scan.
    #[serde(default = "default_frostman_start")]
    pub frostman_start: f64,
    #[serde(default = "half")]
    pub frostman_ratio: f64,
    #[serde(default = "default_frostman_count")]
    pub frostman_count: usize,
    /// Seeded uniform probes added to the automatic Frostman probe set.
    #[serde(default = "default_random_probes")]
    pub random_probes: usize,
    /// Write full field dumps for every level.
    #[serde(default = "yes")]
    pub dump_fields: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("report defaults")
    }
}

fn default_denominator_cap() -> u64 {
    400
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn yes() -> bool {
    true
}
fn default_r_cap() -> f64 {
    16384.0
}
fn default_kappa() -> f64 {
    0.25
}
fn default_h_max() -> f64 {
    0.02
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_newton() -> usize {
    60
}
fn default_w1_cap() -> usize {
    DEFAULT_SUPPORT_CAP
}
fn default_resolution() -> usize {
    256
}
fn default_c0() -> f64 {
    8.0
}
fn default_theta_pair() -> [f64; 2] {
    [0.3, 0.7]
}
fn default_frostman_start() -> f64 {
    0.4
}
fn default_frostman_count() -> usize {
    5
}
fn default_random_probes() -> usize {
    64
}

/// Converts a serde path such as `report.theta_pair[1]` to `/report/theta_pair/1`.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn issue(pointer: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue { pointer: pointer.into(), message: message.into() }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = pointer(e.path());
        Error::Config(vec![issue(&at, e.into_inner().to_string())])
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_config(&text)?;
    if let (Some(file), Some(dir)) = (&config.measure_file, path.parent()) {
        if file.is_relative() {
            config.measure_file = Some(dir.join(file));
        }
    }
    Ok(config)
}

impl RunConfig {
    /// Minimal configuration with every default filled in.
    pub fn new(measure: MeasureSpec, levels: usize) -> Self {
        Self {
            measure: Some(measure),
            measure_file: None,
            levels,
            cell_radii: CellRadii::default(),
            denominator_cap: default_denominator_cap(),
            frostman: FrostmanConfig::default(),
            schedule: ScheduleConfig::default(),
            solver: SolverConfig::default(),
            report: ReportConfig::default(),
            output_dir: None,
            seed: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn measure_spec(&self) -> Result<MeasureSpec> {
        match (&self.measure, &self.measure_file) {
            (Some(m), None) => Ok(m.clone()),
            (None, Some(path)) => MeasureSpec::from_file(path),
            _ => Err(Error::Config(vec![issue("/measure", "exactly one of measure, measure_file is required")])),
        }
    }

    /// Collects every out-of-range value with its documented range.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, at: &str, msg: &str| {
            if !ok {
                issues.push(issue(at, msg));
            }
        };
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        check(
            self.measure.is_some() != self.measure_file.is_some(),
            "/measure",
            "exactly one of measure, measure_file is required",
        );
        check(self.levels >= 1, "/levels", "levels must be ≥ 1");
        match &self.cell_radii {
            CellRadii::Geometric { first, ratio } => {
                check(open_unit(*first), "/cell_radii/geometric/first", "must lie in (0, 1)");
                check(open_unit(*ratio), "/cell_radii/geometric/ratio", "must lie in (0, 1)");
            }
            CellRadii::Explicit(v) => {
                check(v.len() == self.levels, "/cell_radii/explicit", "needs one radius per level");
                for (k, &e) in v.iter().enumerate() {
                    check(open_unit(e), &format!("/cell_radii/explicit/{k}"), "must lie in (0, 1)");
                }
                check(v.windows(2).all(|w| w[1] < w[0]), "/cell_radii/explicit", "radii must be strictly decreasing");
            }
        }
        check(self.denominator_cap >= 1, "/denominator_cap", "must be ≥ 1");
        if let Some(d) = self.frostman.d {
            check(d > 0.0 && d <= 2.0, "/frostman/d", "must lie in (0, 2]");
        }
        if let Some(c) = self.frostman.c {
            check(c > 0.0 && c.is_finite(), "/frostman/c", "must be > 0");
        }
        check(
            self.schedule.margin_scale > 0.0 && self.schedule.margin_scale.is_finite(),
            "/schedule/margin_scale",
            "must be > 0",
        );
        check(
            self.schedule.r_min >= 2.0 && self.schedule.r_min <= self.schedule.r_cap,
            "/schedule/r_min",
            "must lie in [2, r_cap]",
        );
        check(
            self.schedule.r_cap >= 2.0 && self.schedule.r_cap <= 2f64.powi(20),
            "/schedule/r_cap",
            "must lie in [2, 2^20]",
        );
        let s = &self.solver;
        check(s.kappa > 0.0 && s.kappa <= 1.0, "/solver/kappa", "must lie in (0, 1]");
        check(s.h_max > 0.0 && s.h_max <= 0.25, "/solver/h_max", "must lie in (0, 0.25]");
        check(s.tol >= 1e-14 && s.tol <= 1e-2, "/solver/tol", "must lie in [1e-14, 1e-2]");
        check((1..=1000).contains(&s.max_newton), "/solver/max_newton", "must lie in [1, 1000]");
        let r = &self.report;
        check(r.w1_cap >= 1 && r.w1_cap <= 4000, "/report/w1_cap", "must lie in [1, 4000]");
        check(r.resolution >= 8 && r.resolution <= 4096, "/report/resolution", "must lie in [8, 4096]");
        check(r.ball_constant > 0.0 && r.ball_constant.is_finite(), "/report/ball_constant", "must be > 0");
        check(r.c0 > 0.0 && r.c0.is_finite(), "/report/c0", "must be > 0");
        check(open_unit(r.nodal_theta), "/report/nodal_theta", "must lie in (0, 1)");
        check(r.nodal_constant > 0.0 && r.nodal_constant.is_finite(), "/report/nodal_constant", "must be > 0");
        for (k, &t) in r.theta_pair.iter().enumerate() {
            check(open_unit(t), &format!("/report/theta_pair/{k}"), "must lie in (0, 1)");
        }
        if let Some(a) = &r.annulus {
            check(a.inner >= 0.0 && a.inner < a.outer, "/report/annulus", "needs 0 ≤ inner < outer");
        }
        check(open_unit(r.frostman_start), "/report/frostman_start", "must lie in (0, 1)");
        check(open_unit(r.frostman_ratio), "/report/frostman_ratio", "must lie in (0, 1)");
        check((2..=30).contains(&r.frostman_count), "/report/frostman_count", "must lie in [2, 30]");
        check(r.random_probes <= 100_000, "/report/random_probes", "must be ≤ 100000");
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}
