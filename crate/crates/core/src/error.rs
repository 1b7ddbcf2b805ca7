use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can signal.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient-scale-range: {0}")]
    InsufficientScaleRange(String),
    #[error("denominator-too-small: {kept} kept balls cannot all receive multiplicity >= 1 with N <= {cap}")]
    DenominatorTooSmall { kept: usize, cap: u64 },
    #[error("boundary-support: measure carries no mass at distance > {cell_radius} from the unit circle")]
    BoundarySupport { cell_radius: f64 },
    #[error("empty-approximation: no lattice ball captured positive mass")]
    EmptyApproximation,
    #[error("duplicate-point: ({x}, {y})")]
    DuplicatePoint { x: f64, y: f64 },
    #[error("outside-disk: point ({x}, {y}) is not inside the unit disk")]
    OutsideDisk { x: f64, y: f64 },
    #[error("unnormalized: total mass {mass} differs from 1")]
    Unnormalized { mass: f64 },
    #[error("invalid-dimension: {0}")]
    InvalidDimension(f64),
    #[error("invalid-epsilon: {0}")]
    InvalidEpsilon(f64),
    #[error("schedule-overflow: no admissible r below 2^120 (N = {n_vortices}, margin = {margin})")]
    ScheduleOverflow { n_vortices: u64, margin: f64 },
    #[error("schedule-exceeds-cap: level {level} needs r = {required} > cap {cap}")]
    ScheduleExceedsCap { level: usize, required: f64, cap: f64 },
    #[error("singular-point: evaluation at zero ({x}, {y})")]
    SingularPoint { x: f64, y: f64 },
    #[error("radial-diverged: {0}")]
    RadialDiverged(String),
    #[error("solver-diverged after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("linear solver failed to converge: {0}")]
    LinearSolver(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("ball-overlap: ball around zero {index} contains another zero")]
    BallOverlap { index: usize },
    #[error("zero-energy: field has no zeros")]
    ZeroEnergy,
    #[error("empty-set")]
    EmptySet,
    #[error("orphan-component: Omega^- component without a zero near ({x}, {y})")]
    OrphanComponent { x: f64, y: f64 },
    #[error("insufficient-samples: {found} eligible nodes (need {needed})")]
    InsufficientSamples { found: usize, needed: usize },
    #[error("region-overlap: region within {distance} of zero {index}")]
    RegionOverlap { index: usize, distance: f64 },
    #[error("sequence-mismatch: {0}")]
    SequenceMismatch(String),
    #[error("transport solver: {0}")]
    Transport(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration invalid:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One schema violation, located by JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {}: {}", if i.pointer.is_empty() { "/" } else { &i.pointer }, i.message))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse { context: context.into(), message: message.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
