//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use vortexlab::concentrate::{component_radius_check, decay_fit};
use vortexlab::geometry::Point;
use vortexlab::measure::{estimate_frostman, geometric_radii, DiskMeasure, Probes};
use vortexlab::pipeline::{export, parse_config, run_pipeline, RunArtifacts};
use vortexlab::schedule::theta_exponent;
use vortexlab::swbox::{albe_identity_residual_with, lift_to_flowbox, with_refinement};
use vortexlab::vortex::{solve_radial, solve_vortex, total_energy, GridSpec, SolverSettings, VortexField, ZeroConfig};

const CONFIGS: [(&str, &str); 5] = [
    ("single-atom", include_str!("../../../configs/single_atom.json")),
    ("two-atoms", include_str!("../../../configs/two_atoms.json")),
    ("uniform-disk", include_str!("../../../configs/uniform_disk.json")),
    ("uniform-segment", include_str!("../../../configs/uniform_segment.json")),
    ("cantor", include_str!("../../../configs/cantor.json")),
];

fn p(x: f64, y: f64) -> Point<f64> {
    Point::new(x, y)
}

fn solve(zeros: &ZeroConfig<f64>, r: f64) -> (VortexField<f64>, Duration) {
    let settings = SolverSettings::default();
    let grid = settings.grid_for(r).unwrap();
    let t = Instant::now();
    let f = solve_vortex(zeros, r, &grid, &settings).unwrap();
    (f, t.elapsed())
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn factor_two(a: f64, b: f64) -> bool {
    a > 0.0 && b > 0.0 && a / b <= 2.0 && b / a <= 2.0
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn energy_quantization() -> Outcome {
    let configs = [
        ZeroConfig::single(p(0.1, 0.05), 1).unwrap(),
        ZeroConfig::new(vec![p(-0.3, 0.0), p(0.35, 0.1)], vec![1, 1]).unwrap(),
        ZeroConfig::new(vec![p(-0.3, -0.2), p(0.3, -0.2), p(0.0, 0.32)], vec![1, 1, 1]).unwrap(),
        ZeroConfig::new(vec![p(-0.25, 0.0), p(0.3, 0.1)], vec![2, 1]).unwrap(),
    ];
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    for zeros in &configs {
        for r in [16.0, 64.0, 256.0] {
            let (f, dt) = solve(zeros, r);
            let n = zeros.degree() as f64;
            worst = worst.max((total_energy(&f) - 2.0 * PI * n).abs() / (2.0 * PI * n));
            slowest = slowest.max(dt);
        }
    }
    outcome(
        worst <= 0.01 && slowest <= Duration::from_secs(120),
        format!("max relative error {worst:.2e}, slowest solve {:.1}s", slowest.as_secs_f64()),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for m in [1u64, 2] {
        for r in [1.0, 16.0] {
            let (f, _) = solve(&ZeroConfig::single(p(0.0, 0.0), m).unwrap(), r);
            let radial = solve_radial(m, r, f.grid.half_width.max(20.0 / f64::sqrt(r))).unwrap();
            let z = f.zeros.points[0];
            let reach = 0.9 * f.grid.half_width;
            let (mut diff, mut scale) = (0.0f64, 0.0f64);
            for k in 1..=400 {
                let rho = reach * k as f64 / 400.0;
                let a = -f.u_at(z + p(rho, 0.0)).unwrap().exp_m1();
                let b = -radial.u_at(rho).exp_m1();
                diff = diff.max((a - b).abs());
                scale = scale.max(b.abs());
            }
            worst = worst.max(diff / scale);
        }
    }
    outcome(worst <= 0.02, format!("max sup-relative error {worst:.2e}"))
}

fn identity_exactness() -> Outcome {
    let r = 16.0;
    let h0 = 0.0625;
    let settings = SolverSettings { h_max: h0, ..SolverSettings::default() };
    let base = GridSpec::new(4.0, h0, Point::origin()).unwrap();
    let zeros = ZeroConfig::single(p(h0 / 3.0, h0 / 3.0), 1).unwrap();
    let reports: Vec<_> = [1, 2, 4]
        .iter()
        .map(|&k| {
            let s = lift_to_flowbox(solve_vortex(&zeros, r, &base.refined(k), &settings).unwrap());
            albe_identity_residual_with(&s, 2.0 * h0).unwrap()
        })
        .collect();
    let reports = with_refinement(reports).unwrap();
    let slope = reports[0].refinement_slope.unwrap();
    let last = reports[2].sup_residual;
    outcome(
        (1.7..=2.3).contains(&slope) && last <= 1e-2 * r,
        format!("order {slope:.3}, final sup residual {last:.3e} (limit {:.2})", 1e-2 * r),
    )
}

struct Runs {
    runs: Vec<(&'static str, RunArtifacts)>,
    identical: Vec<(&'static str, bool)>,
}

fn run_configs() -> Runs {
    let mut runs = Vec::new();
    let mut identical = Vec::new();
    for (name, text) in CONFIGS {
        let cfg = parse_config(text).unwrap();
        let a = run_pipeline(&cfg).unwrap();
        let b = run_pipeline(&cfg).unwrap();
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        export(&a, da.path()).unwrap();
        export(&b, db.path()).unwrap();
        let read = |d: &tempfile::TempDir| fs::read(d.path().join("manifest.json")).unwrap();
        identical.push((name, read(&da) == read(&db)));
        runs.push((name, a));
    }
    Runs { runs, identical }
}

fn weak_convergence(runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, run) in &runs.runs {
        let w1: Vec<f64> = run.levels.iter().map(|l| l.row.w1_target).collect();
        let last = run.levels.last().map(|l| l.row);
        let final_ok = last.is_some_and(|r| r.w1_diracs <= 3.0 * r.n_vortices as f64 / r.r.sqrt());
        let good = run.failure.is_none() && w1.len() >= 3 && strictly_decreasing(&w1) && final_ok;
        ok &= good;
        parts.push(format!("{name} {}", w1.iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>().join(">")));
    }
    outcome(ok, parts.join("; "))
}

fn energy_ratio(runs: &Runs) -> Outcome {
    let ratios: Vec<f64> = runs.runs.iter().flat_map(|(_, r)| r.levels.iter().map(|l| l.row.energy_ratio)).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    outcome(
        !ratios.is_empty() && lo >= 0.99 && hi <= 1.01,
        format!("range [{lo:.5}, {hi:.5}] over {} levels", ratios.len()),
    )
}

fn energy_growth(runs: &Runs) -> Outcome {
    let (_, run) = runs.runs.iter().find(|(n, _)| *n == "uniform-segment").unwrap();
    let d = run.frostman.as_ref().map(|f| f.d).unwrap_or(f64::NAN);
    let theta_ok = run.theta == theta_exponent(d).unwrap() && run.theta == (0.25f64).min(d / (2.0 * (d + 1.0)));
    let growth: Vec<f64> = run.levels.iter().map(|l| l.row.energy_growth).collect();
    outcome(
        theta_ok && growth.len() >= 3 && strictly_decreasing(&growth),
        format!("d = {d}, theta = {}, E r^-theta {growth:.3?}", run.theta),
    )
}

fn frostman_estimator() -> Outcome {
    let cases: [(&str, DiskMeasure<f64>, Vec<f64>, f64); 3] = [
        ("disk", DiskMeasure::uniform_disk(), geometric_radii(0.4, 0.5, 5), 2.0),
        (
            "segment",
            DiskMeasure::uniform_segment(p(-0.8, 0.0), p(0.8, 0.0)).unwrap(),
            geometric_radii(0.4, 0.5, 5),
            1.0,
        ),
        (
            "cantor",
            DiskMeasure::cantor(1.0 / 3.0, 6, p(-1.0, 0.0), p(1.0, 0.0)).unwrap(),
            geometric_radii(0.3, 1.0 / 3.0, 4),
            2f64.ln() / 3f64.ln(),
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m, radii, expected) in cases {
        let t = Instant::now();
        let est = estimate_frostman(&m, &radii, &Probes::Auto).unwrap();
        let dt = t.elapsed();
        ok &= (est.d_hat - expected).abs() <= 0.15 && dt <= Duration::from_secs(30);
        parts.push(format!("{name} {:.3} (want {expected:.3}, {:.2}s)", est.d_hat, dt.as_secs_f64()));
    }
    outcome(ok, parts.join("; "))
}

fn single_vortices() -> [VortexField<f64>; 2] {
    let zeros = ZeroConfig::single(p(0.0, 0.0), 1).unwrap();
    [solve(&zeros, 64.0).0, solve(&zeros, 256.0).0]
}

fn localization(fields: &[VortexField<f64>; 2]) -> Outcome {
    let checks: Vec<_> = fields.iter().map(component_radius_check).collect();
    match (&checks[0], &checks[1]) {
        (Ok(a), Ok(b)) if a.len() == 1 && b.len() == 1 => {
            let (x, y) = (a[0].ratio, b[0].ratio);
            outcome(factor_two(x, y), format!("radius*sqrt(r)/N = {x:.3} (r=64), {y:.3} (r=256)"))
        }
        other => outcome(false, format!("{other:?}")),
    }
}

fn exponential_decay(fields: &[VortexField<f64>; 2]) -> Outcome {
    match (decay_fit(&fields[0]), decay_fit(&fields[1])) {
        (Ok(a), Ok(b)) => outcome(
            a.c_hat > 0.0 && b.c_hat > 0.0 && a.r2 >= 0.9 && b.r2 >= 0.9 && factor_two(a.c_hat, b.c_hat),
            format!("c_hat {:.3}/{:.3}, r2 {:.4}/{:.4}", a.c_hat, b.c_hat, a.r2, b.r2),
        ),
        (a, b) => outcome(false, format!("{a:?} {b:?}")),
    }
}

fn dichotomy(runs: &Runs) -> Outcome {
    let (mut minima, mut violations) = (0usize, 0usize);
    for (_, run) in &runs.runs {
        for l in &run.levels {
            minima += l.scan.minima.len();
            violations += l.scan.violations;
        }
    }
    outcome(violations == 0 && minima > 0, format!("{minima} local minima, {violations} violations"))
}

fn vanishing_mass(runs: &Runs) -> Outcome {
    let (_, run) = runs.runs.iter().find(|(n, _)| *n == "single-atom").unwrap();
    match &run.vanishing {
        Some(Ok(m)) => outcome(
            m.len() >= 3 && strictly_decreasing(m) && m[m.len() - 1] <= 1e-3,
            format!("annulus masses {}", m.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")),
        ),
        other => outcome(false, format!("{other:?}")),
    }
}

fn theta_independence(runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, run) in &runs.runs {
        let gaps: Option<Vec<f64>> = run.levels.iter().map(|l| l.theta_gap).collect();
        let good = match (&gaps, run.levels.last()) {
            (Some(g), Some(l)) => {
                strictly_decreasing(g) && g[g.len() - 1] <= 4.0 * l.row.n_vortices as f64 / l.row.r.sqrt()
            }
            _ => false,
        };
        ok &= good;
        parts.push(format!("{name} final {:.4}", gaps.as_ref().and_then(|g| g.last().copied()).unwrap_or(f64::NAN)));
    }
    outcome(ok, parts.join("; "))
}

fn determinism(runs: &Runs) -> Outcome {
    let same = runs.identical.iter().filter(|(_, s)| *s).count();
    outcome(same == runs.identical.len(), format!("{same}/{} configs byte-identical", runs.identical.len()))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |k: usize, name: &str, o: Outcome| {
        if !o.ok {
            failures += 1;
        }
        println!("{} {k:>2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "energy quantization", energy_quantization());
    report(2, "oracle equivalence", oracle_equivalence());
    report(3, "identity exactness", identity_exactness());
    let runs = run_configs();
    report(4, "weak convergence", weak_convergence(&runs));
    report(5, "energy/degree ratio", energy_ratio(&runs));
    report(6, "energy growth exponent", energy_growth(&runs));
    report(7, "Frostman estimator", frostman_estimator());
    let fields = single_vortices();
    report(8, "localization", localization(&fields));
    report(9, "exponential decay", exponential_decay(&fields));
    report(10, "maximum-principle dichotomy", dichotomy(&runs));
    report(11, "vanishing mass", vanishing_mass(&runs));
    report(12, "nodal-set theta-independence", theta_independence(&runs));
    report(13, "determinism", determinism(&runs));
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
