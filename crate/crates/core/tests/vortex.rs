use std::f64::consts::PI;

use vortexlab::geometry::Point;
use vortexlab::vortex::*;
use vortexlab::Error;

fn p(x: f64, y: f64) -> Point<f64> {
    Point::new(x, y)
}

fn solve_with(zeros: &ZeroConfig<f64>, r: f64, settings: &SolverSettings<f64>) -> VortexField<f64> {
    let grid = settings.grid_for(r).unwrap();
    solve_vortex(zeros, r, &grid, settings).unwrap()
}

fn solve(zeros: &ZeroConfig<f64>, r: f64) -> VortexField<f64> {
    solve_with(zeros, r, &SolverSettings::default())
}

fn single(m: u64) -> ZeroConfig<f64> {
    ZeroConfig::single(p(0.0, 0.0), m).unwrap()
}

#[test]
fn empty_zero_set_is_trivial() {
    let f = solve(&ZeroConfig::empty(), 16.0);
    assert!(f.u.iter().all(|&u| u == 0.0));
    assert_eq!(total_energy(&f), 0.0);
    assert_eq!(pde_residual(&f, 0.5).unwrap(), (0.0, 0.0));
    assert_eq!(sup_gradient_ratio(&f), 0.0);
}

#[test]
fn under_resolved_grid_is_rejected() {
    let settings = SolverSettings::default();
    let coarse = settings.grid_for(16.0).unwrap();
    assert!(matches!(solve_vortex(&single(1), 256.0, &coarse, &settings), Err(Error::UnderResolved(_))));
    let small = GridSpec::new(1.2, coarse.spacing, Point::origin()).unwrap();
    assert!(matches!(solve_vortex(&single(1), 16.0, &small, &settings), Err(Error::UnderResolved(_))));
}

#[test]
fn single_vortex_matches_radial_oracle() {
    for (m, r) in [(1u64, 1.0), (1, 16.0), (2, 1.0), (2, 16.0)] {
        let f = solve(&single(m), r);
        let radial = solve_radial(m, r, f.grid.half_width.max(20.0 / r.sqrt())).unwrap();
        let z = f.zeros.points[0];
        let (mut sup_diff, mut sup_ref) = (0.0f64, 0.0f64);
        let reach = f.grid.half_width * 0.9;
        for k in 1..=400 {
            let rho = reach * k as f64 / 400.0;
            let a = -f.u_at(z + p(rho, 0.0)).unwrap().exp_m1();
            let b = -radial.u_at(rho).exp_m1();
            sup_diff = sup_diff.max((a - b).abs());
            sup_ref = sup_ref.max(b.abs());
        }
        assert!(sup_diff / sup_ref <= 0.02, "m={m} r={r}: {}", sup_diff / sup_ref);
        assert!((total_energy(&f) / (2.0 * PI * m as f64) - 1.0).abs() <= 0.01);
        assert!(f.u.iter().all(|&u| u <= SolverSettings::<f64>::default().tol));
    }
}

#[test]
fn two_vortices_energy_is_additive() {
    let zeros = ZeroConfig::new(vec![p(-0.3, 0.0), p(0.3, 0.0)], vec![1, 1]).unwrap();
    let f = solve(&zeros, 64.0);
    assert!((total_energy(&f) / (4.0 * PI) - 1.0).abs() <= 0.01);
}

#[test]
fn newton_residual_is_monotone_from_zero_guess() {
    let settings = SolverSettings { initial: InitialGuess::Zero, ..SolverSettings::default() };
    let zeros = ZeroConfig::new(vec![p(-0.2, 0.1), p(0.35, -0.2)], vec![1, 2]).unwrap();
    let f = solve_with(&zeros, 16.0, &settings);
    let hist = &f.convergence.history;
    assert!(hist.len() >= 2);
    assert!(hist.windows(2).all(|w| w[1] <= w[0]), "{hist:?}");
    assert!(f.convergence.residual <= settings.tol);
}

#[test]
fn residual_converges_at_second_order() {
    let settings = SolverSettings { h_max: 0.08, ..SolverSettings::default() };
    let h0 = 0.08;
    let base = GridSpec::new(11.52, h0, Point::origin()).unwrap();
    let zeros = ZeroConfig::single(p(h0 / 3.0, h0 / 3.0), 1).unwrap();
    let mut sups = Vec::new();
    for factor in [1, 2, 4] {
        let g = base.refined(factor);
        let f = solve_vortex(&zeros, 1.0, &g, &settings).unwrap();
        assert_eq!(f.zeros, zeros, "zero must not be snapped");
        sups.push(pde_residual(&f, 0.5).unwrap());
    }
    for w in sups.windows(2) {
        assert!(w[0].0 / w[1].0 >= 3.0, "{sups:?}");
        assert!(w[0].1 / w[1].1 >= 3.0, "{sups:?}");
    }
}

#[test]
fn residual_is_insensitive_to_grid_registration() {
    let settings = SolverSettings::default();
    let zeros = ZeroConfig::single(p(0.1, 0.05), 1).unwrap();
    let g = settings.grid_for(16.0).unwrap();
    let a = solve_vortex(&zeros, 16.0, &g, &settings).unwrap();
    let half = g.spacing / 2.0;
    let b = solve_vortex(&zeros, 16.0, &g.shifted(p(half, half)), &settings).unwrap();
    let ra = pde_residual(&a, 0.3).unwrap();
    let rb = pde_residual(&b, 0.3).unwrap();
    assert!((ra.0 / rb.0 - 1.0).abs() <= 0.1, "{ra:?} {rb:?}");
    assert!((ra.1 / rb.1 - 1.0).abs() <= 0.1, "{ra:?} {rb:?}");
}

#[test]
fn gradient_ratio_scales_like_sqrt_r() {
    let ratios: Vec<f64> = [16.0, 64.0, 256.0].iter().map(|&r| sup_gradient_ratio(&solve(&single(1), r))).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo <= 2.0, "{ratios:?}");
}

#[test]
fn reflection_leaves_gradient_ratio_unchanged() {
    let zeros = ZeroConfig::new(vec![p(-0.25, 0.15), p(0.3, 0.4)], vec![1, 1]).unwrap();
    let a = sup_gradient_ratio(&solve(&zeros, 16.0));
    let b = sup_gradient_ratio(&solve(&zeros.reflected_x(), 16.0));
    assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} {b}");
}

#[test]
fn translation_by_lattice_vector_translates_u() {
    let settings = SolverSettings::default();
    let zeros = ZeroConfig::single(p(0.11, -0.07), 1).unwrap();
    let g = settings.grid_for(16.0).unwrap();
    let a = solve_vortex(&zeros, 16.0, &g, &settings).unwrap();
    let shift = p(3.0 * g.spacing, -5.0 * g.spacing);
    let b = solve_vortex(&zeros.translated(shift), 16.0, &g.shifted(shift), &settings).unwrap();
    let diff = a.u.iter().zip(&b.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-8, "{diff}");
}

#[test]
fn scaling_law_relates_strengths() {
    // (P, r) and (P/√k, k r) agree after z ↦ z/√k.
    let zeros = ZeroConfig::new(vec![p(-0.413, 0.007), p(0.391, 0.213)], vec![1, 1]).unwrap();
    let k = 4.0f64;
    let a = solve(&zeros, 16.0);
    let b = solve(&zeros.scaled(1.0 / k.sqrt()), 16.0 * k);
    let (mut sup_diff, mut sup_ref) = (0.0f64, 0.0f64);
    for i in 0..=60 {
        for j in 0..=60 {
            let z = p(-1.5 + 0.05 * i as f64, -1.5 + 0.05 * j as f64);
            if zeros.points.iter().any(|&q| q.dist(z) < 1e-6) {
                continue;
            }
            let va = -a.u_at(z).unwrap().exp_m1();
            let vb = -b.u_at(z / k.sqrt()).unwrap().exp_m1();
            sup_diff = sup_diff.max((va - vb).abs());
            sup_ref = sup_ref.max(va.abs());
        }
    }
    assert!(sup_diff / sup_ref <= 0.02, "{}", sup_diff / sup_ref);
}

#[test]
fn outer_boundary_placement_bias_is_small() {
    let settings = SolverSettings::default();
    let zeros = ZeroConfig::new(vec![p(0.2, 0.1), p(-0.3, -0.2)], vec![1, 1]).unwrap();
    let g = settings.grid_for(16.0).unwrap();
    let wide = GridSpec::new(g.half_width + 0.5, g.spacing, Point::origin()).unwrap();
    let e1 = total_energy(&solve_vortex(&zeros, 16.0, &g, &settings).unwrap());
    let e2 = total_energy(&solve_vortex(&zeros, 16.0, &wide, &settings).unwrap());
    assert!((e1 / e2 - 1.0).abs() <= 2e-3, "{e1} {e2}");
}

#[test]
fn local_factor_is_positive_and_bounded() {
    let f = solve(&single(1), 1.0);
    let lf = local_factor_h(&f, 0, 0.2).unwrap();
    assert!(!lf.samples.is_empty());
    assert!(lf.samples.iter().all(|&(_, h)| h > 0.0));
    let (lo, hi) = lf.samples.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(_, h)| (a.min(h), b.max(h)));
    assert!(hi / lo <= 10.0, "{lo} {hi}");
    // Radial oracle: h(ρ) = e^{u(ρ)} / (r ρ²).
    let radial = solve_radial(1, 1.0, 20.0).unwrap();
    let z = f.zeros.points[0];
    for &(q, h) in lf.samples.iter().step_by(7) {
        let rho = q.dist(z);
        let expected = radial.u_at(rho).exp() / (rho * rho);
        assert!((h / expected - 1.0).abs() <= 0.02, "rho={rho} {h} {expected}");
    }
}

#[test]
fn local_factor_detects_overlap() {
    let zeros = ZeroConfig::new(vec![p(-0.1, 0.0), p(0.1, 0.0)], vec![1, 1]).unwrap();
    let f = solve(&zeros, 16.0);
    assert!(matches!(local_factor_h(&f, 0, 0.25), Err(Error::BallOverlap { index: 0 })));
    assert!(matches!(local_factor_h(&f, 0, 0.001), Err(Error::InvalidArgument(_))));
}

#[test]
fn field_dump_round_trips_bit_exactly() {
    let zeros = ZeroConfig::new(vec![p(0.2, -0.1), p(-0.4, 0.3)], vec![2, 1]).unwrap();
    let f = solve(&zeros, 16.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    write_field_file(&f, &path).unwrap();
    let g: VortexField<f64> = read_field_file(&path).unwrap();
    assert_eq!(g.grid, f.grid);
    assert_eq!(g.zeros, f.zeros);
    assert_eq!(g.r, f.r);
    assert!(g.u.iter().zip(&f.u).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(g.convergence.residual.to_bits(), f.convergence.residual.to_bits());
    let mut again = Vec::new();
    write_field(&g, &mut again).unwrap();
    assert_eq!(again, std::fs::read(&path).unwrap());
}

#[test]
fn field_dump_rejects_truncation() {
    let f = solve(&single(1), 16.0);
    let mut bytes = Vec::new();
    write_field(&f, &mut bytes).unwrap();
    bytes.truncate(bytes.len() / 2);
    assert!(matches!(read_field::<f64, _>(&bytes[..]), Err(Error::Parse { .. })));
}

#[test]
fn single_precision_solve_runs() {
    let settings = SolverSettings::<f32> { tol: 1e-3, ..SolverSettings::default() };
    let zeros = ZeroConfig::single(Point::new(0.0f32, 0.0), 1).unwrap();
    let f = solve_vortex(&zeros, 16.0f32, &settings.grid_for(16.0).unwrap(), &settings).unwrap();
    assert!((total_energy(&f) / (2.0 * std::f32::consts::PI) - 1.0).abs() <= 0.01);
}
