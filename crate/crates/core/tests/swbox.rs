use vortexlab::concentrate::{sigma_measure, sublevel_set, LevelSetKind};
use vortexlab::geometry::Point;
use vortexlab::swbox::*;
use vortexlab::vortex::*;

fn p(x: f64, y: f64) -> Point<f64> {
    Point::new(x, y)
}

fn solve(zeros: &ZeroConfig<f64>, r: f64) -> VortexField<f64> {
    let settings = SolverSettings::default();
    let grid = settings.grid_for(r).unwrap();
    solve_vortex(zeros, r, &grid, &settings).unwrap()
}

fn single(r: f64) -> VortexField<f64> {
    solve(&ZeroConfig::single(p(0.0, 0.0), 1).unwrap(), r)
}

/// One vortex at `r = 16` on three nested grids with the zero kept off-node.
fn nested_lifts() -> Vec<FlowBoxSolution<f64>> {
    let h0 = 0.0625;
    let settings = SolverSettings { h_max: h0, ..SolverSettings::default() };
    let base = GridSpec::new(4.0, h0, Point::origin()).unwrap();
    let zeros = ZeroConfig::single(p(h0 / 3.0, h0 / 3.0), 1).unwrap();
    [1, 2, 4]
        .iter()
        .map(|&k| {
            let f = solve_vortex(&zeros, 16.0, &base.refined(k), &settings).unwrap();
            assert_eq!(f.zeros, zeros);
            lift_to_flowbox(f)
        })
        .collect()
}

#[test]
fn lift_carries_the_vortex_energy() {
    let f = single(64.0);
    let e = total_energy(&f);
    let s = lift_to_flowbox(f);
    assert_eq!(s.energy_3d, e);
    assert_eq!(s.beta(), 0.0);
    assert_eq!(s.a_t(), 0.0);
    // The slice measure integrates back to E over the unit fibre.
    let sigma = sigma_measure(&s.base).unwrap();
    assert!(sigma.total_mass() <= 1.0 + 1e-12);
}

#[test]
fn empty_lift_is_trivial() {
    let s = lift_to_flowbox(solve(&ZeroConfig::empty(), 16.0));
    assert_eq!(s.energy_3d, 0.0);
    assert!((0..s.base.grid.side()).all(|i| s.alpha_sq(i, i) == 1.0));
    let albe = albe_identity_residual(&s).unwrap();
    assert_eq!((albe.sup_residual, albe.l2_residual), (0.0, 0.0));
    let scan = max_principle_scan(&s, 0.5, 8.0).unwrap();
    assert!(scan.minima.is_empty());
}

#[test]
fn curvature_line_one_delegates_and_others_vanish() {
    let s = lift_to_flowbox(single(16.0));
    let reports = curvature_residual(&s).unwrap();
    let h = s.base.grid.spacing;
    assert_eq!(pde_residual(&s.base, 2.0 * h).unwrap(), (reports[0].sup_residual, reports[0].l2_residual));
    for r in &reports[1..] {
        assert_eq!((r.sup_residual, r.l2_residual), (0.0, 0.0));
    }
}

#[test]
fn identities_converge_at_second_order() {
    let lifts = nested_lifts();
    let exclusion = 2.0 * lifts[0].base.grid.spacing;
    let albe: Vec<_> = lifts.iter().map(|s| albe_identity_residual_with(s, exclusion).unwrap()).collect();
    let albe = with_refinement(albe).unwrap();
    let slope = albe[0].refinement_slope.unwrap();
    assert!((1.7..=2.3).contains(&slope), "albe slope {slope}: {albe:?}");
    assert!(albe[2].sup_residual <= 1e-2 * 16.0);
    let curv: Vec<_> = lifts.iter().map(|s| curvature_residual_with(s, exclusion).unwrap().remove(0)).collect();
    let curv = with_refinement(curv).unwrap();
    let slope = curv[0].refinement_slope.unwrap();
    assert!((1.7..=2.3).contains(&slope), "curvature slope {slope}: {curv:?}");
}

#[test]
fn albe_residual_is_reflection_invariant() {
    let zeros = ZeroConfig::new(vec![p(-0.31, 0.12), p(0.27, -0.2)], vec![1, 1]).unwrap();
    let a = albe_identity_residual(&lift_to_flowbox(solve(&zeros, 16.0))).unwrap();
    let b = albe_identity_residual(&lift_to_flowbox(solve(&zeros.reflected_x(), 16.0))).unwrap();
    assert!((a.sup_residual - b.sup_residual).abs() <= 1e-9 * a.sup_residual.max(1.0));
}

#[test]
fn apriori_bounds() {
    let ratios: Vec<f64> = [16.0, 64.0, 256.0]
        .iter()
        .map(|&r| {
            let b = apriori_check(&lift_to_flowbox(single(r)));
            assert_eq!(b.parallel_gradient, 0.0);
            // Nonpositive up to rounding in the far field.
            assert!(b.negative_part <= 1e-12, "r = {r}: {b:?}");
            b.transverse_ratio
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo <= 2.0, "{ratios:?}");
}

#[test]
fn dichotomy_has_no_violations() {
    let configs = [
        ZeroConfig::single(p(0.0, 0.0), 1).unwrap(),
        ZeroConfig::new(vec![p(-0.4, 0.1), p(0.35, -0.2)], vec![1, 2]).unwrap(),
        ZeroConfig::new(vec![p(-0.5, 0.0), p(0.5, 0.05), p(0.0, 0.6)], vec![1, 1, 1]).unwrap(),
    ];
    for zeros in &configs {
        for r in [64.0, 256.0] {
            let s = lift_to_flowbox(solve(zeros, r));
            let scan = max_principle_scan(&s, r.powf(-0.25), 8.0).unwrap();
            assert_eq!(scan.violations, 0, "{:?}", scan.minima);
            assert!((scan.eta - 2.0 / r.sqrt()).abs() < 1e-12);
            assert!(scan.near_zero >= zeros.len(), "{:?}", scan.minima);
            let mut csv = Vec::new();
            scan.write_csv(&mut csv).unwrap();
            let text = String::from_utf8(csv).unwrap();
            assert!(text.starts_with("t,x,y,e^u,class\n"));
            assert_eq!(text.lines().count(), scan.minima.len() + 1);
        }
    }
}

#[test]
fn nodal_sets_shrink_onto_the_zeros() {
    let zeros = ZeroConfig::new(vec![p(-0.3, 0.1), p(0.4, -0.1)], vec![1, 1]).unwrap();
    let seq: Vec<_> = [64.0, 256.0, 1024.0].iter().map(|&r| lift_to_flowbox(solve(&zeros, r))).collect();
    let rows = nodal_set_diagnostics(&seq, 0.5, 1.0).unwrap();
    assert!(rows.iter().all(|r| !r.empty_level));
    for w in rows.windows(2) {
        assert!(w[1].to_near_zero.unwrap() < w[0].to_near_zero.unwrap(), "{rows:?}");
        assert!(w[1].to_zeros.unwrap() < w[0].to_zeros.unwrap(), "{rows:?}");
    }
    let last = rows.last().unwrap();
    let radius = 2.0 / 1024f64.sqrt();
    assert!(last.to_zeros.unwrap() <= 4.0 * radius, "{rows:?}");
    let gaps: Vec<f64> = seq.iter().map(|s| theta_distance(&s.base, 0.3, 0.7).unwrap().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(*gaps.last().unwrap() <= 4.0 * radius);
    // Slices are identical, so every Z set is t-invariant by construction.
    let z = sublevel_set(&seq[0].base, LevelSetKind::ZTheta(0.5)).unwrap();
    assert!(!z.is_empty());
}
