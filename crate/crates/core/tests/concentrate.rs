use proptest::prelude::*;

use vortexlab::concentrate::*;
use vortexlab::geometry::Point;
use vortexlab::vortex::*;
use vortexlab::Error;

fn p(x: f64, y: f64) -> Point<f64> {
    Point::new(x, y)
}

fn solve(zeros: &ZeroConfig<f64>, r: f64) -> VortexField<f64> {
    let settings = SolverSettings::default();
    let grid = settings.grid_for(r).unwrap();
    solve_vortex(zeros, r, &grid, &settings).unwrap()
}

fn single(m: u64, r: f64) -> VortexField<f64> {
    solve(&ZeroConfig::single(p(0.0, 0.0), m).unwrap(), r)
}

#[test]
fn sigma_concentrates_near_the_zero() {
    let f = single(1, 256.0);
    let sigma = sigma_measure(&f).unwrap();
    let z = f.zeros.points[0];
    assert!(sigma.ball_mass(z, 3.0 / 16.0) >= 0.5);
    assert!((sigma.total_mass() - 1.0).abs() <= 1e-3, "{}", sigma.total_mass());
    let (inside, outside) = sigma_split(&f).unwrap();
    assert!((inside + outside - 1.0).abs() <= 1e-12);
    assert!((inside - sigma.total_mass()).abs() <= 1e-12);
}

#[test]
fn empty_field_has_no_sigma_and_no_level_sets() {
    let f = solve(&ZeroConfig::empty(), 16.0);
    assert!(matches!(sigma_measure(&f), Err(Error::ZeroEnergy)));
    assert!(sublevel_set(&f, LevelSetKind::OmegaMinus).unwrap().is_empty());
    assert!(sublevel_set(&f, LevelSetKind::ZTheta(0.3)).unwrap().is_empty());
    assert!(component_radius_check(&f).unwrap().is_empty());
}

#[test]
fn omega_minus_is_one_component_around_a_single_zero() {
    let f = single(1, 64.0);
    let set = sublevel_set(&f, LevelSetKind::OmegaMinus).unwrap();
    assert_eq!(set.components.len(), 1);
    assert_eq!(set.components[0].zeros, vec![0]);
    assert_eq!(set.components[0].nodes, set.cells);
    let pts = set.points();
    let far = pts.iter().map(|q| q.dist(f.zeros.points[0])).fold(0.0, f64::max);
    assert!(set.components[0].diameter <= 2.0 * far + 1e-12);
    assert!(set.components[0].diameter >= far);
}

#[test]
fn two_separated_zeros_give_two_labelled_components() {
    let zeros = ZeroConfig::new(vec![p(-0.4, 0.1), p(0.45, -0.2)], vec![1, 2]).unwrap();
    let f = solve(&zeros, 64.0);
    let set = sublevel_set(&f, LevelSetKind::OmegaMinus).unwrap();
    assert_eq!(set.components.len(), 2);
    let mut labels: Vec<usize> = set.components.iter().flat_map(|c| c.zeros.clone()).collect();
    labels.sort();
    assert_eq!(labels, vec![0, 1]);
    let radii = component_radius_check(&f).unwrap();
    assert!(radii[1].radius > radii[0].radius);
}

#[test]
fn theta_sets_are_nested() {
    let zeros = ZeroConfig::new(vec![p(-0.3, 0.0), p(0.3, 0.05)], vec![1, 1]).unwrap();
    let f = solve(&zeros, 64.0);
    let thetas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let sets: Vec<_> = thetas.iter().map(|&t| sublevel_set(&f, LevelSetKind::ZTheta(t)).unwrap()).collect();
    for w in sets.windows(2) {
        assert!(w[1].cells.iter().all(|&k| w[0].contains(k)));
        assert!(w[1].len() <= w[0].len());
    }
    assert!(matches!(sublevel_set(&f, LevelSetKind::ZTheta(1.0)), Err(Error::InvalidArgument(_))));
}

#[test]
fn near_zero_set_sits_inside_theta_sets() {
    let f = single(1, 64.0);
    let thr = 0.2;
    let near = sublevel_set(&f, LevelSetKind::NearZero(thr)).unwrap();
    assert!(!near.is_empty());
    for theta in [0.3, 0.5, 0.79] {
        let z = sublevel_set(&f, LevelSetKind::ZTheta(theta)).unwrap();
        assert!(near.cells.iter().all(|&k| z.contains(k)));
    }
}

#[test]
fn component_radius_scales_like_inverse_root_r() {
    let a = component_radius_check(&single(1, 64.0)).unwrap()[0].ratio;
    let b = component_radius_check(&single(1, 256.0)).unwrap()[0].ratio;
    assert!(a > 0.0 && b > 0.0);
    assert!(a / b <= 2.0 && b / a <= 2.0, "{a} {b}");
    let m2 = component_radius_check(&single(2, 64.0)).unwrap()[0].ratio;
    assert!(m2 <= 2.0 * a, "{m2} vs {a}");
}

#[test]
fn decay_fit_recovers_exponential_tail() {
    let a = decay_fit(&single(1, 64.0)).unwrap();
    let b = decay_fit(&single(1, 256.0)).unwrap();
    for fit in [a, b] {
        assert!(fit.c_hat > 0.0);
        assert!(fit.r2 >= 0.9, "r2 = {}", fit.r2);
        assert!(fit.samples >= 30);
    }
    assert!(a.c_hat / b.c_hat <= 2.0 && b.c_hat / a.c_hat <= 2.0);
    // Far from the core the linearised equation gives rate √2.
    assert!((a.c_hat - 2f64.sqrt()).abs() < 0.5, "c_hat = {}", a.c_hat);
}

#[test]
fn decay_fit_needs_enough_samples() {
    let mut f = single(1, 16.0);
    // Every node inside Ω⁻ leaves nothing at positive distance.
    f.u.iter_mut().for_each(|u| *u = -1.0);
    assert!(matches!(decay_fit(&f), Err(Error::InsufficientSamples { found: 0, needed: 30 })));
}

#[test]
fn annulus_mass_vanishes() {
    let region = Region::Annulus { center: p(0.0, 0.0), inner: 0.5, outer: 0.8 };
    let seq: Vec<_> = [64.0, 256.0, 1024.0].iter().map(|&r| single(1, r)).collect();
    let masses = vanishing_mass_check(&seq, &region).unwrap();
    assert!(masses.windows(2).all(|w| w[1] < w[0]), "{masses:?}");
    assert!(*masses.last().unwrap() <= 1e-3);
    // The annulus holds less than everything outside the inner radius.
    let f = &seq[0];
    let wide = Region::Annulus { center: p(0.0, 0.0), inner: 0.5, outer: 1.0 };
    let outer = vanishing_mass_check(std::slice::from_ref(f), &wide).unwrap()[0];
    assert!(masses[0] <= outer);
}

#[test]
fn region_overlapping_a_zero_is_rejected() {
    // At r = 16 the core radius is about 0.26, so the annulus from 0.5 is too close.
    let region = Region::Annulus { center: p(0.0, 0.0), inner: 0.5, outer: 0.8 };
    assert!(matches!(vanishing_mass_check(&[single(1, 16.0)], &region), Err(Error::RegionOverlap { .. })));
    let seq = vec![single(1, 64.0)];
    let region = Region::Disk { center: p(0.05, 0.0), radius: 0.1 };
    assert!(matches!(vanishing_mass_check(&seq, &region), Err(Error::RegionOverlap { index: 0, .. })));
}

#[test]
fn log_h_integral_is_finite_and_small() {
    let f = single(1, 64.0);
    let v = log_h_mean(&f, 1.0).unwrap();
    assert!(v.is_finite() && v >= 0.0);
}

fn point_set() -> impl Strategy<Value = Vec<Point<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| Point::new(x, y)), 1..12)
}

proptest! {
    #[test]
    fn hausdorff_is_a_metric(a in point_set(), b in point_set(), c in point_set()) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
    }
}
