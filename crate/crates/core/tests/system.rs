use liensync::force::{ForceProfile, Impulse};
use liensync::integrate::{integrate_driven, IntegratorConfig};
use liensync::nc_optimal::{solve_el_path, GFunction};
use liensync::system::{make_van_der_pol, validate_system, LienardSystem, PhasePoint, SystemDefinition};
use liensync::trajectory::{work_breakdown, Trajectory};
use liensync::verify::oracle_wnc_quadrature;
use liensync::Error;

#[test]
fn van_der_pol_constants() {
    let sys = make_van_der_pol(0.1).unwrap();
    assert!((sys.b() - 1.0).abs() < 1e-12);
    assert!((sys.a() - 3f64.sqrt()).abs() < 1e-7);
    let one = make_van_der_pol(1.0).unwrap();
    assert_eq!(one.h().eval(0.0), -1.0);
    assert_eq!(one.h().eval(2.0), 3.0);
    assert!(make_van_der_pol(0.0).is_err());
}

#[test]
fn validation_reports() {
    let ok = validate_system(&SystemDefinition::van_der_pol(0.01), 10.0, 4000).unwrap();
    assert!(ok.passed());
    assert!((ok.b.unwrap() - 1.0).abs() < 1e-12);

    let no_zero = validate_system(
        &SystemDefinition::new(0.1, vec![1.0, 0.0, 1.0], vec![0.0, 1.0]),
        10.0,
        4000,
    )
    .unwrap();
    assert!(no_zero
        .failures()
        .any(|c| c.detail.contains("h has no positive zero")));

    let repulsive = validate_system(
        &SystemDefinition::new(0.1, vec![-1.0, 0.0, 1.0], vec![0.0, -1.0]),
        10.0,
        4000,
    )
    .unwrap();
    assert!(repulsive
        .failures()
        .any(|c| c.detail.contains("potential not confining")));

    let err = LienardSystem::new(0.1, vec![1.0, 0.0, 1.0], vec![0.0, 1.0]).unwrap_err();
    assert!(matches!(err, Error::Validation(_)));
}

#[test]
fn vector_field_examples() {
    let sys = make_van_der_pol(0.1).unwrap();
    assert_eq!(sys.vector_field(PhasePoint::new(2.0, 0.0), 0.0), (0.0, -2.0));
    let (a, b) = sys.vector_field(PhasePoint::new(0.0, 1.0), 0.0);
    assert_eq!(a, 1.0);
    assert!((b - 0.1).abs() < 1e-15);
    let one = make_van_der_pol(1.0).unwrap();
    assert_eq!(one.vector_field(PhasePoint::new(1.0, 1.0), 3.0), (1.0, 2.0));
}

#[test]
fn work_of_simple_trajectories() {
    let sys = make_van_der_pol(0.1).unwrap();
    let rest = Trajectory::from_path(|_| PhasePoint::new(1.5, 0.0), 2.0, 100).unwrap();
    let w = work_breakdown(&sys, &rest);
    assert_eq!((w.w_nc, w.delta_e, w.total), (0.0, 0.0, 0.0));

    let kick = ForceProfile::zero()
        .with_impulses(vec![Impulse {
            time: 0.0,
            delta_v: 1.0,
        }])
        .unwrap();
    let traj = integrate_driven(
        &sys,
        PhasePoint::new(2.0, 0.0),
        &kick,
        0.0,
        &IntegratorConfig::verification(),
    )
    .unwrap();
    assert_eq!(traj.last(), PhasePoint::new(2.0, 1.0));
    let w = work_breakdown(&sys, &traj);
    assert_eq!(w.w_nc, 0.0);
    assert!((w.delta_e - 0.5).abs() < 1e-15);
}

#[test]
fn extremal_path_work_matches_first_integral() {
    let sys = make_van_der_pol(0.1).unwrap();
    let gf = GFunction::new(&sys);
    let t_f = 1.0;
    let path = solve_el_path(&gf, 5.0, 2.0, t_f).unwrap();
    let traj = Trajectory::from_path(|t| path.at(t), t_f, 20000).unwrap();
    let w = work_breakdown(&sys, &traj);
    let formula = 0.1 * path.c1() * path.c1() * t_f;
    // trapezoid on 2e4 intervals
    assert!((w.w_nc - formula).abs() < 1e-6 * formula);
    let q = oracle_wnc_quadrature(&sys, |t| path.at(t), t_f, 2000).unwrap();
    assert!((q.value - formula).abs() < 1e-8);
}
