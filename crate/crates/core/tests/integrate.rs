use liensync::force::{ForceProfile, Impulse};
use liensync::integrate::{
    envelope_amplitude, integrate_driven, integrate_until_event, small_mu_envelope, Direction, EventSpec,
    HalfPlane, IntegratorConfig,
};
use liensync::limit_cycle::find_limit_cycle;
use liensync::system::{make_van_der_pol, PhasePoint};
use liensync::Error;

#[test]
fn harmonic_limit_is_a_circle() {
    let sys = make_van_der_pol(1e-12).unwrap();
    let cfg = IntegratorConfig::verification();
    let hit =
        integrate_until_event(&sys, PhasePoint::new(2.0, 0.0), EventSpec::poincare(), &cfg, 10.0).unwrap();
    assert!((hit.t_cross - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    for p in hit.trajectory.states() {
        assert!((p.x1.hypot(p.x2) - 2.0).abs() < 1e-6);
    }
}

#[test]
fn relaxes_onto_the_cycle() {
    let sys = make_van_der_pol(0.1).unwrap();
    let cfg = IntegratorConfig::verification();
    let lc = find_limit_cycle(&sys, &cfg).unwrap();
    let traj = integrate_driven(&sys, PhasePoint::new(0.5, 0.0), &ForceProfile::zero(), 80.0, &cfg).unwrap();
    assert!(lc.distance(traj.last()) < 0.05);
}

#[test]
fn impulse_only_protocol() {
    let sys = make_van_der_pol(0.1).unwrap();
    let f = ForceProfile::zero()
        .with_impulses(vec![Impulse {
            time: 0.0,
            delta_v: 1.0,
        }])
        .unwrap();
    let traj = integrate_driven(
        &sys,
        PhasePoint::new(2.0, 0.0),
        &f,
        0.0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert_eq!(traj.last(), PhasePoint::new(2.0, 1.0));
}

/// Fixed-step RK4 (dt = 1e-5) up to the first descending crossing of x2 = 0 in x1 > 0.
fn rk4_crossing(sys: &liensync::system::LienardSystem, start: PhasePoint) -> f64 {
    let dt = 1e-5;
    let f = |p: PhasePoint| sys.vector_field(p, 0.0);
    let mut p = start;
    let mut t = 0.0;
    loop {
        let k1 = f(p);
        let k2 = f(PhasePoint::new(p.x1 + 0.5 * dt * k1.0, p.x2 + 0.5 * dt * k1.1));
        let k3 = f(PhasePoint::new(p.x1 + 0.5 * dt * k2.0, p.x2 + 0.5 * dt * k2.1));
        let k4 = f(PhasePoint::new(p.x1 + dt * k3.0, p.x2 + dt * k3.1));
        let q = PhasePoint::new(
            p.x1 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            p.x2 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        t += dt;
        if t > 1.0 && p.x2 > 0.0 && q.x2 <= 0.0 && q.x1 > 0.0 {
            // linear interpolation in x2
            let s = p.x2 / (p.x2 - q.x2);
            return p.x1 + s * (q.x1 - p.x1);
        }
        p = q;
    }
}

#[test]
fn section_crossing_matches_fine_rk4() {
    let sys = make_van_der_pol(0.1).unwrap();
    let start = PhasePoint::new(2.5, 0.0);
    let event = EventSpec::section(Direction::Descending, HalfPlane::Positive);
    let hit = integrate_until_event(&sys, start, event, &IntegratorConfig::verification(), 50.0).unwrap();
    assert!(hit.crossing.x2.abs() < 1e-12);
    assert!(hit.crossing.x1 > 2.0 && hit.crossing.x1 < 2.5);
    let oracle = rk4_crossing(&sys, start);
    assert!(
        (hit.crossing.x1 - oracle).abs() < 1e-8,
        "{} vs {oracle}",
        hit.crossing.x1
    );
}

#[test]
fn near_harmonic_return_and_missing_event() {
    let sys = make_van_der_pol(0.01).unwrap();
    let cfg = IntegratorConfig::verification();
    let hit =
        integrate_until_event(&sys, PhasePoint::new(2.0, 0.0), EventSpec::poincare(), &cfg, 20.0).unwrap();
    assert!((hit.t_cross - 2.0 * std::f64::consts::PI).abs() < 1e-2);
    let err = integrate_until_event(&sys, PhasePoint::new(2.0, 0.0), EventSpec::poincare(), &cfg, 0.01)
        .unwrap_err();
    assert!(matches!(err, Error::EventNotFound { .. }));
}

#[test]
fn envelope_examples() {
    let sys = make_van_der_pol(0.01).unwrap();
    for t in [0.0, 3.0, 100.0, 1e4] {
        let p = small_mu_envelope(&sys, PhasePoint::new(2.0, 0.0), t).unwrap();
        assert!((p.x1.hypot(p.x2) - 2.0).abs() < 1e-12);
    }
    assert!((envelope_amplitude(0.01, 1.0, 1e5) - 2.0).abs() < 1e-12);

    let t = 100.0;
    let traj = integrate_driven(
        &sys,
        PhasePoint::new(4.0, 0.0),
        &ForceProfile::zero(),
        t,
        &IntegratorConfig::verification(),
    )
    .unwrap();
    let r = traj.last().x1.hypot(traj.last().x2);
    assert!((r - envelope_amplitude(0.01, 4.0, t)).abs() < 5.0 * 0.01);
    let env = small_mu_envelope(&sys, PhasePoint::new(4.0, 0.0), t).unwrap();
    assert!(env.distance(&traj.last()) < 0.1);
}
