use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::{branch_velocity, distance_to_cycle, find_limit_cycle, Branch};
use liensync::system::{make_van_der_pol, PhasePoint};

#[test]
fn amplitudes_and_periods() {
    let cfg = IntegratorConfig::verification();
    let lc = find_limit_cycle(&make_van_der_pol(0.1).unwrap(), &cfg).unwrap();
    assert!((lc.x_max() - 2.00010).abs() < 1e-4);

    let small = find_limit_cycle(&make_van_der_pol(0.01).unwrap(), &cfg).unwrap();
    assert!((small.x_max() - 2.0).abs() < 0.01);
    assert!((small.period() - 2.0 * std::f64::consts::PI).abs() < 1e-3);

    let one = find_limit_cycle(&make_van_der_pol(1.0).unwrap(), &cfg).unwrap();
    assert!((2.0..=2.0672).contains(&one.x_max()));
}

#[test]
fn closure_symmetry_and_branches() {
    let lc = find_limit_cycle(&make_van_der_pol(0.1).unwrap(), &IntegratorConfig::verification()).unwrap();
    let (first, last) = (lc.samples()[0], *lc.samples().last().unwrap());
    assert!((first.x1 - last.x1).abs() < 1e-9 && (first.x2 - last.x2).abs() < 1e-9);
    for p in lc.samples().iter().step_by(997) {
        assert!(lc.distance(p.reflect()) < 1e-6);
    }
    for i in 0..=40 {
        let x = -lc.x_max() + 2.0 * lc.x_max() * i as f64 / 40.0;
        let up = branch_velocity(&lc, x, Branch::Upper).unwrap();
        let down = branch_velocity(&lc, x, Branch::Lower).unwrap();
        assert!(up >= 0.0 && down <= 0.0);
        assert_eq!(down, -branch_velocity(&lc, -x, Branch::Upper).unwrap());
    }
    assert_eq!(lc.branch_velocity(lc.x_max(), Branch::Upper).unwrap(), 0.0);
    assert_eq!(lc.branch_velocity(-lc.x_max(), Branch::Lower).unwrap(), 0.0);
    assert!(lc.branch_velocity(2.5, Branch::Upper).is_err());
}

#[test]
fn distances() {
    let lc = find_limit_cycle(&make_van_der_pol(0.1).unwrap(), &IntegratorConfig::verification()).unwrap();
    assert!(distance_to_cycle(&lc, PhasePoint::new(lc.x_max(), 0.0)) < 1e-9);
    let origin = distance_to_cycle(&lc, PhasePoint::new(0.0, 0.0));
    let radius = lc
        .samples()
        .iter()
        .map(|p| p.x1.hypot(p.x2))
        .fold(f64::INFINITY, f64::min);
    assert!((origin - radius).abs() < 1e-6);
    assert!((origin - 2.0).abs() < 0.1);

    let far = PhasePoint::new(5.0, 0.0);
    let brute = lc
        .samples()
        .iter()
        .map(|p| p.distance(&far))
        .fold(f64::INFINITY, f64::min);
    let d = distance_to_cycle(&lc, far);
    assert!(d <= brute && brute - d < 1e-6);
    assert!((d - 3.0).abs() < 1e-3);
}

#[test]
fn figure_four_branch_values() {
    let lc = find_limit_cycle(&make_van_der_pol(0.1).unwrap(), &IntegratorConfig::verification()).unwrap();
    assert!((lc.branch_velocity(1.5, Branch::Upper).unwrap() - 1.4).abs() < 0.05);
    assert!((lc.branch_velocity(1.5, Branch::Lower).unwrap() + 1.3).abs() < 0.05);
}

#[test]
fn csv_export() {
    let lc = find_limit_cycle(&make_van_der_pol(0.5).unwrap(), &IntegratorConfig::verification()).unwrap();
    let mut buf = Vec::new();
    lc.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x1,x2\n"));
    assert_eq!(text.lines().count(), lc.samples().len() + 1);
}
