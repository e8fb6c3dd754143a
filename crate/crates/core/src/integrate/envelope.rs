use log::warn;

use crate::error::{Error, Result};
use crate::system::{LienardSystem, PhasePoint};

/// Multiple-scale amplitude `2 (1 - (r0^2 - 4)/r0^2 e^{-mu t})^{-1/2}`.
pub fn envelope_amplitude(mu: f64, r0: f64, t: f64) -> f64 {
    let r2 = r0 * r0;
    2.0 / (1.0 - (r2 - 4.0) / r2 * (-mu * t).exp()).sqrt()
}

/// Small-damping asymptotic solution of the free van der Pol oscillator.
///
/// The phase is taken quadrant-correct so that the prediction reproduces
/// `start` at `t = 0` for every start point.
pub fn small_mu_envelope(sys: &LienardSystem, start: PhasePoint, t: f64) -> Result<PhasePoint> {
    if !sys.is_van_der_pol() {
        return Err(Error::domain(
            "the small-mu envelope is only defined for van der Pol",
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be non-negative, got {t}")));
    }
    let r0 = start.x1.hypot(start.x2);
    if r0 == 0.0 {
        return Err(Error::domain("start at the unstable fixed point (0, 0)"));
    }
    if sys.mu() > 0.2 {
        warn!("small-mu envelope used with mu = {} (> 0.2)", sys.mu());
    }
    // x1 = A cos(t + phi0), x2 = -A sin(t + phi0)
    let phi0 = (-start.x2).atan2(start.x1);
    let amp = envelope_amplitude(sys.mu(), r0, t);
    Ok(PhasePoint::new(amp * (t + phi0).cos(), -amp * (t + phi0).sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_van_der_pol;

    #[test]
    fn on_cycle_amplitude_is_constant() {
        let sys = make_van_der_pol(0.05).unwrap();
        for t in [0.0, 1.0, 17.3, 1e3] {
            let p = small_mu_envelope(&sys, PhasePoint::new(2.0, 0.0), t).unwrap();
            assert!((p.x1.hypot(p.x2) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inside_start_grows_to_two() {
        assert!((envelope_amplitude(0.1, 1.0, 1e4) - 2.0).abs() < 1e-12);
        assert!((envelope_amplitude(0.1, 1.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reproduces_start_in_every_quadrant() {
        let sys = make_van_der_pol(0.01).unwrap();
        for start in [
            PhasePoint::new(1.0, 0.5),
            PhasePoint::new(-1.0, 0.5),
            PhasePoint::new(-1.0, -0.5),
            PhasePoint::new(1.0, -0.5),
        ] {
            let p = small_mu_envelope(&sys, start, 0.0).unwrap();
            assert!(p.distance(&start) < 1e-14, "{start:?} -> {p:?}");
        }
    }

    #[test]
    fn degenerate_and_non_vdp_inputs() {
        let sys = make_van_der_pol(0.01).unwrap();
        assert!(small_mu_envelope(&sys, PhasePoint::new(0.0, 0.0), 1.0).is_err());
        let quartic = LienardSystem::new(0.01, vec![-1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(small_mu_envelope(&quartic, PhasePoint::new(1.0, 0.0), 1.0).is_err());
    }
}
