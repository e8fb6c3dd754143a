//! Undriven relaxation towards the cycle at small damping, compared with the
//! multiple-scales amplitude envelope.
//!
//! cargo run --release --example free_relaxation

use liensync::force::ForceProfile;
use liensync::integrate::{envelope_amplitude, integrate_driven, IntegratorConfig};
use liensync::limit_cycle::find_limit_cycle;
use liensync::system::{make_van_der_pol, PhasePoint};

fn main() -> liensync::Result<()> {
    let mu = 0.01;
    let sys = make_van_der_pol(mu)?;
    let cfg = IntegratorConfig::sweep();
    let lc = find_limit_cycle(&sys, &cfg)?;
    let start = PhasePoint::new(4.0, 0.0);
    let traj = integrate_driven(&sys, start, &ForceProfile::zero(), 800.0, &cfg)?;

    println!("{:>6} {:>10} {:>10} {:>12}", "t", "r", "envelope", "dist(cycle)");
    let mut next = 0.0;
    for (t, p) in traj.times().iter().zip(traj.states()) {
        if *t >= next {
            let r = p.x1.hypot(p.x2);
            println!(
                "{t:>6.0} {r:>10.5} {:>10.5} {:>12.3e}",
                envelope_amplitude(mu, 4.0, *t),
                lc.distance(*p)
            );
            next += 100.0;
        }
    }
    println!("relaxation time 4/mu = {}", 4.0 / mu);
    Ok(())
}
