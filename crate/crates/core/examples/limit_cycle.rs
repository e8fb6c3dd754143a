//! Locate the van der Pol limit cycle for a few damping values and print
//! its amplitude, period and a handful of upper-branch velocities.
//!
//! cargo run --release --example limit_cycle

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::{find_limit_cycle, Branch};
use liensync::system::make_van_der_pol;

fn main() -> liensync::Result<()> {
    let cfg = IntegratorConfig::verification();
    println!("{:>6} {:>16} {:>16} {:>10}", "mu", "x_max", "period", "samples");
    for mu in [0.01, 0.1, 0.5, 1.0, 3.0] {
        let lc = find_limit_cycle(&make_van_der_pol(mu)?, &cfg)?;
        println!(
            "{mu:>6} {:>16.12} {:>16.12} {:>10}",
            lc.x_max(),
            lc.period(),
            lc.samples().len()
        );
    }

    let lc = find_limit_cycle(&make_van_der_pol(0.1)?, &cfg)?;
    println!("\nmu = 0.1, upper branch s(x):");
    for x in [-2.0, -1.0, 0.0, 1.0, 1.5, 2.0] {
        println!("  s({x:>4}) = {:+.6}", lc.branch_velocity(x, Branch::Upper)?);
    }
    Ok(())
}
