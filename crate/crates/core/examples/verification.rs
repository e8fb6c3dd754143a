//! Runs the full verification suite on van der Pol and on a quartic
//! Lienard system and prints every check.
//!
//! cargo run --release --example verification

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::GFunction;
use liensync::system::{make_van_der_pol, LienardSystem};
use liensync::verify::run_suite;

fn main() -> liensync::Result<()> {
    let cfg = IntegratorConfig::verification();
    let systems = [
        ("van der Pol, mu = 0.1", make_van_der_pol(0.1)?),
        (
            "h = x^4 - 1, mu = 0.1",
            LienardSystem::new(0.1, vec![-1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0])?,
        ),
    ];
    let mut all = true;
    for (name, sys) in systems {
        let lc = find_limit_cycle(&sys, &cfg)?;
        let report = run_suite(&sys, &lc, &GFunction::new(&sys), &cfg)?;
        println!("== {name}");
        for c in &report.checks {
            println!(
                "  [{}] {:<60} {:.3e}",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.measured
            );
        }
        all &= report.passed();
    }
    if !all {
        std::process::exit(2);
    }
    Ok(())
}
