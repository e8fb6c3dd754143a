//! Trade-off between connection time and non-conservative work: the minimal
//! work falls like 1/s_f, and a work budget fixes the shortest time.
//!
//! cargo run --release --example speed_limit

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::{speed_limit, wnc_min, GFunction};
use liensync::system::make_van_der_pol;

fn main() -> liensync::Result<()> {
    let sys = make_van_der_pol(0.1)?;
    let lc = find_limit_cycle(&sys, &IntegratorConfig::verification())?;
    let gf = GFunction::new(&sys);

    print!("{:>6}", "x10");
    let sfs = [1.0, 10.0, 100.0, 1000.0];
    for s in sfs {
        print!(" {:>12}", format!("s_f={s}"));
    }
    println!();
    for x10 in [1.5, 2.0, 2.5, 3.0, 5.0, 8.0] {
        print!("{x10:>6}");
        for s in sfs {
            print!(" {:>12.6}", wnc_min(&sys, &lc, &gf, x10, s)?);
        }
        println!();
    }

    for budget in [0.1, 1.0, 10.0] {
        println!(
            "budget {budget:>5}: from x10 = 5 needs s_f >= {:.4}",
            speed_limit(&sys, &lc, &gf, 5.0, budget)?
        );
    }
    Ok(())
}
