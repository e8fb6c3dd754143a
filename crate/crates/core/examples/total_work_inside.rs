//! Total work landscape from x10 = 1.5 (inside the cycle): the optimal
//! endpoint slides towards h = 0 as the connection time grows.
//!
//! cargo run --release --example total_work_inside

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::GFunction;
use liensync::system::{make_van_der_pol, PhasePoint};
use liensync::total_work::optimal_endpoint_total;

fn main() -> liensync::Result<()> {
    let sys = make_van_der_pol(0.1)?;
    let lc = find_limit_cycle(&sys, &IntegratorConfig::verification())?;
    let gf = GFunction::new(&sys);
    let start = PhasePoint::new(1.5, 0.0);

    println!(
        "{:>8} {:>14} {:>8} {:>6} {:>12}",
        "s_f", "x1f_opt", "branch", "case", "W_min"
    );
    for s_f in [0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0] {
        let l = optimal_endpoint_total(&sys, &lc, &gf, start, s_f)?;
        let o = l.global_opt;
        println!(
            "{s_f:>8} {:>14.9} {:>8} {:>6} {:>12.6}",
            o.x1f,
            o.branch.map_or("-", |b| b.as_str()),
            o.case.as_str(),
            o.work.total
        );
    }
    Ok(())
}
