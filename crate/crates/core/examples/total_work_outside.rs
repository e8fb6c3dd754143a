//! Total work from x10 = 5 (outside the cycle): the turning point wins for
//! short connections, an interior point for long ones. Locates the switch.
//!
//! cargo run --release --example total_work_outside

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::GFunction;
use liensync::system::{make_van_der_pol, PhasePoint};
use liensync::total_work::{critical_time, optimal_endpoint_total};

fn main() -> liensync::Result<()> {
    let sys = make_van_der_pol(0.1)?;
    let lc = find_limit_cycle(&sys, &IntegratorConfig::verification())?;
    let gf = GFunction::new(&sys);
    let start = PhasePoint::new(5.0, 0.0);

    for s_f in [10.0, 100.0, 174.0, 175.0, 400.0] {
        let l = optimal_endpoint_total(&sys, &lc, &gf, start, s_f)?;
        let roots: Vec<String> = l.interior_roots.iter().map(|c| format!("{:.4}", c.x1f)).collect();
        println!(
            "s_f = {s_f:>5}: optimum {:.6} ({}), W = {:.8}; local minima at [{}]",
            l.global_opt.x1f,
            l.global_opt.case.as_str(),
            l.global_opt.work.total,
            roots.join(", ")
        );
    }

    if let Some(c) = critical_time(&sys, &lc, &gf, start, (10.0, 400.0))? {
        println!(
            "switch at s_f* = {:.4}: x1f jumps {:.4} -> {:.4}",
            c.s_f_star, c.opt_below.x1f, c.opt_above.x1f
        );
    }
    Ok(())
}
