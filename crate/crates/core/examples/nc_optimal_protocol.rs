//! Minimal non-conservative work protocols from a point inside the cycle
//! (two equivalent endpoints) and from one outside (the turning point),
//! replayed through the integrator.
//!
//! cargo run --release --example nc_optimal_protocol

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::{plan_nc_alternatives, synthesize_force, GFunction};
use liensync::system::{make_van_der_pol, PhasePoint};
use liensync::verify::closed_loop_replay_detailed;

fn main() -> liensync::Result<()> {
    let sys = make_van_der_pol(0.1)?;
    let cfg = IntegratorConfig::verification();
    let lc = find_limit_cycle(&sys, &cfg)?;
    let gf = GFunction::new(&sys);
    let s_f = 10.0;

    for x10 in [1.5, 5.0] {
        for plan in plan_nc_alternatives(&sys, &lc, &gf, PhasePoint::new(x10, 0.0), s_f)? {
            let force = synthesize_force(&sys, &plan)?;
            let replay = closed_loop_replay_detailed(&sys, &lc, &plan, &force, &cfg)?;
            println!(
                "x10 = {x10}: {} end ({:.4}, {:+.4})  C1 = {:+.4}  W_nc = {:.6}  kicks {:+.4} / {:+.4}  miss {:.1e}",
                plan.endpoint_case.as_str(),
                plan.x1f,
                plan.x2f,
                plan.c1,
                plan.w_nc_min,
                plan.impulse_start,
                plan.impulse_end,
                replay.terminal_distance
            );
        }
    }
    Ok(())
}
