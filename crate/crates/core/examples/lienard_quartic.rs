//! A Lienard oscillator that is not van der Pol: h(x) = x^4 - 1, V'(x) = x.
//! Same pipeline: validate, find the cycle, plan, replay.
//!
//! cargo run --release --example lienard_quartic

use liensync::integrate::IntegratorConfig;
use liensync::limit_cycle::find_limit_cycle;
use liensync::nc_optimal::{plan_nc, synthesize_force, GFunction};
use liensync::system::{LienardSystem, PhasePoint};
use liensync::total_work::plan_total;
use liensync::verify::closed_loop_replay_detailed;

fn main() -> liensync::Result<()> {
    let sys = LienardSystem::new(0.1, vec![-1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0])?;
    let cfg = IntegratorConfig::verification();
    let lc = find_limit_cycle(&sys, &cfg)?;
    let gf = GFunction::new(&sys);
    println!(
        "b = {}, a = {:.6}, x_max = {:.8}, period = {:.6}",
        sys.b(),
        sys.a(),
        lc.x_max(),
        lc.period()
    );

    let start = PhasePoint::new(4.0, 0.0);
    let plan = plan_nc(&sys, &lc, &gf, start, 10.0)?;
    let replay = closed_loop_replay_detailed(&sys, &lc, &plan, &synthesize_force(&sys, &plan)?, &cfg)?;
    println!(
        "W_nc-optimal from (4, 0): {} at x1f = {:.6}, W_nc = {:.6}, miss {:.1e}",
        plan.endpoint_case.as_str(),
        plan.x1f,
        plan.w_nc_min,
        replay.terminal_distance
    );

    for s_f in [10.0, 100.0, 1000.0] {
        let (plan, l) = plan_total(&sys, &lc, &gf, start, s_f)?;
        println!(
            "total-work optimum at s_f = {s_f}: {} x1f = {:.6}, W = {:.6}",
            plan.endpoint_case.as_str(),
            plan.x1f,
            l.global_opt.work.total
        );
    }
    Ok(())
}
