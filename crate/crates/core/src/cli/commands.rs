use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{Drive, Objective, RunConfig};
use super::{EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_OK, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::force::{ForceProfile, Impulse};
use crate::integrate::integrate_driven;
use crate::limit_cycle::{find_limit_cycle, Branch, LimitCycle};
use crate::nc_optimal::{
    plan_nc, plan_nc_alternatives, plan_nc_to, synthesize_force, GFunction, OptimalPlan,
};
use crate::system::{validate_system, LienardSystem, PhasePoint};
use crate::total_work::{critical_time, optimal_endpoint_total, plan_total};
use crate::trajectory::{work_breakdown, Trajectory};
use crate::verify::{closed_loop_replay_detailed, run_suite};

const PLAN_INTERVALS: usize = 2000;

pub(super) struct Outcome {
    pub summary: String,
    pub code: i32,
}

struct Ctx {
    sys: LienardSystem,
    lc: LimitCycle,
    gf: GFunction,
}

fn setup(cfg: &RunConfig) -> Result<Ctx> {
    let sys = cfg.system.build()?;
    let lc = find_limit_cycle(&sys, &cfg.integrator())?;
    let gf = GFunction::new(&sys);
    Ok(Ctx { sys, lc, gf })
}

/// Output directory (created on demand) with the resolved config saved in it.
fn out_dir(cfg: &RunConfig) -> Result<Option<PathBuf>> {
    let Some(dir) = &cfg.out_dir else {
        return Ok(None);
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), cfg.to_json()? + "\n")?;
    Ok(Some(dir.clone()))
}

fn write_file(
    dir: &Option<PathBuf>,
    name: &str,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    if let Some(dir) = dir {
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn summary(command: &str, fields: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("command".into(), command.into());
    if let Value::Object(extra) = fields {
        m.extend(extra);
    }
    m
}

fn finish(dir: &Option<PathBuf>, m: Map<String, Value>, code: i32) -> Result<Outcome> {
    let v = Value::Object(m);
    write_file(dir, "summary.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &v)?;
        Ok(writeln!(w)?)
    })?;
    Ok(Outcome {
        summary: v.to_string(),
        code,
    })
}

pub(super) fn dispatch(name: &str, cfg: &RunConfig) -> Result<Outcome> {
    match name {
        "simulate" => simulate(cfg),
        "limit-cycle" => limit_cycle(cfg),
        "plan-nc" => plan_nc_cmd(cfg),
        "plan-total" => plan_total_cmd(cfg),
        "sweep" => sweep(cfg),
        "verify" => verify(cfg),
        other => Err(Error::Usage(format!("unknown command {other}"))),
    }
}

pub(super) fn validate(cfg: &RunConfig, grid_max: f64, grid_points: usize) -> Result<Outcome> {
    let dir = out_dir(cfg)?;
    let report = validate_system(&cfg.system.definition(), grid_max, grid_points)?;
    let passed = report.passed();
    let m = summary(
        "validate",
        json!({ "passed": passed, "b": report.b, "a": report.a, "checks": report.checks }),
    );
    finish(&dir, m, if passed { EXIT_OK } else { EXIT_DOMAIN })
}

fn limit_cycle(cfg: &RunConfig) -> Result<Outcome> {
    let dir = out_dir(cfg)?;
    let sys = cfg.system.build()?;
    let lc = find_limit_cycle(&sys, &cfg.integrator())?;
    write_file(&dir, "cycle.csv", |w| lc.write_csv(w))?;
    let m = summary(
        "limit-cycle",
        json!({
            "mu": lc.mu(),
            "x_max": lc.x_max(),
            "period": lc.period(),
            "return_residual": lc.return_residual(),
            "samples": lc.samples().len(),
        }),
    );
    finish(&dir, m, EXIT_OK)
}

fn write_impulses(w: &mut dyn Write, impulses: &[Impulse]) -> Result<()> {
    writeln!(w, "t,delta_v")?;
    for i in impulses {
        writeln!(w, "{},{}", i.time, i.delta_v)?;
    }
    Ok(())
}

/// Writes the planned path (with `F` when the force is regular) and the
/// impulses; with `replay` also integrates the force from the start.
fn emit_plan(
    ctx: &Ctx,
    cfg: &RunConfig,
    dir: &Option<PathBuf>,
    plan: &OptimalPlan,
    fields: &mut Map<String, Value>,
) -> Result<()> {
    let force = synthesize_force(&ctx.sys, plan);
    if let Err(e) = &force {
        log::warn!("no regular force for this plan: {e}");
    }
    let planned = plan.trajectory(PLAN_INTERVALS)?;
    let planned = Trajectory::new(
        planned.times().to_vec(),
        planned.states().to_vec(),
        force.as_ref().ok().cloned(),
    )?;
    write_file(dir, "trajectory.csv", |w| planned.write_csv(w))?;
    let impulses = [
        Impulse {
            time: 0.0,
            delta_v: plan.impulse_start,
        },
        Impulse {
            time: plan.t_f,
            delta_v: plan.impulse_end,
        },
    ];
    write_file(dir, "impulses.csv", |w| write_impulses(w, &impulses))?;
    if cfg.replay {
        let force = force?;
        let replay = closed_loop_replay_detailed(&ctx.sys, &ctx.lc, plan, &force, &cfg.integrator())?;
        write_file(dir, "replay.csv", |w| replay.driven.write_csv(w))?;
        write_file(dir, "replay_free.csv", |w| replay.free.write_csv(w))?;
        let work = work_breakdown(&ctx.sys, &replay.driven);
        fields.insert("terminal_distance".into(), replay.terminal_distance.into());
        fields.insert("tube_distance".into(), replay.tube_distance.into());
        fields.insert("replay_work".into(), serde_json::to_value(work)?);
    }
    Ok(())
}

fn chosen_nc_plan(ctx: &Ctx, cfg: &RunConfig, start: PhasePoint, s_f: f64) -> Result<OptimalPlan> {
    let Ctx { sys, lc, gf } = ctx;
    match (cfg.x1f, cfg.branch) {
        (Some(x1f), branch) => plan_nc_to(sys, lc, gf, start, x1f, branch.unwrap_or(Branch::Upper), s_f),
        (None, Some(branch)) => {
            let plans = plan_nc_alternatives(sys, lc, gf, start, s_f)?;
            let n = plans.len();
            plans
                .into_iter()
                .find(|p| p.branch.is_none() || p.branch == Some(branch) || n == 1)
                .ok_or_else(|| Error::Numerical("no plan on the requested branch".into()))
        }
        (None, None) => plan_nc(sys, lc, gf, start, s_f),
    }
}

fn plan_nc_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (start, s_f) = (cfg.start()?, cfg.scaled_time()?);
    let dir = out_dir(cfg)?;
    let ctx = setup(cfg)?;
    let plan = chosen_nc_plan(&ctx, cfg, start, s_f)?;
    let mut fields = serde_json::to_value(&plan)?
        .as_object()
        .cloned()
        .unwrap_or_default();
    emit_plan(&ctx, cfg, &dir, &plan, &mut fields)?;
    finish(&dir, summary("plan-nc", Value::Object(fields)), EXIT_OK)
}

fn plan_total_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (start, s_f) = (cfg.start()?, cfg.scaled_time()?);
    let dir = out_dir(cfg)?;
    let ctx = setup(cfg)?;
    let (plan, landscape) = plan_total(&ctx.sys, &ctx.lc, &ctx.gf, start, s_f)?;
    write_file(&dir, "landscape.csv", |w| landscape.write_csv(w))?;
    let opt = landscape.global_opt;
    let mut fields = json!({
        "x1f_opt": opt.x1f,
        "branch": opt.branch,
        "case": opt.case,
        "W_min": opt.work.total,
        "dE": opt.work.delta_e,
        "Wnc": opt.work.w_nc,
        "boundary": landscape.boundary,
        "interior_roots": landscape.interior_roots,
        "plan": plan,
    })
    .as_object()
    .cloned()
    .unwrap_or_default();
    emit_plan(&ctx, cfg, &dir, &plan, &mut fields)?;
    finish(&dir, summary("plan-total", Value::Object(fields)), EXIT_OK)
}

struct Row {
    x10: f64,
    s_f: f64,
    x1f: f64,
    work: f64,
    case: &'static str,
}

fn sweep_point(ctx: &Ctx, objective: Objective, start: PhasePoint, s_f: f64) -> Result<Row> {
    let Ctx { sys, lc, gf } = ctx;
    let (x1f, work, case) = match objective {
        Objective::Nc => {
            let p = plan_nc(sys, lc, gf, start, s_f)?;
            (p.x1f, p.w_nc_min, p.endpoint_case)
        }
        Objective::Total => {
            let o = optimal_endpoint_total(sys, lc, gf, start, s_f)?.global_opt;
            (o.x1f, o.work.total, o.case)
        }
    };
    Ok(Row {
        x10: start.x1,
        s_f,
        x1f,
        work,
        case: case.as_str(),
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg
        .sf_grid
        .ok_or_else(|| Error::Usage("--sf-grid is required".into()))?;
    let sfs = grid.values(cfg.log_grid)?;
    let x20 = cfg.x20.unwrap_or(0.0);
    let x10s = match cfg.x10_grid {
        Some(g) => g.values(false)?,
        None => vec![cfg.start()?.x1],
    };
    if cfg.find_critical && (cfg.x10_grid.is_some() || cfg.objective != Objective::Total) {
        return Err(Error::Usage(
            "--find-critical needs a single --x10 and the total-work objective".into(),
        ));
    }
    let dir = out_dir(cfg)?;
    let ctx = setup(cfg)?;
    let points: Vec<(f64, f64)> = x10s
        .iter()
        .flat_map(|&x| sfs.iter().map(move |&s| (x, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let rows: Vec<Row> = pool.install(|| {
        points
            .par_iter()
            .map(|&(x10, s_f)| sweep_point(&ctx, cfg.objective, PhasePoint::new(x10, x20), s_f))
            .collect::<Result<_>>()
    })?;

    let with_x10 = cfg.x10_grid.is_some();
    write_file(&dir, "sweep.csv", |w| {
        writeln!(w, "{}sf,x1f_opt,W_min,case", if with_x10 { "x10," } else { "" })?;
        for r in &rows {
            if with_x10 {
                write!(w, "{},", r.x10)?;
            }
            writeln!(w, "{},{},{},{}", r.s_f, r.x1f, r.work, r.case)?;
        }
        Ok(())
    })?;

    let mut fields = json!({
        "objective": cfg.objective,
        "rows": rows.len(),
        "sf_range": [grid.lo, grid.hi],
    })
    .as_object()
    .cloned()
    .unwrap_or_default();
    if cfg.find_critical {
        let start = PhasePoint::new(x10s[0], x20);
        let crit = critical_time(&ctx.sys, &ctx.lc, &ctx.gf, start, (grid.lo, grid.hi))?;
        fields.insert("s_f_star".into(), crit.map(|c| c.s_f_star).into());
        fields.insert("critical".into(), serde_json::to_value(crit)?);
    }
    if rows.len() == 1 {
        let r = &rows[0];
        fields.insert("x1f_opt".into(), r.x1f.into());
        fields.insert("W_min".into(), r.work.into());
        fields.insert("case".into(), r.case.into());
    }
    finish(&dir, summary("sweep", Value::Object(fields)), EXIT_OK)
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let (start, s_f) = (cfg.start()?, cfg.scaled_time()?);
    let dir = out_dir(cfg)?;
    let ctx = setup(cfg)?;
    let icfg = cfg.integrator();
    let t_f = s_f * ctx.sys.mu();
    let mut fields = Map::new();
    let force = match cfg.drive {
        Drive::Free => ForceProfile::zero(),
        Drive::Nc | Drive::Total => {
            let plan = match cfg.drive {
                Drive::Nc => chosen_nc_plan(&ctx, cfg, start, s_f)?,
                _ => plan_total(&ctx.sys, &ctx.lc, &ctx.gf, start, s_f)?.0,
            };
            fields.insert("plan".into(), serde_json::to_value(&plan)?);
            synthesize_force(&ctx.sys, &plan)?
        }
    };
    let traj = integrate_driven(&ctx.sys, start, &force, t_f, &icfg)?;
    write_file(&dir, "trajectory.csv", |w| traj.write_csv(w))?;
    write_file(&dir, "cycle.csv", |w| ctx.lc.write_csv(w))?;
    let end = traj.last();
    fields.insert("drive".into(), serde_json::to_value(cfg.drive)?);
    fields.insert("t_f".into(), t_f.into());
    fields.insert("final".into(), serde_json::to_value(end)?);
    fields.insert("distance_to_cycle".into(), ctx.lc.distance(end).into());
    fields.insert(
        "work".into(),
        serde_json::to_value(work_breakdown(&ctx.sys, &traj))?,
    );
    if let Some(h) = cfg.free_horizon {
        let free = integrate_driven(&ctx.sys, start, &ForceProfile::zero(), h, &icfg)?;
        write_file(&dir, "free.csv", |w| free.write_csv(w))?;
        fields.insert("free_final".into(), serde_json::to_value(free.last())?);
        fields.insert(
            "free_distance_to_cycle".into(),
            ctx.lc.distance(free.last()).into(),
        );
    }
    finish(&dir, summary("simulate", Value::Object(fields)), EXIT_OK)
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let dir = out_dir(cfg)?;
    let ctx = setup(cfg)?;
    let report = run_suite(&ctx.sys, &ctx.lc, &ctx.gf, &cfg.integrator())?;
    let passed = report.passed();
    let failures = report.failures().count();
    let m = summary(
        "verify",
        json!({ "passed": passed, "failures": failures, "checks": report.checks }),
    );
    finish(&dir, m, if passed { EXIT_OK } else { EXIT_NUMERICAL })
}
