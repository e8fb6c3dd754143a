//! Independent checks of the analytic protocols.
//!
//! Each oracle recomputes a quantity by a different route than the solver
//! it validates: Simpson quadrature of the dissipated power, a shooting
//! solution of the extremal ODE that never touches `g`, forward integration
//! of the synthesised force, finite-difference adjoints, and random
//! admissible perturbations of the optimal path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::force::ForceProfile;
use crate::integrate::{integrate_driven, IntegratorConfig};
use crate::limit_cycle::{Branch, LimitCycle};
use crate::nc_optimal::{
    plan_nc, plan_nc_to, synthesize_force, ElPath, EndpointCase, GFunction, OptimalPlan,
};
use crate::numeric::{composite_simpson, simpson_samples, CubicSpline};
use crate::system::{LienardSystem, PhasePoint};
use crate::total_work::plan_total;
use crate::trajectory::Trajectory;

pub const TERMINAL_TOL: f64 = 1e-3;
pub const TUBE_TOL: f64 = 1e-2;
pub const TUBE_PERIODS: f64 = 5.0;
// chord error of the recorded free orbit, far below the tube width
const TUBE_SAMPLE_TOL: f64 = 1e-4;
pub const ADJOINT_TOL: f64 = 1e-6;
pub const ADJOINT_STEP: f64 = 1e-5;
pub const TRANSVERSALITY_TOL: f64 = 1e-8;
pub const PERTURBATION_COUNT: usize = 50;
pub const PERTURBATION_EPS: f64 = 1e-2;
pub const PERTURBATION_TOL: f64 = 1e-10;
pub const PERTURBATION_SEED: u64 = 0x5eed_1e7a;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|measured - expected| <= tolerance`.
    pub fn close(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            pass: (measured - expected).abs() <= tolerance,
        }
    }

    /// `measured <= tolerance` for a non-negative error measure.
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: 0.0,
            tolerance,
            pass: measured <= tolerance,
        }
    }

    /// `measured >= -tolerance`.
    pub fn at_least_zero(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: 0.0,
            tolerance,
            pass: measured >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Appends `other` with every check name prefixed by `scope`.
    pub fn extend_scoped(&mut self, scope: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{scope}: {}", c.name);
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Richardson estimate `|S_2n - S_n| / 15`.
    pub error: f64,
}

/// `mu int h(x1) x2^2 dt` along `path` by composite Simpson on `n` and `2n`
/// intervals.
pub fn oracle_wnc_quadrature(
    sys: &LienardSystem,
    path: impl Fn(f64) -> PhasePoint,
    t_f: f64,
    n: usize,
) -> Result<QuadratureEstimate> {
    if n < 1000 {
        return Err(Error::domain(format!("quadrature needs n >= 1000, got {n}")));
    }
    if !(t_f >= 0.0) {
        return Err(Error::domain(format!("t_f must be non-negative, got {t_f}")));
    }
    let rate = |t: f64| sys.dissipation_rate(path(t));
    let coarse = composite_simpson(rate, 0.0, t_f, n);
    let fine = composite_simpson(rate, 0.0, t_f, 2 * n);
    let error = (fine - coarse).abs() / 15.0;
    Ok(QuadratureEstimate {
        value: fine + (fine - coarse) / 15.0,
        error,
    })
}

const BVP_STEPS: usize = 4000;

/// RK4 for `h(x) x'' + h'(x) x'^2 / 2 = 0`; `None` once `h` stops being positive.
fn shoot(sys: &LienardSystem, x0: f64, v0: f64, t_f: f64) -> Option<Vec<(f64, f64)>> {
    let accel = |x: f64, v: f64| {
        let hx = sys.h().eval(x);
        if hx > 0.0 {
            Some(-sys.dh().eval(x) * v * v / (2.0 * hx))
        } else {
            None
        }
    };
    let dt = t_f / BVP_STEPS as f64;
    let mut out = Vec::with_capacity(BVP_STEPS + 1);
    let (mut x, mut v) = (x0, v0);
    out.push((x, v));
    for _ in 0..BVP_STEPS {
        let (k1x, k1v) = (v, accel(x, v)?);
        let (k2x, k2v) = (v + 0.5 * dt * k1v, accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)?);
        let (k3x, k3v) = (v + 0.5 * dt * k2v, accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)?);
        let (k4x, k4v) = (v + dt * k3v, accel(x + dt * k3x, v + dt * k3v)?);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(x.is_finite() && v.is_finite()) {
            return None;
        }
        out.push((x, v));
    }
    Some(out)
}

/// Shooting solution of the extremal equation with `x(0) = x10`,
/// `x(t_f) = x1f`. Uses only `h` and `h'`; the answer is sampled on a
/// uniform grid of 4000 steps.
pub fn oracle_el_bvp(sys: &LienardSystem, x10: f64, x1f: f64, t_f: f64) -> Result<Trajectory> {
    let b = sys.b();
    if x10.abs() < b || x1f.abs() < b || x10.signum() != x1f.signum() {
        return Err(Error::NoSolution(format!(
            "infeasible boundary values {x10}, {x1f}"
        )));
    }
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::domain(format!("t_f must be positive, got {t_f}")));
    }
    let direction = (x1f - x10).signum();
    // residual along the direction of travel; negative = undershoot
    let miss = |v: f64| -> f64 {
        match shoot(sys, x10, v, t_f) {
            Some(path) => direction * (path[BVP_STEPS].0 - x1f),
            None => 1.0 + (x1f - x10).abs(),
        }
    };

    let mut solution_v = 0.0;
    if x10 != x1f {
        let (mut lo, mut f_lo) = (0.0, miss(0.0));
        let mut hi = (x1f - x10) / t_f;
        let mut f_hi = miss(hi);
        let mut grow = 0;
        while f_hi < 0.0 {
            (lo, f_lo) = (hi, f_hi);
            hi *= 2.0;
            f_hi = miss(hi);
            grow += 1;
            if grow > 60 {
                return Err(Error::Numerical(
                    "shooting could not bracket the initial velocity".into(),
                ));
            }
        }
        // Illinois-modified regula falsi, bisection when the step is poor
        let mut side = 0;
        for _ in 0..200 {
            let mut v = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if !(v > lo.min(hi) && v < lo.max(hi)) {
                v = 0.5 * (lo + hi);
            }
            let fv = miss(v);
            solution_v = v;
            if fv.abs() < 1e-14 || (hi - lo).abs() < 1e-15 * v.abs().max(1.0) {
                break;
            }
            if fv < 0.0 {
                (lo, f_lo) = (v, fv);
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                (hi, f_hi) = (v, fv);
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
        }
    }
    let path = shoot(sys, x10, solution_v, t_f)
        .ok_or_else(|| Error::Numerical("shooting diverged at the converged velocity".into()))?;
    let end_miss = (path[BVP_STEPS].0 - x1f).abs();
    if !(end_miss < 1e-10) {
        return Err(Error::Numerical(format!(
            "shooting missed the endpoint by {end_miss:e}"
        )));
    }
    let times = (0..=BVP_STEPS)
        .map(|i| t_f * i as f64 / BVP_STEPS as f64)
        .collect();
    let states = path.into_iter().map(|(x, v)| PhasePoint::new(x, v)).collect();
    Trajectory::new(times, states, None)
}

/// Largest position gap between an analytic extremal and an oracle trajectory.
pub fn max_position_gap(path: &ElPath, oracle: &Trajectory) -> f64 {
    oracle
        .times()
        .iter()
        .zip(oracle.states())
        .map(|(&t, s)| (path.position(t) - s.x1).abs())
        .fold(0.0, f64::max)
}

/// Largest drift of `x2 sqrt(h(x1))` from `C1` on `n` interior samples.
pub fn first_integral_drift(path: &ElPath, n: usize) -> f64 {
    (1..n)
        .map(|i| {
            let t = path.t_f() * i as f64 / n as f64;
            (path.first_integral(t) - path.c1()).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub report: VerificationReport,
    pub driven: Trajectory,
    pub free: Trajectory,
    pub terminal_distance: f64,
    pub tube_distance: f64,
}

/// Drives the system with `force`, then lets it run freely for five periods.
pub fn closed_loop_replay_detailed(
    sys: &LienardSystem,
    lc: &LimitCycle,
    plan: &OptimalPlan,
    force: &ForceProfile,
    cfg: &IntegratorConfig,
) -> Result<Replay> {
    let driven = integrate_driven(sys, plan.start(), force, plan.t_f, cfg)?;
    let terminal_distance = lc.distance(driven.last());
    let free = integrate_driven(
        sys,
        driven.last(),
        &ForceProfile::zero(),
        TUBE_PERIODS * lc.period(),
        &cfg.with_sample_tol(TUBE_SAMPLE_TOL),
    )?;
    let tube_distance = free.states().iter().map(|&p| lc.distance(p)).fold(0.0, f64::max);
    let mut report = VerificationReport::new();
    report.push(Check::below(
        "terminal distance to cycle",
        terminal_distance,
        TERMINAL_TOL,
    ));
    report.push(Check::below(
        "free orbit distance over 5 periods",
        tube_distance,
        TUBE_TOL,
    ));
    Ok(Replay {
        report,
        driven,
        free,
        terminal_distance,
        tube_distance,
    })
}

pub fn closed_loop_replay(
    sys: &LienardSystem,
    lc: &LimitCycle,
    plan: &OptimalPlan,
    force: &ForceProfile,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    Ok(closed_loop_replay_detailed(sys, lc, plan, force, cfg)?.report)
}

/// Checks the costate `p1 = 2 mu h(x1) x2` (with `p2 = 0`) against
/// `dp1/dt = mu h'(x1) x2^2`, and the transversality product at `t_f`.
pub fn adjoint_residuals(sys: &LienardSystem, plan: &OptimalPlan) -> VerificationReport {
    let path = plan.path();
    let mu = sys.mu();
    let p1 = |t: f64| {
        let p = path.at(t);
        2.0 * mu * sys.h().eval(p.x1) * p.x2
    };
    let step = ADJOINT_STEP.min(1e-3 * plan.t_f);
    let n = 200;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let t = plan.t_f * i as f64 / n as f64;
        let p = path.at(t);
        let fd = (p1(t + step) - p1(t - step)) / (2.0 * step);
        let exact = mu * sys.dh().eval(p.x1) * p.x2 * p.x2;
        worst = worst.max((fd - exact).abs());
    }
    let mut report = VerificationReport::new();
    report.push(Check::below("costate p1 evolution residual", worst, ADJOINT_TOL));

    let x1f = plan.x1f;
    let v_minus = path.final_velocity();
    let hf = sys.h().eval(x1f);
    let product = match plan.endpoint_case {
        EndpointCase::T1Extreme | EndpointCase::T2Stay => Some(hf * v_minus * plan.x2f),
        EndpointCase::Mt1 | EndpointCase::Mt2 | EndpointCase::Mt3 => {
            Some(mu * hf * plan.x2f * (2.0 * v_minus - plan.x2f))
        }
        EndpointCase::Prescribed => None,
    };
    if let Some(product) = product {
        report.push(Check::below(
            "transversality product",
            product.abs(),
            TRANSVERSALITY_TOL,
        ));
    }
    report
}

/// Random smooth perturbations `x1 + eps phi(t)` with `phi(0) = phi(t_f) = 0`
/// never lower the dissipated work.
pub fn perturbation_check(
    sys: &LienardSystem,
    plan: &OptimalPlan,
    count: usize,
    eps_max: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if !(eps_max > 0.0 && eps_max <= PERTURBATION_EPS) {
        return Err(Error::domain(format!(
            "perturbation amplitude must lie in (0, 1e-2], got {eps_max}"
        )));
    }
    let n = 2000;
    let t_f = plan.t_f;
    let dt = t_f / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let base: Vec<PhasePoint> = times.iter().map(|&t| plan.path().at(t)).collect();
    let mu = sys.mu();
    let work = |states: &mut dyn Iterator<Item = PhasePoint>| -> f64 {
        let rates: Vec<f64> = states.map(|p| mu * sys.h().eval(p.x1) * p.x2 * p.x2).collect();
        simpson_samples(&rates, dt)
    };
    let w_base = work(&mut base.iter().copied());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let knots = rng.gen_range(3..=8);
        let xs: Vec<f64> = (0..=knots).map(|k| t_f * k as f64 / knots as f64).collect();
        let ys: Vec<f64> = (0..=knots)
            .map(|k| {
                if k == 0 || k == knots {
                    0.0
                } else {
                    rng.gen_range(-1.0..=1.0)
                }
            })
            .collect();
        let spline = CubicSpline::natural(xs, ys);
        let eps = eps_max * rng.gen_range(0.05..=1.0);
        let w =
            work(&mut times.iter().zip(&base).map(|(&t, p)| {
                PhasePoint::new(p.x1 + eps * spline.eval(t), p.x2 + eps * spline.derivative(t))
            }));
        worst = worst.min(w - w_base);
    }
    let mut report = VerificationReport::new();
    report.push(Check::at_least_zero(
        format!("smallest W_nc change over {count} perturbations"),
        worst,
        PERTURBATION_TOL,
    ));
    Ok(report)
}

/// All checks for one optimal plan: quadrature, replay, adjoints, perturbations.
pub fn verify_plan(
    sys: &LienardSystem,
    lc: &LimitCycle,
    plan: &OptimalPlan,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let q = oracle_wnc_quadrature(sys, |t| plan.path().at(t), plan.t_f, 2000)?;
    report.push(Check::close(
        "W_nc quadrature vs mu C1^2 t_f",
        q.value,
        plan.w_nc_min,
        1e-9,
    ));
    report.push(Check::below("quadrature error estimate", q.error, 1e-10));
    let force = synthesize_force(sys, plan)?;
    report.extend_scoped("replay", closed_loop_replay(sys, lc, plan, &force, cfg)?);
    report.extend_scoped("adjoint", adjoint_residuals(sys, plan));
    report.extend_scoped(
        "perturbation",
        perturbation_check(sys, plan, PERTURBATION_COUNT, PERTURBATION_EPS, PERTURBATION_SEED)?,
    );
    Ok(report)
}

fn vdp_g(x: f64) -> f64 {
    let r = (x * x - 1.0).sqrt();
    0.5 * (x * r - (x + r).ln())
}

/// Full suite for one system, on scenarios scaled to its cycle: a start
/// inside the cycle (`x10 = (b + x_max)/2`) and one outside (`2.5 x_max`).
pub fn run_suite(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let (b, x_max) = (sys.b(), lc.x_max());

    if sys.is_van_der_pol() {
        let gap = [1.5, 2.0, 5.0, 9.0]
            .iter()
            .map(|&x| (gf.eval(x).map_or(f64::INFINITY, |g| g) - vdp_g(x)).abs())
            .fold(0.0, f64::max);
        report.push(Check::below("g against closed form", gap, 1e-10));
    }

    let (x10, x1f) = (5.0 * b, 2.0 * b);
    let path = crate::nc_optimal::solve_el_path(gf, x10, x1f, 1.0)?;
    let oracle = oracle_el_bvp(sys, x10, x1f, 1.0)?;
    report.push(Check::below(
        "extremal vs shooting oracle",
        max_position_gap(&path, &oracle),
        1e-8,
    ));
    report.push(Check::below(
        "first integral drift",
        first_integral_drift(&path, 1000),
        1e-9,
    ));

    let inside = PhasePoint::new(0.5 * (b + x_max), 0.0);
    let outside = PhasePoint::new(2.5 * x_max, 0.0);
    let s_f = 10.0;
    for (label, plan) in [
        (
            "inside, upper",
            plan_nc_to(sys, lc, gf, inside, inside.x1, Branch::Upper, s_f)?,
        ),
        (
            "inside, lower",
            plan_nc_to(sys, lc, gf, inside, inside.x1, Branch::Lower, s_f)?,
        ),
        ("outside", plan_nc(sys, lc, gf, outside, s_f)?),
    ] {
        report.extend_scoped(&format!("nc {label}"), verify_plan(sys, lc, &plan, cfg)?);
    }

    let plan = plan_nc(sys, lc, gf, outside, s_f)?;
    let corrupted = synthesize_force(sys, &plan)?.scale_smooth(1.01);
    let replay = closed_loop_replay_detailed(sys, lc, &plan, &corrupted, cfg)?;
    report.push(Check {
        name: "negative control: 1% force error leaves the cycle".into(),
        measured: replay.terminal_distance,
        expected: TERMINAL_TOL,
        tolerance: 0.0,
        pass: replay.terminal_distance > TERMINAL_TOL,
    });

    for (label, start, s_f) in [("inside", inside, 50.0), ("outside", outside, 300.0)] {
        let (plan, _) = plan_total(sys, lc, gf, start, s_f)?;
        report.extend_scoped(&format!("total {label} s_f={s_f}"), adjoint_residuals(sys, &plan));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_van_der_pol;

    #[test]
    fn constant_path_dissipates_nothing() {
        let sys = make_van_der_pol(0.1).unwrap();
        let q = oracle_wnc_quadrature(&sys, |_| PhasePoint::new(1.5, 0.0), 2.0, 1000).unwrap();
        assert_eq!(q.value, 0.0);
        assert!(oracle_wnc_quadrature(&sys, |_| PhasePoint::new(1.5, 0.0), 2.0, 999).is_err());
    }

    #[test]
    fn harmonic_circle_balances_for_tiny_mu() {
        let sys = make_van_der_pol(1e-9).unwrap();
        let circle = |t: f64| PhasePoint::new(2.0 * t.cos(), -2.0 * t.sin());
        let q = oracle_wnc_quadrature(&sys, circle, 2.0 * std::f64::consts::PI, 2000).unwrap();
        assert!(q.value.abs() < 1e-9);
    }

    #[test]
    fn shooting_matches_extremal() {
        let sys = make_van_der_pol(0.1).unwrap();
        let gf = GFunction::new(&sys);
        let path = crate::nc_optimal::solve_el_path(&gf, 5.0, 2.0, 1.0).unwrap();
        let oracle = oracle_el_bvp(&sys, 5.0, 2.0, 1.0).unwrap();
        assert!(max_position_gap(&path, &oracle) < 1e-8);
        let reflected = oracle_el_bvp(&sys, -5.0, -2.0, 1.0).unwrap();
        for (a, b) in oracle.states().iter().zip(reflected.states()) {
            assert_eq!(*b, a.reflect());
        }
        let flat = oracle_el_bvp(&sys, 1.5, 1.5, 1.0).unwrap();
        assert!(flat.states().iter().all(|p| *p == PhasePoint::new(1.5, 0.0)));
    }

    #[test]
    fn shooting_outward() {
        let sys = make_van_der_pol(0.1).unwrap();
        let gf = GFunction::new(&sys);
        let path = crate::nc_optimal::solve_el_path(&gf, 1.2, 3.0, 0.7).unwrap();
        let oracle = oracle_el_bvp(&sys, 1.2, 3.0, 0.7).unwrap();
        assert!(max_position_gap(&path, &oracle) < 1e-8);
    }

    #[test]
    fn report_pass_logic() {
        let mut r = VerificationReport::new();
        r.push(Check::close("a", 1.0, 1.0 + 1e-12, 1e-9));
        r.push(Check::at_least_zero("b", -1e-11, 1e-10));
        assert!(r.passed());
        r.push(Check::below("c", 2.0, 1.0));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }
}
