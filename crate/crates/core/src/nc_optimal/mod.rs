//! Protocols of minimal non-conservative work.
//!
//! Extremals satisfy `x2 sqrt(h(x1)) = C1`, so `g(x1(t)) = C1 t + C0` is
//! linear in time and the whole path follows from inverting `g`. Work is
//! only spent in the dissipative region `|x1| >= b`; start and end points
//! are joined to the extremal by velocity jumps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force::{ForceProfile, Impulse};
use crate::limit_cycle::{Branch, LimitCycle};
use crate::system::{LienardSystem, PhasePoint};
use crate::trajectory::Trajectory;

mod gfunction;

pub use gfunction::{g_eval, g_invert, GFunction};

/// How the final point on the cycle was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndpointCase {
    /// Rightmost (leftmost) point of the cycle, `x2f = 0`.
    #[serde(rename = "T1_extreme")]
    T1Extreme,
    /// `x1f = x10`: the oscillator rests and is kicked onto the cycle.
    #[serde(rename = "T2_stay")]
    T2Stay,
    #[serde(rename = "MT1")]
    Mt1,
    #[serde(rename = "MT2")]
    Mt2,
    #[serde(rename = "MT3")]
    Mt3,
    /// Endpoint supplied by the caller.
    #[serde(rename = "prescribed")]
    Prescribed,
}

impl EndpointCase {
    pub fn as_str(self) -> &'static str {
        match self {
            EndpointCase::T1Extreme => "T1_extreme",
            EndpointCase::T2Stay => "T2_stay",
            EndpointCase::Mt1 => "MT1",
            EndpointCase::Mt2 => "MT2",
            EndpointCase::Mt3 => "MT3",
            EndpointCase::Prescribed => "prescribed",
        }
    }
}

/// Physical connection time `t_f = mu s_f`.
pub fn connection_time(sys: &LienardSystem, s_f: f64) -> f64 {
    sys.mu() * s_f
}

fn check_feasible(b: f64, x10: f64, x1f: f64) -> Result<f64> {
    if !(x10.is_finite() && x1f.is_finite()) {
        return Err(Error::domain("non-finite endpoint"));
    }
    if x10.abs() < b || x1f.abs() < b {
        return Err(Error::NoSolution(format!(
            "endpoints {x10} and {x1f} must satisfy |x| >= b = {b}"
        )));
    }
    if x10.signum() != x1f.signum() {
        return Err(Error::NoSolution(format!(
            "endpoints {x10} and {x1f} lie in opposite half-planes"
        )));
    }
    Ok(x10.signum())
}

/// Extremal joining `x10` to `x1f` in time `t_f`.
#[derive(Debug, Clone)]
pub struct ElPath {
    gf: GFunction,
    sign: f64,
    x10: f64,
    x1f: f64,
    t_f: f64,
    c0: f64,
    c1: f64,
}

pub fn solve_el_path(gf: &GFunction, x10: f64, x1f: f64, t_f: f64) -> Result<ElPath> {
    let sign = check_feasible(gf.b(), x10, x1f)?;
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::domain(format!("t_f must be positive, got {t_f}")));
    }
    let c0 = gf.eval(x10.abs())?;
    let c1 = (gf.eval(x1f.abs())? - c0) / t_f;
    Ok(ElPath {
        gf: gf.clone(),
        sign,
        x10,
        x1f,
        t_f,
        c0,
        c1,
    })
}

impl ElPath {
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// First integral `x2 sqrt(h(x1))`, taken in the right half-plane.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    /// `+1` for the right half-plane, `-1` for the left.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn is_constant(&self) -> bool {
        self.c1 == 0.0
    }

    pub fn position(&self, t: f64) -> f64 {
        if self.c1 == 0.0 || t <= 0.0 {
            return self.x10;
        }
        if t >= self.t_f {
            return self.x1f;
        }
        let y = (self.c1 * t + self.c0).max(0.0);
        self.gf.invert(y).map_or(f64::NAN, |x| x.copysign(self.sign))
    }

    /// Velocity of the extremal when it passes through `x1`.
    pub fn velocity_at(&self, x1: f64) -> f64 {
        if self.c1 == 0.0 {
            0.0
        } else {
            self.sign * self.c1 / self.gf.derivative(x1)
        }
    }

    pub fn at(&self, t: f64) -> PhasePoint {
        let x1 = self.position(t);
        PhasePoint::new(x1, self.velocity_at(x1))
    }

    /// `x2(0+)`.
    pub fn initial_velocity(&self) -> f64 {
        self.velocity_at(self.x10)
    }

    /// `x2(t_f-)`.
    pub fn final_velocity(&self) -> f64 {
        self.velocity_at(self.x1f)
    }

    /// Signed first integral at time `t`; constant along the path.
    pub fn first_integral(&self, t: f64) -> f64 {
        let p = self.at(t);
        self.sign * p.x2 * self.gf.derivative(p.x1)
    }
}

/// Optimal protocol: extremal path plus the two boundary kicks.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalPlan {
    pub mu: f64,
    pub x10: f64,
    pub x20: f64,
    pub x1f: f64,
    pub x2f: f64,
    pub t_f: f64,
    pub s_f: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "case")]
    pub endpoint_case: EndpointCase,
    pub branch: Option<Branch>,
    pub impulse_start: f64,
    pub impulse_end: f64,
    #[serde(rename = "wnc_min")]
    pub w_nc_min: f64,
    #[serde(skip)]
    path: ElPath,
}

impl OptimalPlan {
    pub fn path(&self) -> &ElPath {
        &self.path
    }

    pub fn start(&self) -> PhasePoint {
        PhasePoint::new(self.x10, self.x20)
    }

    pub fn end(&self) -> PhasePoint {
        PhasePoint::new(self.x1f, self.x2f)
    }

    /// The planned trajectory on `n` equal intervals, with the jumps at both
    /// ends recorded as repeated time stamps.
    pub fn trajectory(&self, n: usize) -> Result<Trajectory> {
        let n = n.max(2);
        let mut times = vec![0.0];
        let mut states = vec![self.start()];
        for i in 0..=n {
            let t = self.t_f * i as f64 / n as f64;
            times.push(t);
            states.push(self.path.at(t));
        }
        times.push(self.t_f);
        states.push(self.end());
        Trajectory::new(times, states, None)
    }
}

/// Plan joining `start` to an arbitrary feasible `end` in time `t_f`.
pub fn plan_between(
    sys: &LienardSystem,
    gf: &GFunction,
    start: PhasePoint,
    end: PhasePoint,
    t_f: f64,
    case: EndpointCase,
    branch: Option<Branch>,
) -> Result<OptimalPlan> {
    if !(start.is_finite() && end.is_finite()) {
        return Err(Error::domain("non-finite boundary point"));
    }
    let path = solve_el_path(gf, start.x1, end.x1, t_f)?;
    let (v0, vf) = (path.initial_velocity(), path.final_velocity());
    if !(v0.is_finite() && vf.is_finite()) {
        return Err(Error::SingularForce(
            "extremal leaves or reaches h = 0 with non-zero first integral".into(),
        ));
    }
    Ok(OptimalPlan {
        mu: sys.mu(),
        x10: start.x1,
        x20: start.x2,
        x1f: end.x1,
        x2f: end.x2,
        t_f,
        s_f: t_f / sys.mu(),
        c0: path.c0,
        c1: path.c1,
        endpoint_case: case,
        branch,
        impulse_start: v0 - start.x2,
        impulse_end: end.x2 - vf,
        w_nc_min: sys.mu() * path.c1 * path.c1 * t_f,
        path,
    })
}

/// Endpoint on the cycle closest in `x1` to `x10`.
pub fn choose_endpoint_nc(sys: &LienardSystem, lc: &LimitCycle, x10: f64) -> Result<(f64, EndpointCase)> {
    if !x10.is_finite() {
        return Err(Error::domain("non-finite x10"));
    }
    if x10.abs() < sys.b() {
        return Err(Error::NoSolution(format!(
            "|x10| = {} lies in the active region |x| < b = {}",
            x10.abs(),
            sys.b()
        )));
    }
    if x10.abs() <= lc.x_max() {
        Ok((x10, EndpointCase::T2Stay))
    } else {
        Ok((lc.x_max().copysign(x10), EndpointCase::T1Extreme))
    }
}

fn check_sf(s_f: f64) -> Result<()> {
    if s_f > 0.0 && s_f.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("s_f must be positive, got {s_f}")))
    }
}

/// Every optimal plan from `start`; two equivalent ones (upper and lower
/// branch) when the start abscissa lies within the cycle.
pub fn plan_nc_alternatives(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    s_f: f64,
) -> Result<Vec<OptimalPlan>> {
    check_sf(s_f)?;
    let t_f = connection_time(sys, s_f);
    let (x1f, case) = choose_endpoint_nc(sys, lc, start.x1)?;
    match case {
        EndpointCase::T1Extreme => Ok(vec![plan_between(
            sys,
            gf,
            start,
            PhasePoint::new(x1f, 0.0),
            t_f,
            case,
            None,
        )?]),
        _ => [Branch::Upper, Branch::Lower]
            .into_iter()
            .map(|br| {
                let end = PhasePoint::new(x1f, lc.branch_velocity(x1f, br)?);
                plan_between(sys, gf, start, end, t_f, case, Some(br))
            })
            .collect(),
    }
}

/// Plan of minimal non-conservative work. Ties between the two branches are
/// broken towards the smaller final kick.
pub fn plan_nc(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    s_f: f64,
) -> Result<OptimalPlan> {
    let plans = plan_nc_alternatives(sys, lc, gf, start, s_f)?;
    plans
        .into_iter()
        .reduce(|a, b| {
            if b.impulse_end.abs() < a.impulse_end.abs() {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::Numerical("no candidate plan".into()))
}

/// Plan to a caller-chosen point `(x1f, s_branch(x1f))` of the cycle.
pub fn plan_nc_to(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    x1f: f64,
    branch: Branch,
    s_f: f64,
) -> Result<OptimalPlan> {
    check_sf(s_f)?;
    let end = PhasePoint::new(x1f, lc.branch_velocity(x1f, branch)?);
    plan_between(
        sys,
        gf,
        start,
        end,
        connection_time(sys, s_f),
        EndpointCase::Prescribed,
        Some(branch),
    )
}

/// Smooth driving force along the extremal plus the two boundary impulses.
pub fn synthesize_force(sys: &LienardSystem, plan: &OptimalPlan) -> Result<ForceProfile> {
    let path = plan.path.clone();
    let b = sys.b();
    if path.c1 != 0.0 && plan.x10.abs().min(plan.x1f.abs()) <= b {
        return Err(Error::SingularForce(format!(
            "h vanishes on the path from {} to {}",
            plan.x10, plan.x1f
        )));
    }
    let (h, dh, dv) = (sys.h().clone(), sys.dh().clone(), sys.dv().clone());
    let (mu, c1, sign) = (sys.mu(), path.c1, path.sign);
    let smooth = move |t: f64| {
        let x1 = path.position(t);
        if c1 == 0.0 {
            return dv.eval(x1);
        }
        let y = x1.abs();
        let hy = h.eval(y);
        sign * (-c1 * c1 * dh.eval(y) / (2.0 * hy * hy) + mu * c1 * hy.sqrt() + dv.eval(y))
    };
    let mut impulses = Vec::new();
    if plan.impulse_start != 0.0 {
        impulses.push(Impulse {
            time: 0.0,
            delta_v: plan.impulse_start,
        });
    }
    if plan.impulse_end != 0.0 {
        impulses.push(Impulse {
            time: plan.t_f,
            delta_v: plan.impulse_end,
        });
    }
    ForceProfile::new(Arc::new(smooth), impulses)
}

/// `Delta g = g(x_max) - g(|x10|)` for a start outside the cycle, else 0.
fn outside_gap(sys: &LienardSystem, lc: &LimitCycle, gf: &GFunction, x10: f64) -> Result<f64> {
    let (x1f, case) = choose_endpoint_nc(sys, lc, x10)?;
    match case {
        EndpointCase::T1Extreme => Ok(gf.eval(x1f.abs())? - gf.eval(x10.abs())?),
        _ => Ok(0.0),
    }
}

/// Minimal non-conservative work `(Delta g)^2 / s_f`.
pub fn wnc_min(sys: &LienardSystem, lc: &LimitCycle, gf: &GFunction, x10: f64, s_f: f64) -> Result<f64> {
    check_sf(s_f)?;
    let dg = outside_gap(sys, lc, gf, x10)?;
    Ok(dg * dg / s_f)
}

/// Shortest scaled time compatible with a work budget.
pub fn speed_limit(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    x10: f64,
    w_budget: f64,
) -> Result<f64> {
    if !(w_budget > 0.0) {
        return Err(Error::domain(format!(
            "work budget must be positive, got {w_budget}"
        )));
    }
    let dg = outside_gap(sys, lc, gf, x10)?;
    Ok(dg * dg / w_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::IntegratorConfig;
    use crate::limit_cycle::find_limit_cycle;
    use crate::system::make_van_der_pol;

    fn setup() -> (LienardSystem, LimitCycle, GFunction) {
        let sys = make_van_der_pol(0.1).unwrap();
        let lc = find_limit_cycle(&sys, &IntegratorConfig::verification()).unwrap();
        let gf = GFunction::new(&sys);
        (sys, lc, gf)
    }

    #[test]
    fn constant_path_when_endpoints_coincide() {
        let gf = GFunction::new(&make_van_der_pol(0.1).unwrap());
        let p = solve_el_path(&gf, 1.5, 1.5, 3.0).unwrap();
        assert!(p.is_constant());
        for t in [0.0, 0.7, 3.0] {
            assert_eq!(p.at(t), PhasePoint::new(1.5, 0.0));
        }
    }

    #[test]
    fn decreasing_path_conserves_first_integral() {
        let gf = GFunction::new(&make_van_der_pol(0.1).unwrap());
        let p = solve_el_path(&gf, 5.0, 2.0, 1.0).unwrap();
        let mut prev = 5.0;
        for k in 1..=100 {
            let t = k as f64 / 100.0;
            let x = p.position(t);
            assert!(x < prev);
            prev = x;
            assert!((p.first_integral(t) - p.c1()).abs() < 1e-9);
        }
    }

    #[test]
    fn left_half_plane_is_the_reflection() {
        let gf = GFunction::new(&make_van_der_pol(0.1).unwrap());
        let r = solve_el_path(&gf, 5.0, 2.0, 1.0).unwrap();
        let l = solve_el_path(&gf, -5.0, -2.0, 1.0).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert_eq!(l.at(t), r.at(t).reflect());
        }
    }

    #[test]
    fn infeasible_endpoints() {
        let gf = GFunction::new(&make_van_der_pol(0.1).unwrap());
        assert!(matches!(
            solve_el_path(&gf, 5.0, -2.0, 1.0),
            Err(Error::NoSolution(_))
        ));
        assert!(matches!(
            solve_el_path(&gf, 0.5, 2.0, 1.0),
            Err(Error::NoSolution(_))
        ));
        assert!(matches!(solve_el_path(&gf, 2.0, 3.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn endpoint_selection() {
        let (sys, lc, _) = setup();
        assert_eq!(
            choose_endpoint_nc(&sys, &lc, 1.5).unwrap(),
            (1.5, EndpointCase::T2Stay)
        );
        let (x, case) = choose_endpoint_nc(&sys, &lc, 5.0).unwrap();
        assert_eq!(case, EndpointCase::T1Extreme);
        assert!((x - 2.00010).abs() < 1e-4);
        let (xl, _) = choose_endpoint_nc(&sys, &lc, -3.0).unwrap();
        assert_eq!(xl, -lc.x_max());
        assert!(matches!(
            choose_endpoint_nc(&sys, &lc, 0.3),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn inside_start_has_zero_work_and_constant_force() {
        let (sys, lc, gf) = setup();
        let plan = plan_nc(&sys, &lc, &gf, PhasePoint::new(1.5, 0.0), 10.0).unwrap();
        assert_eq!(plan.w_nc_min, 0.0);
        assert_eq!(plan.endpoint_case, EndpointCase::T2Stay);
        assert_eq!(plan.branch, Some(Branch::Lower));
        let f = synthesize_force(&sys, &plan).unwrap();
        assert_eq!(f.smooth_at(0.3), 1.5);
        assert_eq!(f.impulses().len(), 1);
        assert_eq!(
            plan_nc_alternatives(&sys, &lc, &gf, PhasePoint::new(1.5, 0.0), 10.0)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn downward_kick_when_moving_inwards() {
        let (sys, lc, gf) = setup();
        let plan = plan_nc(&sys, &lc, &gf, PhasePoint::new(5.0, 0.0), 10.0).unwrap();
        assert!(plan.c1 < 0.0);
        assert!(plan.impulse_start < 0.0);
        assert_eq!(plan.x2f, 0.0);
    }

    #[test]
    fn work_value_and_scaling() {
        let (sys, lc, gf) = setup();
        assert_eq!(wnc_min(&sys, &lc, &gf, 1.9, 3.0).unwrap(), 0.0);
        let w10 = wnc_min(&sys, &lc, &gf, 5.0, 10.0).unwrap();
        assert!((w10 - 10.06).abs() < 0.01, "{w10}");
        let w20 = wnc_min(&sys, &lc, &gf, 5.0, 20.0).unwrap();
        assert!((w10 / w20 - 2.0).abs() < 1e-12);
        let plan = plan_nc(&sys, &lc, &gf, PhasePoint::new(5.0, 0.0), 10.0).unwrap();
        assert!((plan.w_nc_min - w10).abs() < 1e-12 * w10);
    }

    #[test]
    fn speed_limit_inverts_work() {
        let (sys, lc, gf) = setup();
        let w = wnc_min(&sys, &lc, &gf, 5.0, 10.0).unwrap();
        assert!((speed_limit(&sys, &lc, &gf, 5.0, w).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(speed_limit(&sys, &lc, &gf, 1.5, 0.1).unwrap(), 0.0);
        assert!(speed_limit(&sys, &lc, &gf, 5.0, 1e300).unwrap() < 1e-290);
        assert!(speed_limit(&sys, &lc, &gf, 5.0, 0.0).is_err());
    }

    #[test]
    fn case_labels_serialise() {
        assert_eq!(
            serde_json::to_string(&EndpointCase::T1Extreme).unwrap(),
            "\"T1_extreme\""
        );
        assert_eq!(serde_json::to_string(&EndpointCase::Mt2).unwrap(), "\"MT2\"");
    }
}
