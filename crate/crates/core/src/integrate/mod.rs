//! Time integration of the driven and free dynamics.
//!
//! Impulses are applied as exact velocity jumps by splitting the integration
//! interval at their time stamps; both the pre- and post-jump samples end up
//! in the trajectory. The non-conservative work is integrated alongside the
//! state.

mod envelope;
mod stepper;

use serde::{Deserialize, Serialize};

pub use envelope::{envelope_amplitude, small_mu_envelope};

use crate::error::{Error, Result};
use crate::force::ForceProfile;
use crate::numeric::brent;
use crate::system::{LienardSystem, PhasePoint};
use crate::trajectory::Trajectory;
use stepper::{Dynamics, State, Step, StepLimit, Stepper};

/// Crossing times are refined until `|x2| < EVENT_TOL`.
pub const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed { dt: f64 },
    Rk45Adaptive { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    pub max_steps: usize,
    /// When set, Hermite-interpolated samples are inserted between accepted
    /// steps so that linear interpolation of the recorded output stays
    /// within this distance (adaptive method only). `None` records accepted
    /// steps only.
    #[serde(default = "default_sample_tol")]
    pub sample_tol: Option<f64>,
}

fn default_sample_tol() -> Option<f64> {
    Some(IntegratorConfig::DEFAULT_SAMPLE_TOL)
}

impl IntegratorConfig {
    pub const DEFAULT_MAX_STEPS: usize = 5_000_000;
    pub const DEFAULT_SAMPLE_TOL: f64 = 1e-6;

    pub fn rk4(dt: f64) -> Self {
        Self {
            method: Method::Rk4Fixed { dt },
            max_steps: Self::DEFAULT_MAX_STEPS,
            sample_tol: None,
        }
    }

    pub fn rk45(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::Rk45Adaptive { rel_tol, abs_tol },
            max_steps: Self::DEFAULT_MAX_STEPS,
            sample_tol: default_sample_tol(),
        }
    }

    /// Tolerances used for verification runs (1e-10).
    pub fn verification() -> Self {
        Self::rk45(1e-10, 1e-10)
    }

    /// Tolerances used for parameter sweeps (1e-8).
    pub fn sweep() -> Self {
        Self::rk45(1e-8, 1e-8)
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Record accepted steps only.
    pub fn sparse(mut self) -> Self {
        self.sample_tol = None;
        self
    }

    pub fn with_sample_tol(mut self, tol: f64) -> Self {
        self.sample_tol = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::domain(format!("rk4_fixed needs dt > 0, got {dt}")))
            }
            Method::Rk45Adaptive { rel_tol, abs_tol } => {
                for (name, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
                    if !(v > 0.0 && v <= 1e-2) {
                        return Err(Error::domain(format!("{name} must lie in (0, 1e-2], got {v}")));
                    }
                }
            }
            _ => {}
        }
        if let Some(tol) = self.sample_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::domain(format!("sample_tol must be positive, got {tol}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be positive"));
        }
        Ok(())
    }

    fn dense_tol(&self) -> Option<f64> {
        match self.method {
            Method::Rk45Adaptive { .. } => self.sample_tol,
            Method::Rk4Fixed { .. } => None,
        }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::verification()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `x2` goes from positive to non-positive.
    Descending,
    /// `x2` goes from negative to non-negative.
    Ascending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Positive,
    Negative,
}

/// Crossing of the section `x2 = 0` in a given direction and half-plane of `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub direction: Direction,
    pub half_plane: HalfPlane,
}

impl EventSpec {
    pub fn section(direction: Direction, half_plane: HalfPlane) -> Self {
        Self {
            direction,
            half_plane,
        }
    }

    /// The Poincare section `{x2 = 0, x1 > 0}` crossed clockwise.
    pub fn poincare() -> Self {
        Self::section(Direction::Descending, HalfPlane::Positive)
    }

    fn brackets(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Descending => a > 0.0 && b <= 0.0,
            Direction::Ascending => a < 0.0 && b >= 0.0,
        }
    }

    fn in_half_plane(&self, x1: f64) -> bool {
        match self.half_plane {
            HalfPlane::Positive => x1 > 0.0,
            HalfPlane::Negative => x1 < 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EventHit {
    pub trajectory: Trajectory,
    pub crossing: PhasePoint,
    pub t_cross: f64,
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<PhasePoint>,
    wnc: Vec<f64>,
    dense_tol: Option<f64>,
}

impl Recorder {
    fn new(start: &State, dense_tol: Option<f64>) -> Self {
        Self {
            times: vec![0.0],
            states: vec![PhasePoint::new(start[0], start[1])],
            wnc: vec![start[2]],
            dense_tol,
        }
    }

    fn point(&mut self, t: f64, y: &State) {
        self.times.push(t);
        self.states.push(PhasePoint::new(y[0], y[1]));
        self.wnc.push(y[2]);
    }

    fn step(&mut self, step: &Step) {
        if let Some(tol) = self.dense_tol {
            let n = step.subdivisions(tol);
            for k in 1..n {
                let theta = k as f64 / n as f64;
                let y = step.interpolate(theta);
                self.point(step.t0 + theta * step.h(), &y);
            }
        }
        self.point(step.t1, &step.y1);
    }

    fn finish(self, force: Option<ForceProfile>) -> Result<Trajectory> {
        Ok(Trajectory::new(self.times, self.states, force)?.with_cumulative_wnc(self.wnc))
    }
}

fn step_limit_error(rec: Recorder, force: Option<ForceProfile>, t: f64, steps: usize) -> Error {
    match rec.finish(force) {
        Ok(partial) => Error::IntegrationFailed {
            t,
            steps,
            partial: Box::new(partial),
        },
        Err(e) => e,
    }
}

/// Integrates the driven system from `start` over `[0, t_f]`.
pub fn integrate_driven(
    sys: &LienardSystem,
    start: PhasePoint,
    force: &ForceProfile,
    t_f: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !start.is_finite() {
        return Err(Error::domain("start point must be finite"));
    }
    if !(t_f >= 0.0 && t_f.is_finite()) {
        return Err(Error::domain(format!("t_f must be non-negative, got {t_f}")));
    }
    if let Some(imp) = force.impulses().iter().find(|i| i.time < 0.0 || i.time > t_f) {
        return Err(Error::domain(format!(
            "impulse at t = {} lies outside [0, {t_f}]",
            imp.time
        )));
    }

    let dynamics = Dynamics {
        sys,
        force: Some(force),
    };
    let mut stepper = Stepper::new(dynamics, cfg.method, cfg.max_steps);
    let mut y: State = [start.x1, start.x2, 0.0];
    let mut t = 0.0;
    let mut rec = Recorder::new(&y, cfg.dense_tol());

    let mut stops: Vec<(f64, Option<f64>)> = force
        .impulses()
        .iter()
        .map(|i| (i.time, Some(i.delta_v)))
        .collect();
    stops.push((t_f, None));

    for (t_stop, jump) in stops {
        let mut f = stepper.dynamics.rhs(t, &y);
        while t < t_stop {
            match stepper.step_toward(t, &y, &f, t_stop) {
                Ok(step) => {
                    rec.step(&step);
                    t = step.t1;
                    y = step.y1;
                    f = step.f1;
                }
                Err(StepLimit) => {
                    let steps = stepper.attempts;
                    return Err(step_limit_error(rec, Some(force.clone()), t, steps));
                }
            }
        }
        if let Some(dv) = jump {
            y[1] += dv;
            rec.point(t, &y);
        }
    }
    rec.finish(Some(force.clone()))
}

/// Integrates the free system until the first crossing of `event`.
///
/// The starting point itself is never reported, so a start on the section
/// yields the first return.
pub fn integrate_until_event(
    sys: &LienardSystem,
    start: PhasePoint,
    event: EventSpec,
    cfg: &IntegratorConfig,
    t_max: f64,
) -> Result<EventHit> {
    integrate_until_event_with(sys, start, event, cfg, t_max, cfg.dense_tol())
}

pub(crate) fn integrate_until_event_with(
    sys: &LienardSystem,
    start: PhasePoint,
    event: EventSpec,
    cfg: &IntegratorConfig,
    t_max: f64,
    dense_tol: Option<f64>,
) -> Result<EventHit> {
    cfg.validate()?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("t_max must be positive, got {t_max}")));
    }
    let dynamics = Dynamics { sys, force: None };
    let mut stepper = Stepper::new(dynamics, cfg.method, cfg.max_steps);
    let mut y: State = [start.x1, start.x2, 0.0];
    let mut f = stepper.dynamics.rhs(0.0, &y);
    let mut t = 0.0;
    let mut rec = Recorder::new(&y, dense_tol);

    while t < t_max {
        let step = match stepper.step_toward(t, &y, &f, t_max) {
            Ok(s) => s,
            Err(StepLimit) => {
                let steps = stepper.attempts;
                return Err(step_limit_error(rec, None, t, steps));
            }
        };
        if event.brackets(step.y0[1], step.y1[1]) {
            let partial = refine_crossing(&stepper, &step)?;
            if event.in_half_plane(partial.y1[0]) {
                rec.step(&partial);
                let crossing = PhasePoint::new(partial.y1[0], partial.y1[1]);
                return Ok(EventHit {
                    trajectory: rec.finish(None)?,
                    crossing,
                    t_cross: partial.t1,
                });
            }
        }
        rec.step(&step);
        t = step.t1;
        y = step.y1;
        f = step.f1;
    }
    Err(Error::EventNotFound { t_max })
}

/// Shrinks `step` so that it ends on `x2 = 0`, re-stepping from its start
/// with the same scheme rather than trusting the interpolant.
fn refine_crossing(stepper: &Stepper<'_>, step: &Step) -> Result<Step> {
    let eval = |tau: f64| stepper.trial(step.t0, &step.y0, &step.f0, tau).0;
    let h = step.h();
    let mut tau = if step.y1[1] == 0.0 {
        h
    } else {
        brent(|tau| eval(tau)[1], 0.0, h, 1e-15 * h.max(1.0))?
    };
    let mut y = eval(tau);
    for _ in 0..8 {
        if y[1].abs() < EVENT_TOL {
            break;
        }
        let f = stepper.dynamics.rhs(step.t0 + tau, &y);
        if f[1] == 0.0 {
            break;
        }
        tau -= y[1] / f[1];
        y = eval(tau);
    }
    if y[1].abs() >= EVENT_TOL {
        return Err(Error::Numerical(format!(
            "crossing refinement stalled at |x2| = {:e}",
            y[1].abs()
        )));
    }
    let t1 = step.t0 + tau;
    Ok(Step {
        t0: step.t0,
        y0: step.y0,
        f0: step.f0,
        t1,
        y1: y,
        f1: stepper.dynamics.rhs(t1, &y),
    })
}
