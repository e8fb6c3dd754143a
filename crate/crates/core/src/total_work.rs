//! Endpoint optimisation for the total work `W = Delta E + W_nc`.
//!
//! Along the cycle, `dE/dx1f = -mu h s(x1f)` while the extremal contributes
//! `d(Delta g^2 / s_f)/dx1f = 2 Delta g sqrt(h) / s_f`, so interior
//! stationary points solve `mu s(x1f) = 2 Delta g / (s_f sqrt(h(x1f)))`.
//! The optimum is the best of those roots and the rightmost point.
//!
//! Every routine works in the right half-plane and reflects the answer back,
//! so point-reflected inputs give exactly reflected outputs.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit_cycle::{Branch, LimitCycle};
use crate::nc_optimal::{connection_time, plan_between, EndpointCase, GFunction, OptimalPlan};
use crate::numeric::brent;
use crate::system::{LienardSystem, PhasePoint};
use crate::trajectory::WorkBreakdown;

pub const SCAN_NODES: usize = 400;
/// Margin that keeps scans off the turning point `x2f = 0`.
pub const EDGE_MARGIN: f64 = 1e-6;
const ROOT_TOL: f64 = 1e-10;
const CRITICAL_REL_TOL: f64 = 1e-9;
const CRITICAL_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LandscapeSample {
    pub x1f: f64,
    pub branch: Branch,
    #[serde(rename = "W")]
    pub w_total: f64,
    #[serde(rename = "dE")]
    pub delta_e: f64,
    #[serde(rename = "Wnc")]
    pub w_nc: f64,
}

/// A candidate endpoint on the cycle. `branch` is `None` at the turning point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Candidate {
    pub x1f: f64,
    pub branch: Option<Branch>,
    pub case: EndpointCase,
    pub work: WorkBreakdown,
}

impl Candidate {
    fn reflect(self) -> Self {
        Self {
            x1f: -self.x1f,
            branch: self.branch.map(Branch::flipped),
            ..self
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TotalWorkLandscape {
    pub s_f: f64,
    pub samples: Vec<LandscapeSample>,
    pub interior_roots: Vec<Candidate>,
    pub boundary: Candidate,
    pub global_opt: Candidate,
}

impl TotalWorkLandscape {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x1f,branch,W,dE,Wnc")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.x1f,
                s.branch.as_str(),
                s.w_total,
                s.delta_e,
                s.w_nc
            )?;
        }
        Ok(())
    }
}

fn check_start(sys: &LienardSystem, start: PhasePoint, s_f: f64) -> Result<()> {
    if !start.is_finite() {
        return Err(Error::domain("non-finite start point"));
    }
    if start.x1.abs() < sys.b() {
        return Err(Error::NoSolution(format!(
            "|x10| = {} lies in the active region |x| < b = {}",
            start.x1.abs(),
            sys.b()
        )));
    }
    if !(s_f > 0.0 && s_f.is_finite()) {
        return Err(Error::domain(format!("s_f must be positive, got {s_f}")));
    }
    Ok(())
}

/// Right half-plane work evaluation; `x10 >= b`, `b <= x1f <= x_max`.
fn work_right(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    x1f: f64,
    branch: Branch,
    s_f: f64,
) -> Result<WorkBreakdown> {
    let dg = gf.eval(x1f)? - gf.eval(start.x1)?;
    let x2f = lc.branch_velocity(x1f, branch)?;
    let delta_e = sys.energy(PhasePoint::new(x1f, x2f)) - sys.energy(start);
    Ok(WorkBreakdown::new(delta_e, dg * dg / s_f))
}

/// Work of the extremal protocol ending at `(x1f, s_branch(x1f))`.
pub fn total_work_at(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    x1f: f64,
    branch: Branch,
    s_f: f64,
) -> Result<WorkBreakdown> {
    check_start(sys, start, s_f)?;
    if !(x1f.abs() >= sys.b() && x1f.abs() <= lc.x_max()) {
        return Err(Error::domain(format!(
            "x1f = {x1f} outside b <= |x1f| <= x_max = {}",
            lc.x_max()
        )));
    }
    if x1f.signum() != start.x1.signum() {
        return Err(Error::domain(format!(
            "x1f = {x1f} and x10 = {} lie in opposite half-planes",
            start.x1
        )));
    }
    if start.x1 < 0.0 {
        work_right(sys, lc, gf, start.reflect(), -x1f, branch.flipped(), s_f)
    } else {
        work_right(sys, lc, gf, start, x1f, branch, s_f)
    }
}

fn scan_nodes(b: f64, x_max: f64, n: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = (b + EDGE_MARGIN, x_max - EDGE_MARGIN);
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn mt2_roots_right(
    lc: &LimitCycle,
    gf: &GFunction,
    mu: f64,
    x10: f64,
    s_f: f64,
    branch: Branch,
) -> Result<Vec<f64>> {
    let (b, g0) = (gf.b(), gf.eval(x10)?);
    // residual times sqrt(h): finite at x = b, same roots inside
    let residual = |x: f64| -> f64 {
        let s = lc.branch_velocity(x, branch).unwrap_or(f64::NAN);
        let dg = gf.eval(x).map_or(f64::NAN, |g| g - g0);
        mu * s * gf.derivative(x) - 2.0 * dg / s_f
    };
    // nodes uniform in sqrt(x - b) resolve roots that crowd towards b
    let u_max = (lc.x_max() - EDGE_MARGIN - b).max(0.0).sqrt();
    let xs: Vec<f64> = (0..SCAN_NODES)
        .map(|i| b + (u_max * i as f64 / (SCAN_NODES - 1) as f64).powi(2))
        .collect();
    let rs: Vec<f64> = xs.iter().map(|&x| residual(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if rs[i] == 0.0 {
            if i > 0 {
                roots.push(xs[i]);
            }
        } else if i + 1 < xs.len() && rs[i] * rs[i + 1] < 0.0 {
            roots.push(brent(residual, xs[i], xs[i + 1], ROOT_TOL)?);
        }
    }
    Ok(roots)
}

/// Interior stationary points of `W` along one branch of the cycle.
pub fn mt2_roots(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    x10: f64,
    s_f: f64,
    branch: Branch,
) -> Result<Vec<f64>> {
    check_start(sys, PhasePoint::new(x10, 0.0), s_f)?;
    if x10 < 0.0 {
        Ok(mt2_roots_right(lc, gf, sys.mu(), -x10, s_f, branch.flipped())?
            .into_iter()
            .map(|x| -x)
            .collect())
    } else {
        mt2_roots_right(lc, gf, sys.mu(), x10, s_f, branch)
    }
}

fn landscape_right(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    s_f: f64,
) -> Result<TotalWorkLandscape> {
    let mut samples = Vec::with_capacity(2 * (SCAN_NODES + 1));
    for branch in [Branch::Upper, Branch::Lower] {
        for x1f in scan_nodes(sys.b(), lc.x_max(), SCAN_NODES).chain([lc.x_max()]) {
            let w = work_right(sys, lc, gf, start, x1f, branch, s_f)?;
            samples.push(LandscapeSample {
                x1f,
                branch,
                w_total: w.total,
                delta_e: w.delta_e,
                w_nc: w.w_nc,
            });
        }
    }

    let boundary = Candidate {
        x1f: lc.x_max(),
        branch: None,
        case: EndpointCase::Mt1,
        work: work_right(sys, lc, gf, start, lc.x_max(), Branch::Upper, s_f)?,
    };
    let mut interior_roots = Vec::new();
    for branch in [Branch::Upper, Branch::Lower] {
        for x1f in mt2_roots_right(lc, gf, sys.mu(), start.x1, s_f, branch)? {
            interior_roots.push(Candidate {
                x1f,
                branch: Some(branch),
                case: EndpointCase::Mt2,
                work: work_right(sys, lc, gf, start, x1f, branch, s_f)?,
            });
        }
    }
    let mut candidates = vec![boundary];
    candidates.extend_from_slice(&interior_roots);
    if start.x1 == sys.b() {
        // constant path at x1 = b: no extremal work, kick onto either branch
        for branch in [Branch::Upper, Branch::Lower] {
            candidates.push(Candidate {
                x1f: sys.b(),
                branch: Some(branch),
                case: EndpointCase::Mt3,
                work: work_right(sys, lc, gf, start, sys.b(), branch, s_f)?,
            });
        }
    }
    let global_opt = candidates
        .into_iter()
        .reduce(|best, c| if c.work.total < best.work.total { c } else { best })
        .expect("boundary candidate is always present");

    Ok(TotalWorkLandscape {
        s_f,
        samples,
        interior_roots,
        boundary,
        global_opt,
    })
}

/// Work landscape over the cycle and the best endpoint.
pub fn optimal_endpoint_total(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    s_f: f64,
) -> Result<TotalWorkLandscape> {
    check_start(sys, start, s_f)?;
    if start.x1 > 0.0 {
        return landscape_right(sys, lc, gf, start, s_f);
    }
    let mut l = landscape_right(sys, lc, gf, start.reflect(), s_f)?;
    for s in &mut l.samples {
        s.x1f = -s.x1f;
        s.branch = s.branch.flipped();
    }
    l.interior_roots = l.interior_roots.into_iter().map(Candidate::reflect).collect();
    l.boundary = l.boundary.reflect();
    l.global_opt = l.global_opt.reflect();
    Ok(l)
}

/// Protocol to the total-work optimum, with the landscape it was chosen from.
pub fn plan_total(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    s_f: f64,
) -> Result<(OptimalPlan, TotalWorkLandscape)> {
    let landscape = optimal_endpoint_total(sys, lc, gf, start, s_f)?;
    let opt = landscape.global_opt;
    let x2f = match opt.branch {
        Some(branch) => lc.branch_velocity(opt.x1f, branch)?,
        None => 0.0,
    };
    let plan = plan_between(
        sys,
        gf,
        start,
        PhasePoint::new(opt.x1f, x2f),
        connection_time(sys, s_f),
        opt.case,
        opt.branch,
    )?;
    Ok((plan, landscape))
}

/// Critical scaled time and the optima on either side of it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalTime {
    pub s_f_star: f64,
    /// Bracket `[s_lo, s_hi]` containing the switch.
    pub s_lo: f64,
    pub s_hi: f64,
    pub opt_below: Candidate,
    pub opt_above: Candidate,
}

/// Scaled time at which the interior optimum overtakes the turning point.
///
/// Returns `None` when the switch does not happen inside `(lo, hi)`.
pub fn critical_time(
    sys: &LienardSystem,
    lc: &LimitCycle,
    gf: &GFunction,
    start: PhasePoint,
    (lo, hi): (f64, f64),
) -> Result<Option<CriticalTime>> {
    check_start(sys, start, lo.max(f64::MIN_POSITIVE))?;
    if start.x1.abs() <= lc.x_max() {
        return Err(Error::domain(format!(
            "critical time needs a start outside the cycle, |x10| = {} <= x_max = {}",
            start.x1.abs(),
            lc.x_max()
        )));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid s_f range ({lo}, {hi})")));
    }
    let interior_wins = |s: f64| -> Result<(bool, Candidate)> {
        let l = optimal_endpoint_total(sys, lc, gf, start, s)?;
        Ok((l.global_opt.case != EndpointCase::Mt1, l.global_opt))
    };

    let ratio = (hi / lo).powf(1.0 / CRITICAL_SCAN as f64);
    let (mut a, (mut a_wins, mut a_opt)) = (lo, interior_wins(lo)?);
    if a_wins {
        return Ok(None);
    }
    let mut bracket = None;
    for k in 1..=CRITICAL_SCAN {
        let s = if k == CRITICAL_SCAN {
            hi
        } else {
            lo * ratio.powi(k as i32)
        };
        let (wins, opt) = interior_wins(s)?;
        if wins {
            bracket = Some((s, opt));
            break;
        }
        (a, a_opt) = (s, opt);
    }
    let Some((mut b, mut b_opt)) = bracket else {
        return Ok(None);
    };
    while (b - a) > CRITICAL_REL_TOL * a {
        let m = 0.5 * (a + b);
        let (wins, opt) = interior_wins(m)?;
        if wins {
            (b, b_opt) = (m, opt);
        } else {
            (a, a_opt, a_wins) = (m, opt, wins);
        }
    }
    debug_assert!(!a_wins);
    Ok(Some(CriticalTime {
        s_f_star: 0.5 * (a + b),
        s_lo: a,
        s_hi: b,
        opt_below: a_opt,
        opt_above: b_opt,
    }))
}
