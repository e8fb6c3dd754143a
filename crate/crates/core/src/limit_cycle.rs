//! Numerical representation of the stable limit cycle.
//!
//! The cycle is located as the fixed point of the first-return map on the
//! section `{x2 = 0, x1 > 0}`, which is also its rightmost point. One period
//! is then sampled densely and split at the leftmost point into the lower
//! branch (`x2 <= 0`, traversed right to left) and the upper branch.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate_until_event_with, Direction, EventSpec, HalfPlane, IntegratorConfig};
use crate::numeric::Pchip;
use crate::system::{LienardSystem, PhasePoint};

/// Fixed-point residual target `|P(x) - x|`.
pub const RETURN_MAP_TOL: f64 = 1e-11;
/// Linear-interpolation tolerance of the stored samples.
pub const SAMPLE_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 50;
const RETURN_T_MAX: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn flipped(self) -> Self {
        match self {
            Branch::Upper => Branch::Lower,
            Branch::Lower => Branch::Upper,
        }
    }

    /// Sign of `x2` on this branch.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleSummary {
    pub mu: f64,
    pub x_max: f64,
    pub period: f64,
}

#[derive(Debug, Clone)]
pub struct LimitCycle {
    mu: f64,
    samples: Vec<PhasePoint>,
    period: f64,
    x_max: f64,
    return_residual: f64,
    upper: Pchip,
    lower: Pchip,
    // windows of WINDOW segments: (first sample, radius around it)
    windows: Vec<(usize, f64)>,
}

const WINDOW: usize = 32;

fn build_windows(samples: &[PhasePoint]) -> Vec<(usize, f64)> {
    (0..samples.len().saturating_sub(1))
        .step_by(WINDOW)
        .map(|start| {
            let end = (start + WINDOW).min(samples.len() - 1);
            let r = samples[start..=end]
                .iter()
                .map(|p| p.distance(&samples[start]))
                .fold(0.0, f64::max);
            (start, r)
        })
        .collect()
}

/// First-return map on `{x2 = 0, x1 > 0}`: `(x, 0) -> (P(x), 0)` and the return time.
pub fn return_map(sys: &LienardSystem, x: f64, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    let hit = integrate_until_event_with(
        sys,
        PhasePoint::new(x, 0.0),
        EventSpec::poincare(),
        cfg,
        RETURN_T_MAX,
        None,
    )?;
    Ok((hit.crossing.x1, hit.t_cross))
}

pub fn find_limit_cycle(sys: &LienardSystem, cfg: &IntegratorConfig) -> Result<LimitCycle> {
    let residual = |x: f64| return_map(sys, x, cfg).map(|(p, _)| p - x);

    let mut x0 = 2.0;
    let mut f0 = residual(x0)?;
    let mut x1 = x0 + f0;
    let mut f1 = residual(x1)?;
    let mut converged = f0.abs() < RETURN_MAP_TOL;
    if converged {
        x1 = x0;
        f1 = f0;
    }
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        if f1.abs() < RETURN_MAP_TOL {
            converged = true;
            break;
        }
        let mut x2 = if f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            x1 + f1
        };
        if !(x2.is_finite() && x2 > 0.0) {
            x2 = x1 + f1;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = residual(x1)?;
    }
    if !converged {
        return Err(Error::CycleNotFound(format!(
            "return map residual {f1:e} after {MAX_ITERATIONS} secant iterations"
        )));
    }
    let x_star = x1;

    let lower_half = integrate_until_event_with(
        sys,
        PhasePoint::new(x_star, 0.0),
        EventSpec::section(Direction::Ascending, HalfPlane::Negative),
        cfg,
        RETURN_T_MAX,
        Some(SAMPLE_TOL),
    )?;
    let upper_half = integrate_until_event_with(
        sys,
        lower_half.crossing,
        EventSpec::poincare(),
        cfg,
        RETURN_T_MAX,
        Some(SAMPLE_TOL),
    )?;

    let mut samples = lower_half.trajectory.states().to_vec();
    samples.extend_from_slice(&upper_half.trajectory.states()[1..]);

    let lower = branch_interpolant(lower_half.trajectory.states().iter().rev());
    let upper = branch_interpolant(upper_half.trajectory.states().iter());

    Ok(LimitCycle {
        mu: sys.mu(),
        windows: build_windows(&samples),
        samples,
        period: lower_half.t_cross + upper_half.t_cross,
        x_max: x_star,
        return_residual: f1.abs(),
        upper,
        lower,
    })
}

fn branch_interpolant<'a>(points: impl Iterator<Item = &'a PhasePoint>) -> Pchip {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for p in points {
        if xs.last().is_none_or(|&last| p.x1 > last) {
            xs.push(p.x1);
            ys.push(p.x2);
        }
    }
    Pchip::new(xs, ys)
}

impl LimitCycle {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// One period, starting and ending at `(x_max, 0)`.
    pub fn samples(&self) -> &[PhasePoint] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Rightmost abscissa of the cycle.
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// `|P(x_max) - x_max|` at convergence.
    pub fn return_residual(&self) -> f64 {
        self.return_residual
    }

    pub fn summary(&self) -> CycleSummary {
        CycleSummary {
            mu: self.mu,
            x_max: self.x_max,
            period: self.period,
        }
    }

    /// Velocity on the requested branch at abscissa `x1`.
    pub fn branch_velocity(&self, x1: f64, branch: Branch) -> Result<f64> {
        if !(x1.abs() <= self.x_max) {
            return Err(Error::domain(format!(
                "|x1| = {} exceeds x_max = {}",
                x1.abs(),
                self.x_max
            )));
        }
        if x1.abs() == self.x_max {
            return Ok(0.0);
        }
        // average of the two half-orbits, exactly point symmetric
        let v = match branch {
            Branch::Upper => (0.5 * (self.upper.eval(x1) - self.lower.eval(-x1))).max(0.0),
            Branch::Lower => (0.5 * (self.lower.eval(x1) - self.upper.eval(-x1))).min(0.0),
        };
        Ok(v)
    }

    /// Euclidean distance from `p` to the sampled closed curve (exact for
    /// the polyline through the samples).
    pub fn distance(&self, p: PhasePoint) -> f64 {
        // visit windows by their lower bound, stop once none can improve
        let mut order: Vec<(f64, usize)> = self
            .windows
            .iter()
            .map(|&(start, r)| (p.distance(&self.samples[start]) - r, start))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = f64::INFINITY;
        for (bound, start) in order {
            if bound >= best {
                break;
            }
            let end = (start + WINDOW).min(self.samples.len() - 1);
            for w in self.samples[start..=end].windows(2) {
                best = best.min(segment_distance(p, w[0], w[1]));
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x1,x2")?;
        for s in &self.samples {
            writeln!(out, "{},{}", s.x1, s.x2)?;
        }
        Ok(())
    }
}

pub fn distance_to_cycle(lc: &LimitCycle, p: PhasePoint) -> f64 {
    lc.distance(p)
}

pub fn branch_velocity(lc: &LimitCycle, x1: f64, branch: Branch) -> Result<f64> {
    lc.branch_velocity(x1, branch)
}

fn segment_distance(p: PhasePoint, a: PhasePoint, b: PhasePoint) -> f64 {
    let (dx, dy) = (b.x1 - a.x1, b.x2 - a.x2);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x1 - a.x1) * dx + (p.x2 - a.x2) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.x1 - a.x1 - t * dx).hypot(p.x2 - a.x2 - t * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::ForceProfile;
    use crate::integrate::{integrate_driven, IntegratorConfig};
    use crate::system::make_van_der_pol;
    use std::f64::consts::PI;

    fn cycle(mu: f64) -> LimitCycle {
        find_limit_cycle(
            &make_van_der_pol(mu).unwrap(),
            &IntegratorConfig::rk45(1e-12, 1e-12),
        )
        .unwrap()
    }

    #[test]
    fn amplitude_for_mu_tenth() {
        let lc = cycle(0.1);
        assert!((lc.x_max() - 2.00010).abs() < 1e-4, "{}", lc.x_max());
        assert!(lc.return_residual() < RETURN_MAP_TOL);
    }

    #[test]
    fn small_mu_is_nearly_harmonic() {
        let lc = cycle(0.01);
        assert!((lc.x_max() - 2.0).abs() < 0.01);
        assert!((lc.period() - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn closure_and_branch_endpoints() {
        let lc = cycle(0.5);
        let (first, last) = (lc.samples()[0], *lc.samples().last().unwrap());
        assert!((first.x1 - last.x1).abs() < 1e-9 && (first.x2 - last.x2).abs() < 1e-9);
        assert_eq!(lc.branch_velocity(lc.x_max(), Branch::Upper).unwrap(), 0.0);
        assert_eq!(lc.branch_velocity(-lc.x_max(), Branch::Lower).unwrap(), 0.0);
        assert!(lc.branch_velocity(lc.x_max() + 1e-6, Branch::Upper).is_err());
        for k in 0..=40 {
            let x = -lc.x_max() + 2.0 * lc.x_max() * k as f64 / 40.0;
            assert!(lc.branch_velocity(x, Branch::Upper).unwrap() >= 0.0);
            assert!(lc.branch_velocity(x, Branch::Lower).unwrap() <= 0.0);
        }
    }

    #[test]
    fn cycle_is_point_symmetric() {
        let lc = cycle(1.0);
        for p in lc.samples().iter().step_by(97) {
            assert!(lc.distance(p.reflect()) < 1e-6);
        }
    }

    #[test]
    fn distance_examples() {
        let lc = cycle(0.1);
        assert!(lc.distance(PhasePoint::new(lc.x_max(), 0.0)) < 1e-9);
        let far = PhasePoint::new(5.0, 0.0);
        let brute = lc
            .samples()
            .iter()
            .map(|q| q.distance(&far))
            .fold(f64::INFINITY, f64::min);
        assert!((lc.distance(far) - brute).abs() < 1e-6);
        assert!((lc.distance(far) - 3.0).abs() < 1e-3);
        for p in [
            PhasePoint::new(0.3, -0.7),
            PhasePoint::new(-2.5, 1.0),
            PhasePoint::new(1.9, 0.8),
        ] {
            let exact = lc
                .samples()
                .windows(2)
                .map(|w| segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(lc.distance(p), exact);
        }
        let d0 = lc.distance(PhasePoint::new(0.0, 0.0));
        assert!((d0 - 2.0).abs() < 0.1, "{d0}");
    }

    #[test]
    fn fig4_branch_values() {
        let lc = cycle(0.1);
        assert!((lc.branch_velocity(1.5, Branch::Upper).unwrap() - 1.4).abs() < 0.05);
        assert!((lc.branch_velocity(1.5, Branch::Lower).unwrap() + 1.3).abs() < 0.05);
    }

    #[test]
    fn reintegrating_one_period_closes_the_orbit() {
        let sys = make_van_der_pol(0.1).unwrap();
        let lc = cycle(0.1);
        let cfg = IntegratorConfig::rk45(1e-12, 1e-12).sparse();
        for p in lc.samples().iter().step_by(lc.samples().len() / 5) {
            let traj = integrate_driven(&sys, *p, &ForceProfile::zero(), lc.period(), &cfg).unwrap();
            assert!(traj.last().distance(p) < 1e-6);
        }
    }

    #[test]
    fn return_map_contracts_toward_the_cycle() {
        let sys = make_van_der_pol(0.1).unwrap();
        let lc = cycle(0.1);
        let cfg = IntegratorConfig::rk45(1e-12, 1e-12);
        for x in [lc.x_max() + 1e-2, lc.x_max() - 1e-2] {
            let (p, _) = return_map(&sys, x, &cfg).unwrap();
            assert!((p - lc.x_max()).abs() < (x - lc.x_max()).abs());
        }
    }

    #[test]
    fn amplitude_grows_with_mu_within_turner_bounds() {
        let xs: Vec<f64> = [0.01, 0.1, 0.5, 1.0].iter().map(|&m| cycle(m).x_max()).collect();
        for w in xs.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for x in xs {
            assert!((2.0..=2.0672).contains(&x));
        }
    }
}
