use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force::ForceProfile;
use crate::system::{LienardSystem, PhasePoint};

/// Time-sampled phase-plane path.
///
/// Times start at zero and never decrease. Two consecutive samples may share
/// a time stamp only across an impulse: same position, pre- and post-jump
/// velocity.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PhasePoint>,
    force: Option<ForceProfile>,
    cumulative_wnc: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<PhasePoint>, force: Option<ForceProfile>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Contract(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::Contract("empty trajectory".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Contract(format!("trajectory starts at t = {}", times[0])));
        }
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            if !(dt >= 0.0) {
                return Err(Error::Contract(format!("time decreases at sample {i}")));
            }
            if dt == 0.0 && states[i].x1 != states[i - 1].x1 {
                return Err(Error::Contract(format!(
                    "position jump at repeated time t = {}",
                    times[i]
                )));
            }
        }
        if states.iter().any(|s| !s.is_finite()) {
            return Err(Error::Contract("non-finite state".into()));
        }
        Ok(Self {
            times,
            states,
            force,
            cumulative_wnc: None,
        })
    }

    /// Samples `path` on `n` equal intervals of `[0, t_f]`.
    pub fn from_path(path: impl Fn(f64) -> PhasePoint, t_f: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let times: Vec<f64> = (0..=n).map(|i| t_f * i as f64 / n as f64).collect();
        let states = times.iter().map(|&t| path(t)).collect();
        Self::new(times, states, None)
    }

    pub(crate) fn with_cumulative_wnc(mut self, wnc: Vec<f64>) -> Self {
        debug_assert_eq!(wnc.len(), self.times.len());
        self.cumulative_wnc = Some(wnc);
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PhasePoint] {
        &self.states
    }

    pub fn first(&self) -> PhasePoint {
        self.states[0]
    }

    pub fn last(&self) -> PhasePoint {
        *self.states.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn force(&self) -> Option<&ForceProfile> {
        self.force.as_ref()
    }

    /// Non-conservative work accumulated by the integrator alongside the
    /// state, when the trajectory came out of [`crate::integrate`].
    pub fn cumulative_wnc(&self) -> Option<&[f64]> {
        self.cumulative_wnc.as_deref()
    }

    /// Joins `next` onto `self`; `next` must start where `self` ends.
    pub fn concat(&self, next: &Trajectory) -> Result<Trajectory> {
        if self.last() != next.first() {
            return Err(Error::Contract(
                "trajectories do not share the junction point".into(),
            ));
        }
        let offset = self.duration();
        let mut times = self.times.clone();
        let mut states = self.states.clone();
        times.extend(next.times.iter().skip(1).map(|t| t + offset));
        states.extend_from_slice(&next.states[1..]);
        Trajectory::new(times, states, None)
    }

    /// Writes `t,x1,x2,F` rows; `F` is the smooth force (0 when undriven).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x1,x2,F")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let f = self.force.as_ref().map_or(0.0, |p| p.smooth_at(*t));
            writeln!(out, "{},{},{},{}", t, s.x1, s.x2, f)?;
        }
        Ok(())
    }
}

/// Work done by the driving force split as `total = delta_e + w_nc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkBreakdown {
    pub delta_e: f64,
    pub w_nc: f64,
    pub total: f64,
}

impl WorkBreakdown {
    pub fn new(delta_e: f64, w_nc: f64) -> Self {
        Self {
            delta_e,
            w_nc,
            total: delta_e + w_nc,
        }
    }
}

/// Trapezoidal quadrature of `mu h(x1) x2^2` over the samples plus the
/// endpoint energy difference. Zero-length (impulse) intervals contribute
/// nothing to `w_nc`.
pub fn work_breakdown(sys: &LienardSystem, traj: &Trajectory) -> WorkBreakdown {
    let rates: Vec<f64> = traj.states.iter().map(|&p| sys.dissipation_rate(p)).collect();
    let w_nc: f64 = traj
        .times
        .windows(2)
        .zip(rates.windows(2))
        .filter(|(t, _)| t[1] > t[0])
        .map(|(t, r)| 0.5 * (t[1] - t[0]) * (r[0] + r[1]))
        .sum();
    let delta_e = sys.energy(traj.last()) - sys.energy(traj.first());
    WorkBreakdown::new(delta_e, w_nc)
}
