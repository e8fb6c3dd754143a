use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instantaneous velocity kick `x2 -> x2 + delta_v` at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub time: f64,
    pub delta_v: f64,
}

pub type SmoothForce = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A driving protocol: a smooth force plus Dirac contributions.
///
/// Impulses move neither the position nor do they perform non-conservative
/// work; they only change the kinetic energy.
#[derive(Clone)]
pub struct ForceProfile {
    smooth: SmoothForce,
    impulses: Vec<Impulse>,
}

impl ForceProfile {
    pub fn new(smooth: SmoothForce, impulses: Vec<Impulse>) -> Result<Self> {
        for imp in &impulses {
            if !(imp.time.is_finite() && imp.delta_v.is_finite()) {
                return Err(Error::Contract(format!("non-finite impulse {imp:?}")));
            }
        }
        if impulses.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::Contract(
                "impulse times must be strictly increasing".into(),
            ));
        }
        Ok(Self { smooth, impulses })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            smooth: Arc::new(move |_| value),
            impulses: Vec::new(),
        }
    }

    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            smooth: Arc::new(f),
            impulses: Vec::new(),
        }
    }

    pub fn with_impulses(self, impulses: Vec<Impulse>) -> Result<Self> {
        Self::new(self.smooth, impulses)
    }

    pub fn smooth_at(&self, t: f64) -> f64 {
        (self.smooth)(t)
    }

    pub fn smooth(&self) -> &SmoothForce {
        &self.smooth
    }

    pub fn impulses(&self) -> &[Impulse] {
        &self.impulses
    }

    /// Multiplies the smooth part by `factor`, keeping the impulses.
    pub fn scale_smooth(&self, factor: f64) -> Self {
        let inner = self.smooth.clone();
        Self {
            smooth: Arc::new(move |t| factor * inner(t)),
            impulses: self.impulses.clone(),
        }
    }

    /// `F -> -F`, the protocol for the point-reflected problem.
    pub fn negated(&self) -> Self {
        let inner = self.smooth.clone();
        Self {
            smooth: Arc::new(move |t| -inner(t)),
            impulses: self
                .impulses
                .iter()
                .map(|i| Impulse {
                    time: i.time,
                    delta_v: -i.delta_v,
                })
                .collect(),
        }
    }
}

impl fmt::Debug for ForceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForceProfile")
            .field("smooth", &"<fn>")
            .field("impulses", &self.impulses)
            .finish()
    }
}
