//! Single-step machinery shared by the driven and event-driven integrators.
//!
//! The integrated state is `(x1, x2, w)` where `w` accumulates the
//! non-conservative work `mu int h(x1) x2^2 dt`.

use crate::force::ForceProfile;
use crate::system::LienardSystem;

use super::Method;

pub(crate) type State = [f64; 3];

pub(crate) struct Dynamics<'a> {
    pub sys: &'a LienardSystem,
    pub force: Option<&'a ForceProfile>,
}

impl Dynamics<'_> {
    pub fn rhs(&self, t: f64, y: &State) -> State {
        let f = self.force.map_or(0.0, |p| p.smooth_at(t));
        let damping = self.sys.mu() * self.sys.h().eval(y[0]);
        [
            y[1],
            -damping * y[1] - self.sys.dv().eval(y[0]) + f,
            damping * y[1] * y[1],
        ]
    }
}

/// One accepted step with its endpoint derivatives (for Hermite output).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub t0: f64,
    pub y0: State,
    pub f0: State,
    pub t1: f64,
    pub y1: State,
    pub f1: State,
}

impl Step {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Cubic Hermite interpolation at `theta` in `[0, 1]`.
    pub fn interpolate(&self, theta: f64) -> State {
        let h = self.h();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        std::array::from_fn(|i| {
            h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i]
        })
    }

    /// Number of equal sub-intervals that keep linear interpolation of the
    /// phase coordinates within `tol`.
    pub fn subdivisions(&self, tol: f64) -> usize {
        let h = self.h().abs();
        let df = (self.f1[0] - self.f0[0])
            .abs()
            .max((self.f1[1] - self.f0[1]).abs());
        let n = (h * df / (8.0 * tol)).sqrt().ceil();
        if n.is_finite() {
            (n as usize).clamp(1, 100_000)
        } else {
            1
        }
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for i in 0..3 {
        for (c, k) in terms {
            out[i] += c * k[i];
        }
    }
    out
}

pub(crate) struct Stepper<'a> {
    pub dynamics: Dynamics<'a>,
    method: Method,
    h_next: Option<f64>,
    pub attempts: usize,
    max_steps: usize,
}

pub(crate) struct StepLimit;

impl<'a> Stepper<'a> {
    pub fn new(dynamics: Dynamics<'a>, method: Method, max_steps: usize) -> Self {
        Self {
            dynamics,
            method,
            h_next: None,
            attempts: 0,
            max_steps,
        }
    }

    /// Takes one step of size `h` and returns `(y1, f1, error norm)`.
    pub fn trial(&self, t: f64, y: &State, f0: &State, h: f64) -> (State, State, f64) {
        let d = &self.dynamics;
        match self.method {
            Method::Rk4Fixed { .. } => {
                let k1 = *f0;
                let k2 = d.rhs(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k1)]));
                let k3 = d.rhs(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k2)]));
                let k4 = d.rhs(t + h, &axpy(y, &[(h, &k3)]));
                let y1 = axpy(
                    y,
                    &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)],
                );
                let f1 = d.rhs(t + h, &y1);
                (y1, f1, 0.0)
            }
            Method::Rk45Adaptive { rel_tol, abs_tol } => {
                let k1 = *f0;
                let k2 = d.rhs(t + C2 * h, &axpy(y, &[(h * A21, &k1)]));
                let k3 = d.rhs(t + C3 * h, &axpy(y, &[(h * A31, &k1), (h * A32, &k2)]));
                let k4 = d.rhs(
                    t + C4 * h,
                    &axpy(y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]),
                );
                let k5 = d.rhs(
                    t + C5 * h,
                    &axpy(
                        y,
                        &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
                    ),
                );
                let k6 = d.rhs(
                    t + h,
                    &axpy(
                        y,
                        &[
                            (h * A61, &k1),
                            (h * A62, &k2),
                            (h * A63, &k3),
                            (h * A64, &k4),
                            (h * A65, &k5),
                        ],
                    ),
                );
                let y1 = axpy(
                    y,
                    &[
                        (h * B1, &k1),
                        (h * B3, &k3),
                        (h * B4, &k4),
                        (h * B5, &k5),
                        (h * B6, &k6),
                    ],
                );
                let k7 = d.rhs(t + h, &y1);
                let mut acc = 0.0;
                for i in 0..3 {
                    let err =
                        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let scale = abs_tol + rel_tol * y[i].abs().max(y1[i].abs());
                    acc += (err / scale).powi(2);
                }
                (y1, k7, (acc / 3.0).sqrt())
            }
        }
    }

    fn initial_step(&self, t: f64, y: &State, f0: &State) -> f64 {
        match self.method {
            Method::Rk4Fixed { dt } => dt,
            Method::Rk45Adaptive { rel_tol, abs_tol } => {
                let norm = |v: &State, w: &State| {
                    let s: f64 = (0..3)
                        .map(|i| (v[i] / (abs_tol + rel_tol * w[i].abs())).powi(2))
                        .sum();
                    (s / 3.0).sqrt()
                };
                let d0 = norm(y, y);
                let d1 = norm(f0, y);
                let h0 = if d0 < 1e-5 || d1 < 1e-5 {
                    1e-6
                } else {
                    0.01 * d0 / d1
                };
                let y1 = axpy(y, &[(h0, f0)]);
                let f1 = self.dynamics.rhs(t + h0, &y1);
                let diff = [f1[0] - f0[0], f1[1] - f0[1], f1[2] - f0[2]];
                let d2 = norm(&diff, y) / h0;
                let h1 = if d1.max(d2) <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / d1.max(d2)).powf(0.2)
                };
                (100.0 * h0).min(h1)
            }
        }
    }

    /// Advances by one accepted step without passing `t_end`.
    pub fn step_toward(&mut self, t: f64, y: &State, f0: &State, t_end: f64) -> Result<Step, StepLimit> {
        let remaining = t_end - t;
        let mut h = self.h_next.unwrap_or_else(|| self.initial_step(t, y, f0));
        loop {
            if self.attempts >= self.max_steps {
                return Err(StepLimit);
            }
            self.attempts += 1;
            let clamped = h >= remaining;
            let h_try = if clamped { remaining } else { h };
            let (y1, f1, err) = self.trial(t, y, f0, h_try);
            if err <= 1.0 && y1.iter().all(|v| v.is_finite()) {
                if !clamped || self.h_next.is_none() {
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    self.h_next = Some(match self.method {
                        Method::Rk4Fixed { dt } => dt,
                        _ => h_try * grow,
                    });
                }
                let t1 = if clamped { t_end } else { t + h_try };
                return Ok(Step {
                    t0: t,
                    y0: *y,
                    f0: *f0,
                    t1,
                    y1,
                    f1,
                });
            }
            let shrink = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h = h_try * shrink;
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(StepLimit);
            }
        }
    }
}
