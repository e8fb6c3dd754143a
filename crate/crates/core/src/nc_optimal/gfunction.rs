use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, brent};
use crate::polynomial::Polynomial;
use crate::system::LienardSystem;

const TABLE_STEP: f64 = 0.02;
const TABLE_X_MAX: f64 = 10.0;
const QUAD_TOL: f64 = 1e-14;
const QUAD_DEPTH: u32 = 48;

/// `g(x) = int_b^x sqrt(h(u)) du` for `x >= b`, extended as an odd function.
///
/// Internally the integral is taken in `s = sqrt(x - b)`, where the
/// integrand `2 s sqrt(h(b + s^2))` is smooth at `s = 0`. Cumulative values
/// on a uniform `s` grid are cached; evaluation integrates only from the
/// nearest node. Cloning is cheap.
#[derive(Clone)]
pub struct GFunction {
    inner: Arc<Inner>,
}

struct Inner {
    h: Polynomial,
    b: f64,
    // g at s = k * TABLE_STEP
    table: Vec<f64>,
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GFunction")
            .field("b", &self.inner.b)
            .field("nodes", &self.inner.table.len())
            .finish()
    }
}

impl Inner {
    fn integrand(&self, s: f64) -> f64 {
        2.0 * s * self.h.eval(self.b + s * s).max(0.0).sqrt()
    }

    fn segment(&self, s0: f64, s1: f64) -> f64 {
        adaptive_simpson(|s| self.integrand(s), s0, s1, QUAD_TOL, QUAD_DEPTH)
    }

    fn g_of_s(&self, s: f64) -> f64 {
        let k = ((s / TABLE_STEP).floor() as usize).min(self.table.len() - 1);
        let s_k = k as f64 * TABLE_STEP;
        if s == s_k {
            self.table[k]
        } else {
            self.table[k] + self.segment(s_k, s)
        }
    }
}

impl GFunction {
    pub fn new(sys: &LienardSystem) -> Self {
        let b = sys.b();
        let s_max = (TABLE_X_MAX.max(4.0 * b) - b).sqrt();
        let n = (s_max / TABLE_STEP).ceil() as usize;
        let mut inner = Inner {
            h: sys.h().clone(),
            b,
            table: Vec::with_capacity(n + 1),
        };
        let mut acc = 0.0;
        inner.table.push(0.0);
        for k in 0..n {
            acc += inner.segment(k as f64 * TABLE_STEP, (k + 1) as f64 * TABLE_STEP);
            inner.table.push(acc);
        }
        Self {
            inner: Arc::new(inner),
        }
    }

    pub fn b(&self) -> f64 {
        self.inner.b
    }

    /// `g'(x) = sqrt(h(x))` for `|x| >= b`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.inner.h.eval(x).max(0.0).sqrt()
    }

    /// Signed (odd) value `sgn(x) g(|x|)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if !(ax >= self.inner.b) {
            return Err(Error::domain(format!(
                "g is defined for |x| >= b = {}, got {x}",
                self.inner.b
            )));
        }
        let s = (ax - self.inner.b).sqrt();
        Ok(self.inner.g_of_s(s).copysign(x))
    }

    /// The unique `x >= b` with `g(x) = y`, for `y >= 0`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::domain(format!("g inverse needs y >= 0, got {y}")));
        }
        let inner = &*self.inner;
        if y == 0.0 {
            return Ok(inner.b);
        }
        let table = &inner.table;
        let (s_lo, s_hi) = if y <= *table.last().unwrap() {
            let k = table.partition_point(|&g| g <= y).max(1) - 1;
            (k as f64 * TABLE_STEP, (k + 1) as f64 * TABLE_STEP)
        } else {
            let mut lo = (table.len() - 1) as f64 * TABLE_STEP;
            let mut hi = lo * 2.0;
            while inner.g_of_s(hi) < y {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Numerical(format!("cannot bracket g inverse of {y}")));
                }
            }
            (lo, hi)
        };
        let s = brent(|s| inner.g_of_s(s) - y, s_lo, s_hi, 1e-15)?;
        let mut x = inner.b + s * s;
        // polish in x where g' is well away from zero
        for _ in 0..2 {
            let d = self.derivative(x);
            if d < 1e-3 {
                break;
            }
            let step = (inner.g_of_s((x - inner.b).max(0.0).sqrt()) - y) / d;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        Ok(x.max(inner.b))
    }

    /// `sign * invert(|y|)` with the half-plane given explicitly.
    pub fn invert_signed(&self, y: f64, sign: f64) -> Result<f64> {
        Ok(self.invert(y)?.copysign(sign))
    }
}

pub fn g_eval(gf: &GFunction, x: f64) -> Result<f64> {
    gf.eval(x)
}

pub fn g_invert(gf: &GFunction, y: f64) -> Result<f64> {
    gf.invert(y)
}
