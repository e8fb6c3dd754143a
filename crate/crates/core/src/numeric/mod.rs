//! Scalar numerical building blocks shared by the solver modules.

mod pchip;
mod quad;
mod roots;
mod spline;

pub use pchip::Pchip;
pub use quad::{adaptive_simpson, composite_simpson, simpson_samples};
pub use roots::brent;
pub use spline::CubicSpline;
