//! Scalar abstraction shared by the geometric core.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative pivot size below which a small linear system counts as degenerate.
    const PIVOT_TOL: Self;
    /// Slack used when checking containment in a computed ball.
    const CONTAIN_TOL: Self;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    fn f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f64 {
    const PIVOT_TOL: f64 = 1e-12;
    const CONTAIN_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const PIVOT_TOL: f32 = 1e-5;
    const CONTAIN_TOL: f32 = 1e-4;
}
