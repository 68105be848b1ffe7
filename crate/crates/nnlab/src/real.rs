//! Scalar abstraction for the numeric core.
//!
//! Networks, hat functions and the piecewise-linear helpers are generic over
//! [`Real`] so the constructions can be evaluated in `f32` or `f64`. The
//! experiment harness works with the `f64` aliases exported from the crate
//! root.

use std::fmt::{Debug, Display};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants in the constructions.
    fn from_f64_c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable")
    }

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise summation in fixed index order.
///
/// Used wherever a deterministic, threading-independent reduction is needed
/// (average-case errors, fidelity grids).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}
