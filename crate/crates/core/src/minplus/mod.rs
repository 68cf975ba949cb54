//! Exact min-plus algebra on non-decreasing curves with rational breakpoints.
//!
//! `⊕` is the pointwise minimum and `*` the min-plus convolution
//! `(f * g)(t) = inf_{0 ≤ s ≤ t} f(s) + g(t - s)`.

mod closure;
mod curve;
mod deviation;
mod ops;
pub(crate) mod pwl;
mod residual;

pub use curve::{Curve, Segment, Tail};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    /// The result is `+∞` everywhere because the numerator outgrows the
    /// denominator.
    #[error("result is unbounded: {0}")]
    Unbounded(String),
    /// Kleene iteration did not stabilise within the iteration budget.
    #[error("closure did not converge after {0} squarings")]
    UnsupportedClosure(usize),
    #[error("invalid curve: {0}")]
    Invalid(String),
}
