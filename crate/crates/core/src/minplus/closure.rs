use num::{Signed, Zero};

use super::curve::{Curve, Tail};
use super::CurveError;
use crate::value::{Value, Q};

/// Upper bound on Kleene squarings before giving up.
const MAX_SQUARINGS: usize = 12;

impl Curve {
    /// Sub-additive closure `f* = e ⊕ f ⊕ f*f ⊕ ...`.
    pub fn closure(&self) -> Result<Curve, CurveError> {
        let e = Curve::unit();
        if self.origin.is_infinite() || self.segments.is_empty() {
            return Ok(e);
        }
        let first = &self.segments[0];
        if first.value.is_zero() && first.slope.is_zero() {
            return Ok(Curve::zero());
        }
        if let Tail::Infinite { from } = &self.tail {
            if self.segments.iter().all(|s| s.slope.is_zero()) {
                return Ok(self.step_closure(from));
            }
        }
        let h = e.min(self);
        if h.conv(&h).min(&h) == h {
            return Ok(h);
        }
        let mut h = h;
        for _ in 0..MAX_SQUARINGS {
            let next = h.conv(&h);
            if next == h {
                return Ok(h);
            }
            h = next;
        }
        Err(CurveError::UnsupportedClosure(MAX_SQUARINGS))
    }

    /// Closure of a finite staircase: the convolution of one periodic
    /// staircase per step.
    fn step_closure(&self, end: &Q) -> Curve {
        let mut acc = Curve::unit();
        for (i, s) in self.segments.iter().enumerate() {
            let hi = self.segments.get(i + 1).map_or(end, |n| &n.start);
            debug_assert!(hi.is_positive());
            acc = acc.conv(&Curve::staircase(s.value.clone(), hi.clone()));
        }
        acc
    }

    /// `f^n` (n-fold convolution, `f^0 = e`).
    pub fn power(&self, n: usize) -> Curve {
        let mut acc = Curve::unit();
        for _ in 0..n {
            acc = acc.conv(self);
        }
        acc
    }

    /// Value of the curve right after 0, if finite.
    pub fn right_of_origin(&self) -> Value {
        match self.segments.first() {
            Some(s) => Value::Finite(s.value.clone()),
            None => Value::Infinite,
        }
    }
}
