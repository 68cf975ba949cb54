use num::{One, Signed, Zero};

use super::curve::{common_period, Curve, TailInfo, TailSpec};
use super::pwl::{Piece, Pwl};
use crate::value::{ceil_q, Value, Q};

/// How the running maximum behaves after the computed window.
enum After {
    /// constant from this instant on
    Freeze(Q),
    Infinite(Q),
    Periodic {
        from: Q,
        period: Q,
        increment: Q,
    },
}

impl Curve {
    /// `t ↦ sup_{0 ≤ s ≤ t} [f(s) − g(s)]^+`, the smallest curve in F above
    /// the positive part of the difference. `+∞ − g` is `+∞` for finite `g`;
    /// wherever `g` is `+∞` the difference counts as 0.
    pub fn residual(&self, cross: &Curve) -> Curve {
        let origin = match (&self.origin, &cross.origin) {
            (_, Value::Infinite) => Q::zero(),
            (Value::Infinite, Value::Finite(_)) => return Curve::epsilon(),
            (Value::Finite(a), Value::Finite(b)) => (a - b).max(Q::zero()),
        };
        let after = match (self.tail_info(), cross.tail_info()) {
            (TailInfo::Infinite { from: a }, TailInfo::Infinite { from: b }) if a < b => {
                After::Infinite(a)
            }
            (_, TailInfo::Infinite { from: b }) => After::Freeze(b),
            (TailInfo::Infinite { from: a }, TailInfo::Finite { .. }) => After::Infinite(a),
            (
                TailInfo::Finite {
                    from: a,
                    period: pa,
                    rate: ra,
                },
                TailInfo::Finite {
                    from: b,
                    period: pb,
                    rate: rb,
                },
            ) => {
                let start = a.max(b);
                let period = common_period(&pa, &pb);
                let drift = ra - rb;
                if drift.is_positive() {
                    self.periodic_after(cross, &origin, start, period, drift)
                } else {
                    // later windows are shifted down copies of [start, start + period]
                    After::Freeze(start + period)
                }
            }
        };
        let h = match &after {
            After::Freeze(from) | After::Infinite(from) => from.clone(),
            After::Periodic { from, period, .. } => from + period,
        };
        let peak = difference(self, cross, &h).running_max(&origin);
        let origin = Value::Finite(origin);
        match after {
            After::Infinite(from) => {
                Curve::assemble(origin.clone(), peak, TailSpec::Infinite { from })
            }
            After::Periodic {
                from,
                period,
                increment,
            } => Curve::assemble(
                origin,
                peak,
                TailSpec::Periodic {
                    from,
                    period,
                    increment,
                },
            ),
            After::Freeze(from) => {
                let level = peak
                    .pieces
                    .last()
                    .map(Piece::end_value)
                    .unwrap_or_else(|| origin.finite().unwrap().clone());
                let mut pieces = peak.pieces;
                pieces.push(Piece::new(from.clone(), &from + Q::one(), level, Q::zero()));
                let spec = TailSpec::Periodic {
                    from,
                    period: Q::one(),
                    increment: Q::zero(),
                };
                Curve::assemble(origin, Pwl::new(pieces), spec)
            }
        }
    }

    /// Start of the regime where the running maximum is carried by the
    /// current period alone.
    fn periodic_after(&self, cross: &Curve, origin: &Q, start: Q, period: Q, drift: Q) -> After {
        let end = &start + &period;
        let diff = difference(self, cross, &end);
        let before = diff.clip(&Q::zero(), &start).running_max(origin);
        let reached = before
            .pieces
            .last()
            .map(Piece::end_value)
            .unwrap_or_else(|| origin.clone());
        let top = diff.clip(&start, &end).sup().expect("finite pattern");
        let increment = &drift * &period;
        let lag = ceil_q(&((reached - top) / &increment)).max(Zero::zero());
        let from = start + &period * (Q::one() + Q::from_integer(lag));
        After::Periodic {
            from,
            period,
            increment,
        }
    }
}

/// `f − g` on `(0, h]` where both are finite.
fn difference(f: &Curve, g: &Curve, h: &Q) -> Pwl {
    f.unroll(h).zip_with(&g.unroll(h), |a, b, x, y| {
        Piece::new(x.clone(), y.clone(), a.at(x) - b.at(x), &a.slope - &b.slope)
    })
}
