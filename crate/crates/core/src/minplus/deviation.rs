use num::{One, Signed, Zero};

use super::curve::{common_period, Curve, TailInfo};
use super::pwl::{Piece, Pwl};
use crate::value::{Value, Q};

impl Curve {
    /// Vertical deviation `sup_{t ≥ 0} α(t) - β(t)` with `self = α`.
    pub fn vdev(&self, beta: &Curve) -> Value {
        let alpha = self;
        if alpha.is_epsilon() {
            return if beta.is_epsilon() {
                Value::Finite(Q::zero())
            } else {
                Value::Infinite
            };
        }
        if beta.is_epsilon() {
            return Value::Finite(Q::zero());
        }
        let h = match (alpha.tail_info(), beta.tail_info()) {
            (TailInfo::Infinite { from: ta }, TailInfo::Infinite { from: tb }) => {
                if ta < tb {
                    return Value::Infinite;
                }
                tb
            }
            (TailInfo::Infinite { .. }, TailInfo::Finite { .. }) => return Value::Infinite,
            (TailInfo::Finite { .. }, TailInfo::Infinite { from: tb }) => tb,
            (
                TailInfo::Finite {
                    from: ta,
                    period: pa,
                    rate: ra,
                },
                TailInfo::Finite {
                    from: tb,
                    period: pb,
                    rate: rb,
                },
            ) => {
                if ra > rb {
                    return Value::Infinite;
                }
                let base = ta.max(tb);
                if ra == rb {
                    base + common_period(&pa, &pb)
                } else {
                    let (ma, _) = alpha.tail_offsets().expect("finite tail");
                    let (_, mb) = beta.tail_offsets().expect("finite tail");
                    base.max((ma - mb) / (rb - ra)) + Q::one()
                }
            }
        };
        let mut best = match (&alpha.origin, &beta.origin) {
            (Value::Finite(a), Value::Finite(b)) => a - b,
            _ => unreachable!("non-epsilon curves have finite origins"),
        };
        let diff = alpha.unroll(&h).zip_with(&beta.unroll(&h), |a, b, x, y| {
            Piece::new(x.clone(), y.clone(), a.at(x) - b.at(x), &a.slope - &b.slope)
        });
        if let Some(s) = diff.sup() {
            best = best.max(s);
        }
        Value::Finite(best)
    }

    /// Horizontal deviation `sup_{t ≥ 0} inf{d ≥ 0 : α(t) ≤ β(t + d)}` with
    /// `self = α`.
    pub fn hdev(&self, beta: &Curve) -> Value {
        let alpha = self;
        if alpha.origin.is_infinite() || beta.origin.is_infinite() {
            return if alpha.origin.is_infinite() && !beta.origin.is_infinite() {
                Value::Infinite
            } else {
                Value::Finite(Q::zero())
            };
        }
        let ai = alpha.tail_info();
        let bi = beta.tail_info();
        // extra candidate when α jumps to +∞ and β does too
        let mut tail_delay: Option<Q> = None;
        let h = match (&ai, &bi) {
            (TailInfo::Infinite { .. }, TailInfo::Finite { .. }) => return Value::Infinite,
            (TailInfo::Infinite { from: ta }, TailInfo::Infinite { from: tb }) => {
                tail_delay = Some(tb - ta);
                ta.clone()
            }
            (TailInfo::Finite { from: ta, .. }, TailInfo::Infinite { from: tb }) => {
                ta.clone().max(tb.clone()) + Q::one()
            }
            (
                TailInfo::Finite {
                    from: ta,
                    period: pa,
                    rate: ra,
                },
                TailInfo::Finite {
                    from: tb,
                    period: pb,
                    rate: rb,
                },
            ) => {
                if ra > rb {
                    return Value::Infinite;
                }
                if ra < rb {
                    let (ma, _) = alpha.tail_offsets().expect("finite tail");
                    let (_, mb) = beta.tail_offsets().expect("finite tail");
                    ta.clone().max(tb.clone()).max((ma - mb) / (rb - ra)) + Q::one()
                } else if ra.is_zero() {
                    ta.clone().max(tb.clone()) + Q::one()
                } else {
                    let l = common_period(pa, pb);
                    let (_, ma) = alpha.tail_offsets().expect("finite tail");
                    let level = beta.eval(&(tb + &l)).finite().cloned().expect("finite");
                    ta.clone().max((level - ma) / ra) + &l
                }
            }
        };
        let a_pwl = alpha.unroll(&h);
        let y_max = a_pwl
            .sup()
            .unwrap_or_else(Q::zero)
            .max(alpha.origin.finite().cloned().unwrap_or_default());

        let Some(inv) = pseudo_inverse(beta, &y_max) else {
            return Value::Infinite;
        };
        let b0 = beta.origin.finite().cloned().unwrap_or_default();
        let inv_at = |y: &Q| -> Q {
            if y <= &b0 {
                Q::zero()
            } else {
                inv.eval(y).expect("inverse covers the range")
            }
        };
        // right-limit of the inverse at y
        let inv_right = |y: &Q| -> Q {
            if y < &b0 {
                return Q::zero();
            }
            let idx = inv.pieces.partition_point(|p| &p.hi <= y);
            match inv.pieces.get(idx) {
                Some(p) if &p.lo <= y => p.at(y),
                _ => inv_at(y),
            }
        };

        let mut best = inv_at(alpha.origin.finite().expect("finite"));
        if let Some(d) = tail_delay {
            best = best.max(d);
        }
        for p in &a_pwl.pieces {
            if p.slope.is_zero() {
                best = best.max(inv_at(&p.v) - &p.lo);
                continue;
            }
            let (y_lo, y_hi) = (p.v.clone(), p.end_value());
            let t_of = |y: &Q| &p.lo + (y - &p.v) / &p.slope;
            best = best.max(inv_right(&y_lo) - &p.lo);
            best = best.max(inv_at(&y_hi) - &p.hi);
            for ip in &inv.pieces {
                if ip.hi <= y_lo || ip.lo >= y_hi {
                    continue;
                }
                let lo = ip.lo.clone().max(y_lo.clone());
                let hi = ip.hi.clone().min(y_hi.clone());
                best = best.max(ip.at(&lo) - t_of(&lo));
                best = best.max(ip.at(&hi) - t_of(&hi));
            }
        }
        Value::Finite(best.max(Q::zero()))
    }
}

/// Lower pseudo-inverse `y ↦ inf{s : β(s) ≥ y}` on `(β(0), y_max]`, as pieces
/// over `y`. `None` when β never reaches `y_max`.
fn pseudo_inverse(beta: &Curve, y_max: &Q) -> Option<Pwl> {
    let b0 = beta.origin.finite().cloned()?;
    if y_max <= &b0 {
        return Some(Pwl::default());
    }
    let info = beta.tail_info();
    let horizon = match &info {
        TailInfo::Infinite { from } => from.clone(),
        TailInfo::Finite { from, period, rate } => {
            if !rate.is_positive() {
                // bounded: make sure the ceiling is high enough
                let h = from + period.clone().unwrap_or_else(Q::one);
                let top = beta.eval(&h).finite().cloned()?;
                if &top < y_max {
                    return None;
                }
                h
            } else {
                let (_, m) = beta.tail_offsets()?;
                from.clone().max((y_max - m) / rate)
                    + period.clone().unwrap_or_else(Q::one)
                    + Q::one()
            }
        }
    };
    let bp = beta.unroll(&horizon);
    let mut out: Vec<Piece> = Vec::new();
    let mut y = b0;
    for p in &bp.pieces {
        if &y >= y_max {
            break;
        }
        if p.v > y {
            out.push(Piece::new(y.clone(), p.v.clone(), p.lo.clone(), Q::zero()));
            y = p.v.clone();
        }
        let end = p.end_value();
        if p.slope.is_positive() && end > y {
            out.push(Piece::new(
                y.clone(),
                end.clone(),
                p.lo.clone() + (&y - &p.v) / &p.slope,
                Q::one() / &p.slope,
            ));
            y = end;
        }
    }
    if &y < y_max {
        match info {
            TailInfo::Infinite { from } => out.push(Piece::new(y, y_max.clone(), from, Q::zero())),
            TailInfo::Finite { .. } => return None,
        }
    }
    Some(Pwl::new(out))
}
