use num::{One, Signed, Zero};

use super::curve::{common_period, Curve, TailInfo, TailSpec};
use super::pwl::{Envelope, Piece, Pwl};
use super::CurveError;
use crate::value::{Value, Q};

fn max_q(xs: impl IntoIterator<Item = Q>) -> Q {
    xs.into_iter().max().unwrap_or_default()
}

fn finite_origin(c: &Curve) -> Q {
    c.origin.finite().cloned().expect("finite origin")
}

impl Curve {
    /// Pointwise minimum `f ⊕ g`.
    pub fn min(&self, other: &Curve) -> Curve {
        if self.is_epsilon() {
            return other.clone();
        }
        if other.is_epsilon() {
            return self.clone();
        }
        let origin = self.origin.clone().min(other.origin.clone());
        let (spec, h) = match (self.tail_info(), other.tail_info()) {
            (TailInfo::Infinite { from: a }, TailInfo::Infinite { from: b }) => {
                let from = a.max(b);
                (TailSpec::Infinite { from: from.clone() }, from)
            }
            (
                TailInfo::Infinite { from: a },
                TailInfo::Finite {
                    from: b,
                    period,
                    rate,
                },
            )
            | (
                TailInfo::Finite {
                    from: b,
                    period,
                    rate,
                },
                TailInfo::Infinite { from: a },
            ) => periodic_spec(a.max(b), period.unwrap_or_else(Q::one), &rate),
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
                if ra == rb {
                    periodic_spec(a.max(b), common_period(&pa, &pb), &ra)
                } else {
                    // the lower-rate curve wins after the envelopes cross
                    let (lo, hi, period, rate) = if ra < rb {
                        (self, other, pa, ra)
                    } else {
                        (other, self, pb, rb)
                    };
                    let (m_lo, _) = lo.tail_offsets().expect("finite tail");
                    let (_, m_hi) = hi.tail_offsets().expect("finite tail");
                    let r_hi = hi.long_run_rate().expect("finite tail");
                    let cross = (m_lo - m_hi) / (r_hi - &rate);
                    periodic_spec(max_q([a, b, cross]), period.unwrap_or_else(Q::one), &rate)
                }
            }
        };
        let env = self.unroll(&h).merge(&other.unroll(&h), Envelope::Lower);
        Curve::assemble(origin, env, spec)
    }

    /// Min-plus convolution `f * g`.
    pub fn conv(&self, other: &Curve) -> Curve {
        if self.is_epsilon() || other.is_epsilon() {
            return Curve::epsilon();
        }
        let (spec, h) = conv_tail(self, other);
        let (f0, g0) = (finite_origin(self), finite_origin(other));
        let (fp, gp) = (self.unroll(&h), other.unroll(&h));
        let zero = Q::zero();
        let mut cands: Vec<Piece> = Vec::new();
        cands.extend(gp.pieces.iter().map(|p| p.shifted(&zero, &f0)));
        cands.extend(fp.pieces.iter().map(|p| p.shifted(&zero, &g0)));
        for a in &fp.pieces {
            for b in &gp.pieces {
                let lo = &a.lo + &b.lo;
                if lo >= h {
                    break;
                }
                // the flatter piece is traversed first
                let (first, second) = if a.slope <= b.slope { (a, b) } else { (b, a) };
                let mid = &lo + (&first.hi - &first.lo);
                let hi = &a.hi + &b.hi;
                let v = &a.v + &b.v;
                let p1 = Piece::new(lo.clone(), mid.clone(), v.clone(), first.slope.clone());
                let v2 = p1.end_value();
                cands.extend(p1.clip(&zero, &h));
                cands.extend(Piece::new(mid, hi, v2, second.slope.clone()).clip(&zero, &h));
            }
        }
        let env = Pwl::envelope(cands, Envelope::Lower);
        Curve::assemble(Value::Finite(f0 + g0), env, spec)
    }

    /// Min-plus deconvolution `(f ⊘ g)(t) = sup_{u ≥ 0} f(t + u) - g(u)`,
    /// clamped at 0.
    pub fn deconv(&self, other: &Curve) -> Result<Curve, CurveError> {
        if other.is_epsilon() {
            return Ok(Curve::zero());
        }
        let unbounded = |why: &str| Err(CurveError::Unbounded(why.to_string()));
        if self.is_epsilon() {
            return unbounded("numerator is +inf everywhere");
        }
        let (f0, g0) = (finite_origin(self), finite_origin(other));
        let fi = self.tail_info();
        let gi = other.tail_info();

        // s-range [0, s_max] that can realise the supremum, plus result tail
        let (s_max, spec, h) = match (&fi, &gi) {
            (TailInfo::Infinite { from: tf }, TailInfo::Infinite { from: tg }) => {
                if tf < tg {
                    return unbounded("numerator reaches +inf before the denominator");
                }
                let from = tf - tg;
                (tg.clone(), TailSpec::Infinite { from: from.clone() }, from)
            }
            (TailInfo::Infinite { .. }, TailInfo::Finite { .. }) => {
                return unbounded("numerator reaches +inf while the denominator stays finite");
            }
            (
                TailInfo::Finite {
                    from: tf,
                    period,
                    rate: rf,
                },
                _,
            ) => {
                let d = period.clone().unwrap_or_else(Q::one);
                let h = tf + &d;
                let spec = periodic_spec(tf.clone(), d.clone(), rf).0;
                let s_max = match &gi {
                    TailInfo::Infinite { from: tg } => tg.clone(),
                    TailInfo::Finite {
                        from: tg,
                        period: pg,
                        rate: rg,
                    } => {
                        if rf > rg {
                            return unbounded("arrival rate exceeds service rate");
                        }
                        if rf == rg {
                            tf.clone().max(tg.clone()) + common_period(period, pg)
                        } else {
                            let m_all = self.detrended_sup();
                            let (_, mg) = other.tail_offsets().expect("finite tail");
                            let reach = (rf * &h + m_all - mg - &f0 + &g0) / (rg - rf);
                            tg.clone().max(reach) + Q::one()
                        }
                    }
                };
                (s_max, spec, h)
            }
        };

        let fp = self.unroll(&(&h + &s_max));
        let gp = other.unroll(&s_max);
        let zero = Q::zero();

        // value at t = 0
        let mut origin = &f0 - &g0;
        let diff = fp.zip_with(&gp, |a, b, x, y| {
            Piece::new(x.clone(), y.clone(), a.at(x) - b.at(x), &a.slope - &b.slope)
        });
        if let Some(s) = diff.sup() {
            origin = origin.max(s);
        }

        let mut cands: Vec<Piece> = Vec::new();
        cands.extend(
            fp.clip(&zero, &h)
                .pieces
                .into_iter()
                .map(|p| p.shifted(&zero, &-g0.clone())),
        );
        for a in &fp.pieces {
            for b in &gp.pieces {
                let (lo, hi) = (&a.lo - &b.hi, &a.hi - &b.lo);
                if hi <= zero || lo >= h {
                    continue;
                }
                let line = |t0: &Q, s: &Q| a.at(&(t0 + s)) - b.at(s);
                if a.slope >= b.slope {
                    // s pinned at min(b.hi, a.hi - t)
                    let mid = &a.hi - &b.hi;
                    let p1 = Piece::new(lo.clone(), mid.clone(), line(&lo, &b.hi), a.slope.clone());
                    let p2 =
                        Piece::new(mid.clone(), hi.clone(), line(&mid, &b.hi), b.slope.clone());
                    cands.extend(p1.clip(&zero, &h));
                    cands.extend(p2.clip(&zero, &h));
                } else {
                    // s pinned at max(b.lo, a.lo - t)
                    let mid = &a.lo - &b.lo;
                    let p1 = Piece::new(lo.clone(), mid.clone(), line(&lo, &b.hi), b.slope.clone());
                    let p2 =
                        Piece::new(mid.clone(), hi.clone(), line(&mid, &b.lo), a.slope.clone());
                    cands.extend(p1.clip(&zero, &h));
                    cands.extend(p2.clip(&zero, &h));
                }
            }
        }
        let env = Pwl::envelope(cands, Envelope::Upper);
        Ok(Curve::assemble_clamped(Value::Finite(origin), env, spec))
    }

    /// `sup_{x ≥ 0} f(x) - ρ·x` over the whole curve.
    fn detrended_sup(&self) -> Q {
        let info = self.tail_info();
        let TailInfo::Finite { from, period, rate } = info else {
            unreachable!()
        };
        let h = from + period.unwrap_or_else(Q::one);
        let pieces = self
            .unroll(&h)
            .pieces
            .into_iter()
            .map(|p| {
                Piece::new(
                    p.lo.clone(),
                    p.hi.clone(),
                    &p.v - &rate * &p.lo,
                    &p.slope - &rate,
                )
            })
            .collect();
        let s = Pwl { pieces }.sup();
        let o = finite_origin(self);
        s.map_or(o.clone(), |s| s.max(o))
    }

    /// `t ↦ max(f(t) - a, 0)` for `a ≥ 0`.
    pub fn positive_shift(&self, a: &Q) -> Curve {
        assert!(!a.is_negative(), "negative shift {a}");
        if self.is_epsilon() {
            return Curve::epsilon();
        }
        let origin = &self.origin - a;
        let (spec, h) = match self.tail_info() {
            TailInfo::Infinite { from } => (TailSpec::Infinite { from: from.clone() }, from),
            TailInfo::Finite { from, period, rate } => {
                periodic_spec(from, period.unwrap_or_else(Q::one), &rate)
            }
        };
        let pwl = self.unroll(&h).map_affine(&Q::zero(), &-a.clone());
        Curve::assemble_clamped(origin, pwl, spec)
    }
}

/// Periodic tail spec from `from` with the given period and rate, plus the
/// horizon that covers one period.
fn periodic_spec(from: Q, period: Q, rate: &Q) -> (TailSpec, Q) {
    let h = &from + &period;
    let increment = rate * &period;
    (
        TailSpec::Periodic {
            from,
            period,
            increment,
        },
        h,
    )
}

fn conv_tail(f: &Curve, g: &Curve) -> (TailSpec, Q) {
    match (f.tail_info(), g.tail_info()) {
        (TailInfo::Infinite { from: a }, TailInfo::Infinite { from: b }) => {
            let from = a + b;
            (TailSpec::Infinite { from: from.clone() }, from)
        }
        (
            TailInfo::Infinite { from: a },
            TailInfo::Finite {
                from: b,
                period,
                rate,
            },
        )
        | (
            TailInfo::Finite {
                from: b,
                period,
                rate,
            },
            TailInfo::Infinite { from: a },
        ) => periodic_spec(a + b, period.unwrap_or_else(Q::one), &rate),
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
            let l = common_period(&pa, &pb);
            let base = &a + &b;
            if ra == rb {
                return periodic_spec(&base + &l * Q::from_integer(2.into()), l, &ra);
            }
            // the lower-rate curve carries the tail once the other one's
            // contribution is confined to its transient
            let (lo, hi, lo_period, lo_rate, hi_from, hi_rate) = if ra < rb {
                (f, g, pa, ra, b.clone(), rb)
            } else {
                (g, f, pb, rb, a.clone(), ra)
            };
            let lo_from = lo.tail_start();
            let hi_d = hi_period(hi);
            let x0 = &hi_from + &hi_d;
            let (m_lo, _) = lo.tail_offsets().expect("finite tail");
            let (_, m_hi) = hi.tail_offsets().expect("finite tail");
            let hi_x0 = hi.eval(&x0).finite().cloned().expect("finite");
            let upper = m_lo + hi_x0 - &lo_rate * &x0;
            let lower = finite_origin(lo) - &hi_rate * &lo_from + m_hi;
            let cross = (upper - lower) / (&hi_rate - &lo_rate);
            let from = max_q([
                &base + &l * Q::from_integer(2.into()),
                &base + &hi_d,
                &lo_from + &x0,
                cross,
            ]);
            periodic_spec(from, lo_period.unwrap_or_else(Q::one), &lo_rate)
        }
    }
}

fn hi_period(c: &Curve) -> Q {
    match c.tail_info() {
        TailInfo::Finite { period, .. } => period.unwrap_or_else(Q::one),
        TailInfo::Infinite { .. } => Q::one(),
    }
}
