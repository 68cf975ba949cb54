use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pwl::{Piece, Pwl};
use super::CurveError;
use crate::value::{ceil_q, fmt_q, lcm_q, parse_q, Value, Q};

/// Affine piece of a curve on `(start, next_start]`. `value` is the right-limit
/// at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: Q,
    pub value: Q,
    pub slope: Q,
}

/// Long-run behaviour of a curve after its transient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `+∞` for every `t > from`.
    Infinite { from: Q },
    /// The last segment extends forever.
    Affine,
    /// `f(t + period) = f(t) + increment` for every `t > from`.
    Periodic { from: Q, period: Q, increment: Q },
}

/// A non-decreasing, left-continuous function of `t ≥ 0` (zero before 0),
/// with values in `Q ∪ {+∞}`.
///
/// Always stored in canonical form, so `==` is function equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Curve {
    pub(crate) origin: Value,
    pub(crate) segments: Vec<Segment>,
    pub(crate) tail: Tail,
}

/// Tail description handed to [`Curve::assemble`]; the finite data must cover
/// `(0, from]` (infinite) or `(0, from + period]` (periodic).
#[derive(Clone, Debug)]
pub(crate) enum TailSpec {
    Infinite { from: Q },
    Periodic { from: Q, period: Q, increment: Q },
}

/// Tail summary used by the operation algorithms.
#[derive(Clone, Debug)]
pub(crate) enum TailInfo {
    Infinite { from: Q },
    Finite { from: Q, period: Option<Q>, rate: Q },
}

impl TailInfo {
    pub fn rate(&self) -> Option<&Q> {
        match self {
            TailInfo::Infinite { .. } => None,
            TailInfo::Finite { rate, .. } => Some(rate),
        }
    }
}

/// Common period of two finite tails (affine tails adapt to the other one).
pub(crate) fn common_period(a: &Option<Q>, b: &Option<Q>) -> Q {
    match (a, b) {
        (Some(x), Some(y)) => lcm_q(x, y),
        (Some(x), None) | (None, Some(x)) => x.clone(),
        (None, None) => Q::one(),
    }
}

impl Curve {
    // ---- atoms -------------------------------------------------------------

    /// `ε`: `+∞` for every `t ≥ 0`.
    pub fn epsilon() -> Curve {
        Curve {
            origin: Value::Infinite,
            segments: vec![],
            tail: Tail::Infinite { from: Q::zero() },
        }
    }

    /// `e`: `0` at `t = 0`, `+∞` afterwards.
    pub fn unit() -> Curve {
        Curve::gamma(Value::zero())
    }

    /// `γ^p`: `p` at `t = 0`, `+∞` afterwards.
    pub fn gamma(p: Value) -> Curve {
        match p {
            Value::Infinite => Curve::epsilon(),
            p => Curve {
                origin: p,
                segments: vec![],
                tail: Tail::Infinite { from: Q::zero() },
            },
        }
    }

    /// `δ^T`: `0` on `[0, T]`, `+∞` afterwards.
    pub fn delta(t: Q) -> Curve {
        Curve::atom(Value::zero(), t)
    }

    /// `γ^p δ^T`: `p` on `[0, T]`, `+∞` afterwards.
    pub fn atom(p: Value, t: Q) -> Curve {
        assert!(!t.is_negative(), "negative shift {t}");
        let Value::Finite(p) = p else {
            return Curve::epsilon();
        };
        if t.is_zero() {
            return Curve::gamma(Value::Finite(p));
        }
        Curve {
            origin: Value::Finite(p.clone()),
            segments: vec![Segment {
                start: Q::zero(),
                value: p,
                slope: Q::zero(),
            }],
            tail: Tail::Infinite { from: t },
        }
    }

    /// The zero curve: `0` for every `t ≥ 0`.
    pub fn zero() -> Curve {
        Curve::token_bucket(Value::zero(), Q::zero())
    }

    /// `t ↦ R·max(t - T, 0)`.
    pub fn rate_latency(rate: Q, latency: Q) -> Curve {
        assert!(!rate.is_negative() && !latency.is_negative());
        let mut pieces = Vec::new();
        if latency.is_positive() {
            pieces.push(Piece::new(Q::zero(), latency.clone(), Q::zero(), Q::zero()));
        }
        let end = &latency + Q::one();
        pieces.push(Piece::new(latency.clone(), end, Q::zero(), rate.clone()));
        Curve::assemble(
            Value::zero(),
            Pwl::new(pieces),
            TailSpec::Periodic {
                from: latency,
                period: Q::one(),
                increment: rate,
            },
        )
    }

    /// `t ↦ σ + r·t` for `t ≥ 0`.
    pub fn token_bucket(sigma: Value, r: Q) -> Curve {
        assert!(!r.is_negative());
        let Value::Finite(s) = sigma else {
            return Curve::epsilon();
        };
        Curve {
            origin: Value::Finite(s.clone()),
            segments: vec![Segment {
                start: Q::zero(),
                value: s,
                slope: r,
            }],
            tail: Tail::Affine,
        }
    }

    /// `(γ^p δ^T)*` for `p ≥ 0`, `T > 0`: `0` at 0 and `k·p` on `((k-1)T, kT]`.
    pub(crate) fn staircase(p: Q, t: Q) -> Curve {
        debug_assert!(t.is_positive());
        if p.is_zero() {
            return Curve::zero();
        }
        Curve::assemble(
            Value::zero(),
            Pwl::single(Piece::new(Q::zero(), t.clone(), p.clone(), Q::zero())),
            TailSpec::Periodic {
                from: Q::zero(),
                period: t,
                increment: p,
            },
        )
    }

    /// Builds a curve from explicit data and validates membership in the
    /// non-decreasing class.
    ///
    /// `segments` must start at 0, be strictly increasing in `start`, and cover
    /// `(0, from]` / `(0, from + period]` according to `tail`.
    pub fn from_parts(
        origin: Value,
        segments: Vec<Segment>,
        tail: Tail,
    ) -> Result<Curve, CurveError> {
        let bad = |m: &str| Err(CurveError::Invalid(m.to_string()));
        if segments.first().is_some_and(|s| !s.start.is_zero()) {
            return bad("first segment must start at 0");
        }
        if segments.windows(2).any(|w| w[0].start >= w[1].start) {
            return bad("segment starts must increase");
        }
        let end = match &tail {
            Tail::Infinite { from } => Some(from.clone()),
            Tail::Periodic {
                from,
                period,
                increment,
            } => {
                if !period.is_positive() || increment.is_negative() {
                    return bad("period must be > 0 and increment >= 0");
                }
                if !segments.iter().any(|s| &s.start == from) {
                    return bad("periodic tail start must be a segment start");
                }
                Some(from + period)
            }
            Tail::Affine => None,
        };
        if segments.is_empty() && !matches!(tail, Tail::Infinite { .. }) {
            return bad("finite tail needs at least one segment");
        }
        let horizon = match &end {
            Some(e) => e.clone(),
            None => segments
                .last()
                .map(|s| &s.start + Q::one())
                .unwrap_or_else(Q::one),
        };
        if let Some(e) = &end {
            if segments.last().is_some_and(|s| &s.start >= e) {
                return bad("segment starts beyond the covered range");
            }
            if segments.is_empty() && !e.is_zero() {
                return bad("no segments but non-empty transient");
            }
        }
        let mut pieces = Vec::with_capacity(segments.len());
        for (i, s) in segments.iter().enumerate() {
            let hi = segments
                .get(i + 1)
                .map(|n| n.start.clone())
                .unwrap_or_else(|| horizon.clone());
            pieces.push(Piece::new(
                s.start.clone(),
                hi,
                s.value.clone(),
                s.slope.clone(),
            ));
        }
        let spec = match tail {
            Tail::Infinite { from } => TailSpec::Infinite { from },
            Tail::Periodic {
                from,
                period,
                increment,
            } => TailSpec::Periodic {
                from,
                period,
                increment,
            },
            Tail::Affine => {
                let last = segments.last().expect("checked");
                TailSpec::Periodic {
                    from: last.start.clone(),
                    period: Q::one(),
                    increment: last.slope.clone(),
                }
            }
        };
        // validate on the raw data before canonicalizing
        let raw = Pwl::new(pieces.clone());
        check_monotone(&origin, &raw, &spec)?;
        Ok(Curve::assemble(origin, raw, spec))
    }

    // ---- accessors ---------------------------------------------------------

    pub fn origin(&self) -> &Value {
        &self.origin
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_epsilon(&self) -> bool {
        self.origin.is_infinite()
    }

    /// Right end of the stored data (`None` for an affine tail).
    fn data_end(&self) -> Option<Q> {
        match &self.tail {
            Tail::Infinite { from } => Some(from.clone()),
            Tail::Periodic { from, period, .. } => Some(from + period),
            Tail::Affine => None,
        }
    }

    /// Start of the tail regime.
    pub fn tail_start(&self) -> Q {
        match &self.tail {
            Tail::Infinite { from } | Tail::Periodic { from, .. } => from.clone(),
            Tail::Affine => self
                .segments
                .last()
                .map(|s| s.start.clone())
                .unwrap_or_default(),
        }
    }

    /// Long-run growth rate (`None` when the curve ends at `+∞`).
    pub fn long_run_rate(&self) -> Option<Q> {
        self.tail_info().rate().cloned()
    }

    pub(crate) fn tail_info(&self) -> TailInfo {
        match &self.tail {
            Tail::Infinite { from } => TailInfo::Infinite { from: from.clone() },
            Tail::Affine => {
                let last = self.segments.last().expect("affine tail has a segment");
                TailInfo::Finite {
                    from: last.start.clone(),
                    period: None,
                    rate: last.slope.clone(),
                }
            }
            Tail::Periodic {
                from,
                period,
                increment,
            } => TailInfo::Finite {
                from: from.clone(),
                period: Some(period.clone()),
                rate: increment / period,
            },
        }
    }

    /// Exact value at `t` (0 for `t < 0`).
    pub fn eval(&self, t: &Q) -> Value {
        if t.is_negative() {
            return Value::zero();
        }
        if t.is_zero() {
            return self.origin.clone();
        }
        let (t, lift) = match &self.tail {
            Tail::Infinite { from } if t > from => return Value::Infinite,
            Tail::Periodic {
                from,
                period,
                increment,
            } if t > &(from + period) => {
                let k = Q::from_integer(ceil_q(&((t - from) / period))) - Q::one();
                (t - &k * period, &k * increment)
            }
            _ => (t.clone(), Q::zero()),
        };
        let idx = self.segments.partition_point(|s| s.start < t) - 1;
        let s = &self.segments[idx];
        Value::Finite(&s.value + &s.slope * (&t - &s.start) + lift)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        use num::FromPrimitive;
        match Q::from_f64(t) {
            Some(t) => self.eval(&t).to_f64(),
            None => f64::NAN,
        }
    }

    /// Finite pieces covering `(0, h]` (up to where the curve becomes `+∞`).
    pub(crate) fn unroll(&self, h: &Q) -> Pwl {
        let mut out = Vec::new();
        let end = self.data_end();
        for (i, s) in self.segments.iter().enumerate() {
            let hi = match (self.segments.get(i + 1), &end) {
                (Some(next), _) => next.start.clone(),
                (None, Some(e)) => e.clone(),
                (None, None) => {
                    if h > &s.start {
                        h.clone()
                    } else {
                        continue;
                    }
                }
            };
            if let Some(p) = Piece::new(s.start.clone(), hi, s.value.clone(), s.slope.clone())
                .clip(&Q::zero(), h)
            {
                out.push(p);
            }
        }
        if let Tail::Periodic {
            from,
            period,
            increment,
        } = &self.tail
        {
            let pattern: Vec<Piece> = out.iter().filter(|p| &p.lo >= from).cloned().collect();
            let mut k = Q::one();
            while &(from + &k * period) < h {
                let (dt, dv) = (&k * period, &k * increment);
                for p in &pattern {
                    if let Some(c) = p.shifted(&dt, &dv).clip(&Q::zero(), h) {
                        out.push(c);
                    }
                }
                k += Q::one();
            }
        }
        Pwl::new(out)
    }

    /// `sup` and `inf` of `f(x) - rate·x` over one tail period.
    pub(crate) fn tail_offsets(&self) -> Option<(Q, Q)> {
        let TailInfo::Finite { from, period, rate } = self.tail_info() else {
            return None;
        };
        let d = period.unwrap_or_else(Q::one);
        let h = &from + &d;
        let window = self.unroll(&h).clip(&from, &h);
        let detrended: Vec<Piece> = window
            .pieces
            .iter()
            .map(|p| {
                Piece::new(
                    p.lo.clone(),
                    p.hi.clone(),
                    &p.v - &rate * &p.lo,
                    &p.slope - &rate,
                )
            })
            .collect();
        let w = Pwl { pieces: detrended };
        Some((w.sup()?, w.inf()?))
    }

    // ---- canonical form ----------------------------------------------------

    /// Like [`Curve::assemble`] for data that may dip below 0: takes
    /// `max(·, 0)`, delaying a periodic tail until the clamp no longer bites.
    pub(crate) fn assemble_clamped(origin: Value, pwl: Pwl, spec: TailSpec) -> Curve {
        let origin = origin.positive_part();
        let TailSpec::Periodic {
            from,
            period,
            increment,
        } = spec
        else {
            return Curve::assemble(origin, pwl.positive_part(), spec);
        };
        let end = &from + &period;
        let pattern: Vec<Piece> = pwl.clip(&from, &end).pieces;
        let mut new_from = from.clone();
        if increment.is_positive() {
            if let Some(low) = (Pwl {
                pieces: pattern.clone(),
            })
            .inf()
            {
                if low.is_negative() {
                    let k = ceil_q(&(-low / &increment));
                    new_from += Q::from_integer(k) * &period;
                }
            }
        }
        let mut pieces = pwl.clip(&Q::zero(), &end).pieces;
        let mut k = Q::one();
        while &from + &k * &period < &new_from + &period {
            pieces.extend(
                pattern
                    .iter()
                    .map(|p| p.shifted(&(&k * &period), &(&k * &increment))),
            );
            k += Q::one();
        }
        let spec = TailSpec::Periodic {
            from: new_from,
            period,
            increment,
        };
        Curve::assemble(origin, Pwl::new(pieces).positive_part(), spec)
    }

    /// Folds finite data plus a tail description into canonical form.
    pub(crate) fn assemble(origin: Value, pwl: Pwl, spec: TailSpec) -> Curve {
        if origin.is_infinite() {
            return Curve::epsilon();
        }
        let end = match &spec {
            TailSpec::Infinite { from } => from.clone(),
            TailSpec::Periodic { from, period, .. } => from + period,
        };
        let pwl = pwl.clip(&Q::zero(), &end).coalesce();
        if let Some(gap) = pwl.first_gap(&end) {
            return Curve::assemble_infinite(origin, pwl.clip(&Q::zero(), &gap), gap);
        }
        match spec {
            TailSpec::Infinite { from } => Curve::assemble_infinite(origin, pwl, from),
            TailSpec::Periodic {
                from,
                period,
                increment,
            } => Curve::assemble_periodic(origin, pwl, from, period, increment),
        }
    }

    fn assemble_infinite(origin: Value, pwl: Pwl, from: Q) -> Curve {
        let from = pwl
            .pieces
            .last()
            .map(|p| p.hi.clone())
            .unwrap_or_default()
            .min(from);
        Curve {
            origin,
            segments: to_segments(&pwl.clip(&Q::zero(), &from).coalesce()),
            tail: Tail::Infinite { from },
        }
    }

    fn assemble_periodic(origin: Value, pwl: Pwl, from: Q, period: Q, increment: Q) -> Curve {
        let (mut from, mut period, mut increment) = (from, period, increment);

        // shortest period: try splitting the pattern into k equal copies
        let in_pattern = pwl.clip(&from, &(&from + &period)).pieces.len();
        for k in (2..=in_pattern + 1).rev() {
            let kq = Q::from_integer(k.into());
            let (d, c) = (&period / &kq, &increment / &kq);
            let shifted = pwl
                .clip(&(&from + &d), &(&from + &period))
                .map_affine(&-d.clone(), &-c.clone());
            if shifted.equal_on(&pwl, &from, &(&from + &period - &d)) {
                period = d;
                increment = c;
                break;
            }
        }

        // earliest start: scan backwards while f(t + d) - c == f(t)
        if from.is_positive() {
            let shifted = pwl
                .clip(&period, &(&from + &period))
                .map_affine(&-period.clone(), &-increment.clone());
            let base = pwl.clip(&Q::zero(), &from);
            let mut new_from = Q::zero();
            let zipped = base.zip(&shifted);
            for (x, y, a, b) in zipped.iter().rev() {
                let same = match (a, b) {
                    (Some(a), Some(b)) => a.at(x) == b.at(x) && a.slope == b.slope,
                    _ => false,
                };
                if !same {
                    new_from = y.clone();
                    break;
                }
            }
            from = new_from;
        }

        let end = &from + &period;
        let head = pwl.clip(&Q::zero(), &from).coalesce();
        let pattern = pwl.clip(&from, &end).coalesce();
        let rate = &increment / &period;
        let seam_ok = pattern.pieces.len() == 1 && pattern.pieces[0].slope == rate;
        if seam_ok {
            // a single line repeating with its own slope: affine tail
            let all = pwl.clip(&Q::zero(), &end).coalesce();
            return Curve {
                origin,
                segments: to_segments(&all),
                tail: Tail::Affine,
            };
        }
        let mut segments = to_segments(&head);
        segments.extend(to_segments(&pattern));
        Curve {
            origin,
            segments,
            tail: Tail::Periodic {
                from,
                period,
                increment,
            },
        }
    }

    /// Checks membership in the non-decreasing class (values ≥ 0 included).
    pub fn is_in_f(&self) -> bool {
        if self.origin.is_infinite() {
            return true;
        }
        let end = self
            .data_end()
            .unwrap_or_else(|| self.tail_start() + Q::one());
        let pwl = self.unroll(&end);
        let spec = match &self.tail {
            Tail::Infinite { from } => TailSpec::Infinite { from: from.clone() },
            Tail::Periodic {
                from,
                period,
                increment,
            } => TailSpec::Periodic {
                from: from.clone(),
                period: period.clone(),
                increment: increment.clone(),
            },
            Tail::Affine => TailSpec::Periodic {
                from: self.tail_start(),
                period: Q::one(),
                increment: self.long_run_rate().unwrap(),
            },
        };
        self.origin >= Value::zero() && check_monotone(&self.origin, &pwl, &spec).is_ok()
    }

    /// Breakpoint polyline on `[0, h]` with explicit vertical jumps, suitable
    /// for step plots. `+∞` stretches are omitted.
    pub fn polyline(&self, h: &Q) -> Vec<(Q, Q)> {
        let mut pts = vec![(Q::zero(), Q::zero())];
        if let Value::Finite(o) = &self.origin {
            pts.push((Q::zero(), o.clone()));
        }
        for p in self.unroll(h).pieces {
            pts.push((p.lo.clone(), p.v.clone()));
            pts.push((p.hi.clone(), p.end_value()));
        }
        pts.dedup();
        pts
    }
}

fn to_segments(pwl: &Pwl) -> Vec<Segment> {
    pwl.pieces
        .iter()
        .map(|p| Segment {
            start: p.lo.clone(),
            value: p.v.clone(),
            slope: p.slope.clone(),
        })
        .collect()
}

fn check_monotone(origin: &Value, pwl: &Pwl, spec: &TailSpec) -> Result<(), CurveError> {
    let bad = |m: String| Err(CurveError::Invalid(m));
    let Value::Finite(o) = origin else {
        return Ok(());
    };
    if o.is_negative() {
        return bad(format!("negative value {o} at t = 0"));
    }
    let mut prev = o.clone();
    for p in &pwl.pieces {
        if p.slope.is_negative() {
            return bad(format!("negative slope on ({}, {}]", p.lo, p.hi));
        }
        if p.v < prev {
            return bad(format!("decreasing jump at t = {}", p.lo));
        }
        prev = p.end_value();
    }
    if let TailSpec::Periodic {
        from, increment, ..
    } = spec
    {
        if let Some(first) = pwl.pieces.iter().find(|p| &p.lo >= from) {
            if &first.v + increment < prev {
                return bad("decreasing across the periodic seam".to_string());
            }
        }
    }
    Ok(())
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve({}", self.origin)?;
        for s in &self.segments {
            write!(
                f,
                " | ({}: {} +{}t)",
                fmt_q(&s.start),
                fmt_q(&s.value),
                fmt_q(&s.slope)
            )?;
        }
        match &self.tail {
            Tail::Infinite { from } => write!(f, " | inf after {})", fmt_q(from)),
            Tail::Affine => write!(f, " | affine)"),
            Tail::Periodic {
                from,
                period,
                increment,
            } => {
                write!(
                    f,
                    " | periodic from {} d={} c={})",
                    fmt_q(from),
                    fmt_q(period),
                    fmt_q(increment)
                )
            }
        }
    }
}

// ---- serialization ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TailRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CurveRecord {
    origin: String,
    transient: Vec<[String; 3]>,
    tail: TailRecord,
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let tail = match &self.tail {
            Tail::Infinite { from } => TailRecord {
                kind: "infinite".into(),
                from: Some(fmt_q(from)),
                d: None,
                c: None,
            },
            Tail::Affine => TailRecord {
                kind: "affine".into(),
                from: None,
                d: None,
                c: None,
            },
            Tail::Periodic {
                from,
                period,
                increment,
            } => TailRecord {
                kind: "periodic".into(),
                from: Some(fmt_q(from)),
                d: Some(fmt_q(period)),
                c: Some(fmt_q(increment)),
            },
        };
        CurveRecord {
            origin: self.origin.to_string(),
            transient: self
                .segments
                .iter()
                .map(|g| [fmt_q(&g.start), fmt_q(&g.value), fmt_q(&g.slope)])
                .collect(),
            tail,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let rec = CurveRecord::deserialize(d)?;
        let pq = |s: &str| parse_q(s).map_err(D::Error::custom);
        let field = |o: &Option<String>, name: &str| -> Result<Q, D::Error> {
            match o {
                Some(s) => pq(s),
                None => Err(D::Error::custom(format!("tail is missing `{name}`"))),
            }
        };
        let origin: Value = rec.origin.parse().map_err(D::Error::custom)?;
        let segments = rec
            .transient
            .iter()
            .map(|[t, v, s]| {
                Ok(Segment {
                    start: pq(t)?,
                    value: pq(v)?,
                    slope: pq(s)?,
                })
            })
            .collect::<Result<Vec<_>, D::Error>>()?;
        let tail = match rec.tail.kind.as_str() {
            "infinite" => Tail::Infinite {
                from: field(&rec.tail.from, "from")?,
            },
            "affine" => Tail::Affine,
            "periodic" => Tail::Periodic {
                from: field(&rec.tail.from, "from")?,
                period: field(&rec.tail.d, "d")?,
                increment: field(&rec.tail.c, "c")?,
            },
            other => return Err(D::Error::custom(format!("unknown tail kind {other:?}"))),
        };
        Curve::from_parts(origin, segments, tail).map_err(D::Error::custom)
    }
}
