//! Finite piecewise-linear functions on `(0, H]` with holes.
//!
//! This is the workhorse behind every curve operation: curves are unrolled to
//! a finite horizon, combined here piece by piece, and re-folded into a tail.
//! A hole stands for "no contribution" (`+∞` under a min envelope, `-∞` under
//! a max envelope).

use num::{Signed, Zero};

use crate::value::Q;

/// Affine piece on the half-open interval `(lo, hi]`; `v` is the right-limit
/// at `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Piece {
    pub lo: Q,
    pub hi: Q,
    pub v: Q,
    pub slope: Q,
}

impl Piece {
    pub fn new(lo: Q, hi: Q, v: Q, slope: Q) -> Self {
        debug_assert!(lo < hi, "empty piece ({lo}, {hi}]");
        Piece { lo, hi, v, slope }
    }

    /// Line value at `t` (no domain check; used for limits too).
    pub fn at(&self, t: &Q) -> Q {
        &self.v + &self.slope * (t - &self.lo)
    }

    pub fn end_value(&self) -> Q {
        self.at(&self.hi)
    }

    /// Restricts to `(lo', hi'] ∩ (lo, hi]`.
    pub fn clip(&self, lo: &Q, hi: &Q) -> Option<Piece> {
        let nlo = if lo > &self.lo {
            lo.clone()
        } else {
            self.lo.clone()
        };
        let nhi = if hi < &self.hi {
            hi.clone()
        } else {
            self.hi.clone()
        };
        if nlo >= nhi {
            return None;
        }
        let v = self.at(&nlo);
        Some(Piece::new(nlo, nhi, v, self.slope.clone()))
    }

    pub fn shifted(&self, dt: &Q, dv: &Q) -> Piece {
        Piece::new(
            &self.lo + dt,
            &self.hi + dt,
            &self.v + dv,
            self.slope.clone(),
        )
    }

    fn same_line(&self, other: &Piece) -> bool {
        self.slope == other.slope && self.at(&other.lo) == other.v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Envelope {
    Lower,
    Upper,
}

/// Sorted, pairwise-disjoint pieces.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Pwl {
    pub pieces: Vec<Piece>,
}

impl Pwl {
    pub fn new(pieces: Vec<Piece>) -> Self {
        let p = Pwl { pieces };
        debug_assert!(p.is_sorted_disjoint(), "{p:?}");
        p
    }

    pub fn single(p: Piece) -> Self {
        Pwl { pieces: vec![p] }
    }

    fn is_sorted_disjoint(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].hi <= w[1].lo)
    }

    /// Value at `t > 0`, `None` inside a hole.
    pub fn eval(&self, t: &Q) -> Option<Q> {
        let idx = self.pieces.partition_point(|p| &p.hi < t);
        let p = self.pieces.get(idx)?;
        if &p.lo < t && t <= &p.hi {
            Some(p.at(t))
        } else {
            None
        }
    }

    /// Start of the first hole at or after `from`, within `(from, until]`.
    pub fn first_gap(&self, until: &Q) -> Option<Q> {
        let mut cursor = Q::zero();
        for p in &self.pieces {
            if p.lo > cursor {
                return Some(cursor);
            }
            cursor = p.hi.clone();
            if &cursor >= until {
                return None;
            }
        }
        if &cursor < until {
            Some(cursor)
        } else {
            None
        }
    }

    pub fn clip(&self, lo: &Q, hi: &Q) -> Pwl {
        Pwl::new(self.pieces.iter().filter_map(|p| p.clip(lo, hi)).collect())
    }

    pub fn map_affine(&self, dt: &Q, dv: &Q) -> Pwl {
        Pwl::new(self.pieces.iter().map(|p| p.shifted(dt, dv)).collect())
    }

    /// Merges adjacent collinear pieces.
    pub fn coalesce(mut self) -> Pwl {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            if let Some(last) = out.last_mut() {
                if last.hi == p.lo && last.same_line(&p) {
                    last.hi = p.hi;
                    continue;
                }
            }
            out.push(p);
        }
        Pwl { pieces: out }
    }

    /// Supremum over the domain (limits at open ends included).
    pub fn sup(&self) -> Option<Q> {
        self.pieces
            .iter()
            .flat_map(|p| [p.v.clone(), p.end_value()])
            .max()
    }

    /// Infimum over the domain.
    pub fn inf(&self) -> Option<Q> {
        self.pieces
            .iter()
            .flat_map(|p| [p.v.clone(), p.end_value()])
            .min()
    }

    /// Elementary intervals of the union of both breakpoint sets, each paired
    /// with the covering pieces (if any).
    pub(crate) fn zip<'a>(
        &'a self,
        other: &'a Pwl,
    ) -> Vec<(Q, Q, Option<&'a Piece>, Option<&'a Piece>)> {
        let mut cuts: Vec<Q> = self
            .pieces
            .iter()
            .chain(other.pieces.iter())
            .flat_map(|p| [p.lo.clone(), p.hi.clone()])
            .collect();
        cuts.sort();
        cuts.dedup();
        let (mut i, mut j) = (0usize, 0usize);
        let mut out = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (x, y) = (&w[0], &w[1]);
            while i < self.pieces.len() && &self.pieces[i].hi <= x {
                i += 1;
            }
            while j < other.pieces.len() && &other.pieces[j].hi <= x {
                j += 1;
            }
            let a = self.pieces.get(i).filter(|p| &p.lo <= x);
            let b = other.pieces.get(j).filter(|p| &p.lo <= x);
            if a.is_some() || b.is_some() {
                out.push((x.clone(), y.clone(), a, b));
            }
        }
        out
    }

    /// Pointwise min (`Lower`) or max (`Upper`); a hole loses to any piece.
    pub fn merge(&self, other: &Pwl, env: Envelope) -> Pwl {
        let mut out = Vec::new();
        for (x, y, a, b) in self.zip(other) {
            match (a, b) {
                (Some(a), None) | (None, Some(a)) => {
                    out.push(Piece::new(x.clone(), y, a.at(&x), a.slope.clone()))
                }
                (Some(a), Some(b)) => {
                    let dx = a.at(&x) - b.at(&x);
                    let dy = a.at(&y) - b.at(&y);
                    // `better(d)`: a wins where the difference has this sign
                    let a_wins = |d: &Q| match env {
                        Envelope::Lower => !d.is_positive(),
                        Envelope::Upper => !d.is_negative(),
                    };
                    let pick = |p: &Piece, lo: &Q, hi: &Q| {
                        Piece::new(lo.clone(), hi.clone(), p.at(lo), p.slope.clone())
                    };
                    if a_wins(&dx) && a_wins(&dy) {
                        out.push(pick(a, &x, &y));
                    } else if a_wins(&-dx.clone()) && a_wins(&-dy.clone()) {
                        out.push(pick(b, &x, &y));
                    } else {
                        // strict sign change inside (x, y)
                        let z = &x + (&y - &x) * &dx / (&dx - &dy);
                        let (first, second) = if a_wins(&dx) { (a, b) } else { (b, a) };
                        out.push(pick(first, &x, &z));
                        out.push(pick(second, &z, &y));
                    }
                }
                (None, None) => {}
            }
        }
        Pwl { pieces: out }.coalesce()
    }

    /// Pointwise combination on the common domain; `f` maps the two line values
    /// (as affine functions `(v, slope)` at the interval start) to a new line.
    pub fn zip_with(&self, other: &Pwl, f: impl Fn(&Piece, &Piece, &Q, &Q) -> Piece) -> Pwl {
        let mut out = Vec::new();
        for (x, y, a, b) in self.zip(other) {
            if let (Some(a), Some(b)) = (a, b) {
                out.push(f(a, b, &x, &y));
            }
        }
        Pwl { pieces: out }.coalesce()
    }

    /// Envelope of an arbitrary (overlapping) family of pieces.
    pub fn envelope(pieces: Vec<Piece>, env: Envelope) -> Pwl {
        let mut layer: Vec<Pwl> = pieces.into_iter().map(Pwl::single).collect();
        if layer.is_empty() {
            return Pwl::default();
        }
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len() / 2 + 1);
            let mut it = layer.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.merge(&b, env)),
                    None => next.push(a),
                }
            }
            layer = next;
        }
        layer.pop().unwrap_or_default()
    }

    /// `max(f, 0)` on the domain.
    pub fn positive_part(&self) -> Pwl {
        let zero: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.lo.clone(), p.hi.clone(), Q::zero(), Q::zero()))
            .collect();
        self.merge(&Pwl { pieces: zero }, Envelope::Upper)
    }

    /// `t ↦ max(start, sup_{0<s≤t} f(s))`, assuming `f` has no holes.
    pub fn running_max(&self, start: &Q) -> Pwl {
        let mut best = start.clone();
        let mut out = Vec::new();
        for p in &self.pieces {
            let (a, b) = (p.v.clone(), p.end_value());
            if p.slope.is_positive() {
                if b <= best {
                    out.push(Piece::new(
                        p.lo.clone(),
                        p.hi.clone(),
                        best.clone(),
                        Q::zero(),
                    ));
                } else if a >= best {
                    out.push(p.clone());
                    best = b;
                } else {
                    let z = &p.lo + (&best - &a) / &p.slope;
                    out.push(Piece::new(p.lo.clone(), z.clone(), best.clone(), Q::zero()));
                    out.push(Piece::new(z, p.hi.clone(), best.clone(), p.slope.clone()));
                    best = b;
                }
            } else {
                // flat or decreasing: only the right-limit at lo can raise the max
                if a > best {
                    best = a;
                }
                out.push(Piece::new(
                    p.lo.clone(),
                    p.hi.clone(),
                    best.clone(),
                    Q::zero(),
                ));
            }
        }
        Pwl { pieces: out }.coalesce()
    }

    /// Pieces equal as functions on `(lo, hi]` (holes must coincide too).
    pub fn equal_on(&self, other: &Pwl, lo: &Q, hi: &Q) -> bool {
        let a = self.clip(lo, hi).coalesce();
        let b = other.clip(lo, hi).coalesce();
        a == b
    }
}
