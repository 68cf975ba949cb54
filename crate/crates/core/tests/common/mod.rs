//! Brute-force evaluators and random curve generators shared by the
//! integration tests. Nothing here uses the crate's own operations: every
//! reference value comes from `eval` plus the defining min/sup formulas on a
//! rational grid.
#![allow(dead_code)]

pub mod props;

use num::{One, Zero};
use proptest::prelude::*;
use roadcalc::{q, qi, Curve, Segment, Tail, Value, Q};

/// Every generated breakpoint is an integer, so a quarter step resolves all
/// cells of sums and differences of breakpoints.
pub fn step() -> Q {
    q(1, 4)
}

pub fn grid(h: &Q, step: &Q) -> Vec<Q> {
    let mut out = Vec::new();
    let mut t = Q::zero();
    while &t <= h {
        out.push(t.clone());
        t += step;
    }
    out
}

fn fin(v: Value) -> Option<Q> {
    match v {
        Value::Finite(x) => Some(x),
        Value::Infinite => None,
    }
}

/// `min_{0 ≤ s ≤ t} f(s) + g(t - s)` over grid `s`, for every grid `t ≤ h`.
pub fn conv_table(f: &Curve, g: &Curve, h: &Q, step: &Q) -> Vec<(Q, Value)> {
    let ts = grid(h, step);
    let fv: Vec<Value> = ts.iter().map(|t| f.eval(t)).collect();
    let gv: Vec<Value> = ts.iter().map(|t| g.eval(t)).collect();
    ts.iter()
        .enumerate()
        .map(|(k, t)| {
            let best = (0..=k)
                .map(|j| fv[j].clone() + gv[k - j].clone())
                .min()
                .unwrap_or(Value::Infinite);
            (t.clone(), best)
        })
        .collect()
}

/// `sup_{0 ≤ s ≤ s_max} f(t + s) - g(s)` over grid `s`, including right-limits
/// in `s`, clamped at 0, for `t` on the coarser grid `t_step` up to `h`.
/// `None` when some term is `+∞ - finite`.
pub fn deconv_table(
    f: &Curve,
    g: &Curve,
    h: &Q,
    t_step: &Q,
    step: &Q,
    s_max: &Q,
) -> Vec<(Q, Option<Q>)> {
    // everything lives on the fine grid `eta`
    let eta = step / qi(4);
    let idx = |x: &Q| -> usize { (x / &eta).to_integer().try_into().unwrap() };
    let (s_n, t_jump, s_jump) = (idx(s_max), idx(t_step), idx(step));
    let f_n = idx(h) + s_n + 2;
    let fv: Vec<Value> = (0..=f_n).map(|i| f.eval(&(&eta * qi(i as i64)))).collect();
    let gv: Vec<Value> = (0..=s_n + 2)
        .map(|i| g.eval(&(&eta * qi(i as i64))))
        .collect();
    let phi = |t: usize, s: usize| -> Option<Option<Q>> {
        match (&fv[t + s], &gv[s]) {
            (_, Value::Infinite) => Some(None),
            (Value::Infinite, Value::Finite(_)) => None,
            (Value::Finite(a), Value::Finite(b)) => Some(Some(a - b)),
        }
    };
    let at = |t: usize| -> Option<Q> {
        let mut best = Q::zero();
        for s in (0..=s_n).step_by(s_jump) {
            if let Some(v) = phi(t, s)? {
                best = best.max(v);
            }
            if let (Some(a), Some(b)) = (phi(t, s + 1)?, phi(t, s + 2)?) {
                best = best.max(a * qi(2) - b);
            }
        }
        Some(best)
    };
    (0..=idx(h))
        .step_by(t_jump)
        .map(|t| (&eta * qi(t as i64), at(t)))
        .collect()
}

/// Sub-additive closure on the grid by dynamic programming:
/// `c(0) = 0`, `c(t) = min(f(t), min_{0<s<t} c(s) + f(t - s))`.
pub fn closure_table(f: &Curve, h: &Q, step: &Q) -> Vec<(Q, Value)> {
    let pts = grid(h, step);
    let fv: Vec<Value> = pts.iter().map(|t| f.eval(t)).collect();
    let mut c: Vec<Value> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        if i == 0 {
            c.push(Value::zero());
            continue;
        }
        let mut best = fv[i].clone();
        for j in 1..i {
            best = best.min(c[j].clone() + fv[i - j].clone());
        }
        c.push(best);
    }
    pts.into_iter().zip(c).collect()
}

/// `sup_t α(t) - β(t)` over the grid plus right-limits.
pub fn vdev_oracle(alpha: &Curve, beta: &Curve, h: &Q, step: &Q) -> Value {
    let eta = step / qi(4);
    let diff = |t: &Q| -> Option<Option<Q>> {
        match (alpha.eval(t), beta.eval(t)) {
            (_, Value::Infinite) => Some(None),
            (Value::Infinite, Value::Finite(_)) => None,
            (Value::Finite(a), Value::Finite(b)) => Some(Some(a - b)),
        }
    };
    let mut best: Option<Q> = None;
    let mut bump = |v: Q| best = Some(best.take().map_or(v.clone(), |b: Q| b.max(v)));
    for t in grid(h, step) {
        let Some(d) = diff(&t) else {
            return Value::Infinite;
        };
        if let Some(d) = d {
            bump(d);
        }
        let (t1, t2) = (&t + &eta, &t + &eta * qi(2));
        match (diff(&t1), diff(&t2)) {
            (Some(Some(a)), Some(Some(b))) => bump(a * qi(2) - b),
            (None, _) | (_, None) => return Value::Infinite,
            _ => {}
        }
    }
    Value::Finite(best.unwrap_or_default())
}

/// Sampled `sup_t inf{d ≥ 0 : α(t) ≤ β(t + d)}` with `t` and `d` on a grid of
/// width `fine`; within `fine` of the true value.
pub fn hdev_oracle(alpha: &Curve, beta: &Curve, h: &Q, fine: &Q, d_max: &Q) -> Value {
    let mut best = Q::zero();
    for t in grid(h, fine) {
        let a = alpha.eval(&t);
        let mut d = Q::zero();
        loop {
            if beta.eval(&(&t + &d)) >= a {
                break;
            }
            d += fine;
            if &d > d_max {
                return Value::Infinite;
            }
        }
        best = best.max(d);
    }
    Value::Finite(best)
}

// ---- generators ---------------------------------------------------------------

fn small_q(choices: &'static [(i64, i64)]) -> impl Strategy<Value = Q> {
    prop::sample::select(choices).prop_map(|(n, d)| q(n, d))
}

#[derive(Clone, Debug)]
pub enum TailKind {
    Infinite,
    Affine,
    Periodic,
}

/// Random curve with integer breakpoints, small rational values and slopes.
pub fn arb_curve_with(tails: Vec<TailKind>) -> impl Strategy<Value = Curve> {
    let seg = (
        1i64..=3,
        small_q(&[(0, 1), (1, 2), (1, 1), (2, 1)]),
        small_q(&[(0, 1), (1, 2), (1, 1), (3, 2)]),
    );
    (
        small_q(&[(0, 1), (0, 1), (1, 2), (1, 1)]),
        small_q(&[(0, 1), (1, 2), (1, 1)]),
        prop::collection::vec(seg, 1..=4),
        prop::sample::select(tails),
        any::<prop::sample::Index>(),
        small_q(&[(0, 1), (1, 2), (1, 1)]),
    )
        .prop_map(|(origin, jump0, raw, tail, pick, extra)| {
            build_curve(origin, jump0, raw, tail, pick, extra)
        })
}

pub fn arb_curve() -> impl Strategy<Value = Curve> {
    arb_curve_with(vec![
        TailKind::Infinite,
        TailKind::Affine,
        TailKind::Periodic,
    ])
}

pub fn arb_finite_curve() -> impl Strategy<Value = Curve> {
    arb_curve_with(vec![TailKind::Affine, TailKind::Periodic])
}

fn build_curve(
    origin: Q,
    jump0: Q,
    raw: Vec<(i64, Q, Q)>,
    tail: TailKind,
    pick: prop::sample::Index,
    extra: Q,
) -> Curve {
    let mut segments = Vec::new();
    let mut t = Q::zero();
    let mut level = &origin + &jump0;
    for (i, (len, jump, slope)) in raw.iter().enumerate() {
        if i > 0 {
            level += jump;
        }
        segments.push(Segment {
            start: t.clone(),
            value: level.clone(),
            slope: slope.clone(),
        });
        level += slope * qi(*len);
        t += qi(*len);
    }
    let end = t;
    let tail = match tail {
        TailKind::Infinite => Tail::Infinite { from: end },
        TailKind::Affine => Tail::Affine,
        TailKind::Periodic => {
            let j = pick.index(segments.len());
            let from = segments[j].start.clone();
            let increment = &level - &segments[j].value + extra;
            Tail::Periodic {
                period: &end - &from,
                from,
                increment,
            }
        }
    };
    Curve::from_parts(Value::Finite(origin), segments, tail).expect("generator builds valid curves")
}

/// Random finite min of `γ^p δ^T` atoms (the closure class of the road model).
pub fn arb_atoms() -> impl Strategy<Value = Curve> {
    prop::collection::vec((0i64..=4, 1i64..=6), 1..=3).prop_map(|atoms| {
        atoms.into_iter().fold(Curve::epsilon(), |acc, (p, t)| {
            acc.min(&Curve::atom(Value::Finite(qi(p)), qi(t)))
        })
    })
}

/// Horizon covering the transients of all curves plus three periods.
pub fn horizon(curves: &[&Curve]) -> Q {
    let mut h = Q::zero();
    for c in curves {
        let period = match c.tail() {
            Tail::Periodic { period, .. } => period.clone(),
            _ => Q::one(),
        };
        h += c.tail_start() * qi(2) + period * qi(3);
    }
    h.max(qi(8))
}

/// Asserts `lhs` and `rhs` agree on every grid point of `[0, h]`.
pub fn assert_grid_eq(lhs: &Curve, rhs: &Curve, h: &Q, step: &Q) -> Result<(), String> {
    for t in grid(h, step) {
        let (a, b) = (lhs.eval(&t), rhs.eval(&t));
        if a != b {
            return Err(format!(
                "differ at t = {t}: {a} vs {b}\n lhs = {lhs:?}\n rhs = {rhs:?}"
            ));
        }
    }
    Ok(())
}

pub fn finite(v: Value) -> Q {
    fin(v).expect("finite value")
}

/// `f − g` with the residual's conventions for infinite values.
fn gap(f: Value, g: Value) -> Value {
    match (f, g) {
        (_, Value::Infinite) => Value::zero(),
        (Value::Infinite, _) => Value::Infinite,
        (Value::Finite(a), Value::Finite(b)) => Value::Finite(a - b),
    }
}

/// `sup_{0 ≤ s ≤ t} [f(s) − g(s)]^+` on grid `s`, plus right limits taken by
/// linear extrapolation inside each cell (breakpoints sit on the grid).
pub fn residual_table(f: &Curve, g: &Curve, h: &Q, step: &Q) -> Vec<(Q, Value)> {
    let mut best = Value::zero();
    let mut out = Vec::new();
    let mut prev: Option<Q> = None;
    for t in grid(h, step) {
        if let Some(s) = prev {
            let a = gap(f.eval(&(&s + step / qi(2))), g.eval(&(&s + step / qi(2))));
            let b = gap(f.eval(&(&s + step)), g.eval(&(&s + step)));
            let limit = match (a, b) {
                (Value::Finite(a), Value::Finite(b)) => Value::Finite(qi(2) * a - b),
                (a, b) => a.max(b),
            };
            best = best.max(limit);
        }
        best = best.max(gap(f.eval(&t), g.eval(&t)));
        out.push((t.clone(), best.clone()));
        prev = Some(t);
    }
    out
}
