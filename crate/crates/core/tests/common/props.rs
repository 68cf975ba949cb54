//! Property checks returning a diagnostic on failure, so both the proptest
//! suites and the acceptance runner can drive them.

use num::Zero;
use roadcalc::{qi, Curve, Value, Q};

use super::*;

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn in_f(c: &Curve) -> Check {
    ensure(c.is_in_f(), || format!("not in F: {c:?}"))
}

pub fn conv_matches_oracle(f: &Curve, g: &Curve) -> Check {
    let c = f.conv(g);
    in_f(&c)?;
    let h = horizon(&[f, g]);
    for (t, want) in conv_table(f, g, &h, &step()) {
        let got = c.eval(&t);
        ensure(got == want, || {
            format!("conv at {t}: {got} vs oracle {want}\n f={f:?}\n g={g:?}\n c={c:?}")
        })?;
    }
    Ok(())
}

pub fn min_matches_pointwise(f: &Curve, g: &Curve) -> Check {
    let m = f.min(g);
    in_f(&m)?;
    let h = horizon(&[f, g]);
    for t in grid(&h, &(step() / qi(2))) {
        let want = f.eval(&t).min(g.eval(&t));
        ensure(m.eval(&t) == want, || {
            format!("min at {t}\n f={f:?}\n g={g:?}\n m={m:?}")
        })?;
    }
    Ok(())
}

/// Only pairs where the deconvolution is bounded are compared.
pub fn deconv_matches_oracle(f: &Curve, g: &Curve) -> Check {
    let Ok(d) = f.deconv(g) else {
        let (rf, rg) = (f.long_run_rate(), g.long_run_rate());
        // an error is only acceptable when the supremum really diverges
        let diverges = match (&rf, &rg) {
            (Some(a), Some(b)) => a > b,
            (None, _) => true,
            (Some(_), None) => false,
        };
        return ensure(diverges, || {
            format!("deconv refused a bounded pair\n f={f:?}\n g={g:?}")
        });
    };
    in_f(&d)?;
    let h = horizon(&[f]);
    let s_max = horizon(&[f, g]) * qi(3) + qi(40);
    for (t, want) in deconv_table(f, g, &h, &(step() * qi(2)), &step(), &s_max) {
        let Some(want) = want else {
            return ensure(d.eval(&t).is_infinite(), || {
                format!("deconv at {t} should be +inf")
            });
        };
        let got = d.eval(&t);
        ensure(got == Value::Finite(want.clone()), || {
            format!("deconv at {t}: {got} vs oracle {want}\n f={f:?}\n g={g:?}\n d={d:?}")
        })?;
    }
    Ok(())
}

pub fn closure_matches_oracle(f: &Curve) -> Check {
    let Ok(c) = f.closure() else {
        return Err(format!("closure unsupported for {f:?}"));
    };
    in_f(&c)?;
    let h = horizon(&[f]).min(qi(16));
    for (t, want) in closure_table(f, &h, &step()) {
        let got = c.eval(&t);
        ensure(got == want, || {
            format!("closure at {t}: {got} vs oracle {want}\n f={f:?}\n c={c:?}")
        })?;
    }
    Ok(())
}

pub fn vdev_matches_oracle(a: &Curve, b: &Curve) -> Check {
    let got = a.vdev(b);
    let finite_rates = match (a.long_run_rate(), b.long_run_rate()) {
        (Some(x), Some(y)) => x <= y,
        _ => true,
    };
    let h = horizon(&[a, b]) * qi(3);
    let want = vdev_oracle(a, b, &h, &step());
    if !finite_rates {
        return ensure(got.is_infinite(), || format!("vdev should diverge: {got}"));
    }
    ensure(got == want, || {
        format!("vdev {got} vs oracle {want}\n a={a:?}\n b={b:?}")
    })
}

pub fn hdev_matches_oracle(a: &Curve, b: &Curve) -> Check {
    let got = a.hdev(b);
    if let (Some(ra), Some(rb)) = (a.long_run_rate(), b.long_run_rate()) {
        if ra > rb {
            return ensure(got.is_infinite(), || format!("hdev should diverge: {got}"));
        }
    }
    let fine = step() / qi(4);
    let h = horizon(&[a, b]) * qi(2);
    let want = hdev_oracle(a, b, &h, &fine, &(qi(30) + &h));
    match (&got, &want) {
        (Value::Finite(g), Value::Finite(w)) => {
            ensure(w <= &(g + &fine) && g <= &(w + &fine), || {
                format!("hdev {g} vs oracle {w}\n a={a:?}\n b={b:?}")
            })
        }
        (Value::Infinite, Value::Infinite) => Ok(()),
        _ => Err(format!("hdev {got} vs oracle {want}\n a={a:?}\n b={b:?}")),
    }
}

pub fn positive_shift_pointwise(f: &Curve, a: &Q) -> Check {
    let s = f.positive_shift(a);
    in_f(&s)?;
    for t in grid(&horizon(&[f]), &step()) {
        let want = (&f.eval(&t) - a).positive_part();
        ensure(s.eval(&t) == want, || {
            format!("shift at {t}\n f={f:?}\n s={s:?}")
        })?;
    }
    Ok(())
}

pub fn dioid_laws(f: &Curve, g: &Curve, h: &Curve) -> Check {
    let e = Curve::unit();
    let eps = Curve::epsilon();
    ensure(f.min(g) == g.min(f), || "⊕ not commutative".into())?;
    ensure(f.min(&g.min(h)) == f.min(g).min(h), || {
        "⊕ not associative".into()
    })?;
    ensure(f.min(f) == *f, || "⊕ not idempotent".into())?;
    ensure(f.conv(g) == g.conv(f), || {
        format!("* not commutative\n f={f:?}\n g={g:?}")
    })?;
    let l = f.conv(&g.conv(h));
    let r = f.conv(g).conv(h);
    ensure(l == r, || {
        format!("* not associative\n f={f:?}\n g={g:?}\n h={h:?}\n l={l:?}\n r={r:?}")
    })?;
    let l = f.conv(&g.min(h));
    let r = f.conv(g).min(&f.conv(h));
    ensure(l == r, || {
        format!("* does not distribute\n l={l:?}\n r={r:?}")
    })?;
    ensure(f.conv(&e) == *f, || "e is not the unit".into())?;
    ensure(f.conv(&eps) == eps, || "ε does not absorb".into())?;
    ensure(f.min(&eps) == *f, || "ε is not neutral for ⊕".into())
}

/// `f* ≤ f * f* ≤ f`, checked wherever the middle term is defined.
pub fn closure_sandwich(f: &Curve) -> Check {
    let c = f.closure().map_err(|e| e.to_string())?;
    let fc = f.conv(&c);
    for t in grid(&horizon(&[f]), &step()) {
        let (a, b, x) = (c.eval(&t), fc.eval(&t), f.eval(&t));
        ensure(a <= b && b <= x, || {
            format!("closure sandwich fails at {t}: {a} {b} {x}\n f={f:?}")
        })?;
    }
    Ok(())
}

/// `f(0) = 0 ⇒ f * f* = f*`.
pub fn closure_absorbs_at_zero_origin(f: &Curve) -> Check {
    if f.origin() != &Value::zero() {
        return Ok(());
    }
    let c = f.closure().map_err(|e| e.to_string())?;
    assert_grid_eq(&f.conv(&c), &c, &horizon(&[f]), &step())
}

/// `(f ⊕ g)* = f* * g*`.
pub fn closure_of_min_factors(f: &Curve, g: &Curve) -> Check {
    let l = f.min(g).closure().map_err(|e| e.to_string())?;
    let r = f
        .closure()
        .map_err(|e| e.to_string())?
        .conv(&g.closure().map_err(|e| e.to_string())?);
    ensure(l == r, || {
        format!("closure of a min\n f={f:?}\n g={g:?}\n l={l:?}\n r={r:?}")
    })
}

/// Positive shift commuting with convolution: `[(f * g) γ^{-a}]^+ = f * [g γ^{-a}]^+` for `f, g ≥ 0`.
pub fn shift_commutes_with_conv(f: &Curve, g: &Curve, a: &Q) -> Check {
    let l = f.conv(g).positive_shift(a);
    let r = f.conv(&g.positive_shift(a));
    assert_grid_eq(&l, &r, &horizon(&[f, g]), &step())
}

/// The half of that identity which holds for every `f, g ≥ 0`:
/// `[(f * g) γ^{-a}]^+ ≤ f * [g γ^{-a}]^+`.
pub fn shift_under_conv_inequality(f: &Curve, g: &Curve, a: &Q) -> Check {
    let l = f.conv(g).positive_shift(a);
    let r = f.conv(&g.positive_shift(a));
    for t in grid(&horizon(&[f, g]), &step()) {
        ensure(l.eval(&t) <= r.eval(&t), || {
            format!("shift inequality fails at {t}\n f={f:?}\n g={g:?}")
        })?;
    }
    Ok(())
}

/// `e ⊕ f * f* = f*`.
pub fn closure_is_a_fixpoint(f: &Curve) -> Check {
    let c = f.closure().map_err(|e| e.to_string())?;
    let l = Curve::unit().min(&f.conv(&c));
    ensure(l == c, || {
        format!("closure fixpoint\n f={f:?}\n c={c:?}\n l={l:?}")
    })
}

/// `(γ^p δ^T)*(t) ≥ p t / T` at every breakpoint (and both one-sided limits).
pub fn staircase_lower_bound(p: &Q, t_len: &Q) -> Check {
    let c = Curve::atom(Value::Finite(p.clone()), t_len.clone())
        .closure()
        .map_err(|e| e.to_string())?;
    let mut k = Q::zero();
    let h = t_len * qi(12);
    while k <= h {
        for t in [k.clone(), &k + t_len / qi(1000)] {
            let line = p * &t / t_len;
            ensure(c.eval(&t) >= Value::Finite(line.clone()), || {
                format!("below p t/T at {t}")
            })?;
        }
        k += t_len;
    }
    Ok(())
}

pub fn residual_matches_oracle(f: &Curve, g: &Curve) -> Check {
    let r = f.residual(g);
    in_f(&r)?;
    let h = horizon(&[f, g]) * qi(2);
    for (t, want) in residual_table(f, g, &h, &step()) {
        let got = r.eval(&t);
        ensure(got == want, || {
            format!("residual at {t}: {got} vs oracle {want}\n f={f:?}\n g={g:?}\n r={r:?}")
        })?;
    }
    Ok(())
}

/// `β₁*(β₂*U ⊕ λ₂) ⊕ λ₁` against the composed couple applied to `U`, with
/// both sides taken from the grid oracle.
pub fn series_matches_end_to_end(
    down: &roadcalc::ServiceCouple,
    up: &roadcalc::ServiceCouple,
    u: &Curve,
) -> Check {
    let c = roadcalc::composition::series(down, up);
    in_f(&c.beta)?;
    in_f(&c.lambda)?;
    let h = horizon(&[&down.beta, &down.lambda, &up.beta, &up.lambda, u]);
    let ts = grid(&h, &step());
    let sample = |c: &Curve| -> Vec<Value> { ts.iter().map(|t| c.eval(t)).collect() };
    let (db, dl, ub, ul, us, cb, cl) = (
        sample(&down.beta),
        sample(&down.lambda),
        sample(&up.beta),
        sample(&up.lambda),
        sample(u),
        sample(&c.beta),
        sample(&c.lambda),
    );
    // every t − s is a grid point, so the convolutions become index sums
    let conv = |f: &[Value], g: &[Value], k: usize| -> Value {
        (0..=k)
            .map(|j| f[j].clone() + g[k - j].clone())
            .min()
            .unwrap_or(Value::Infinite)
    };
    let inner: Vec<Value> = (0..ts.len())
        .map(|k| conv(&ub, &us, k).min(ul[k].clone()))
        .collect();
    for (k, t) in ts.iter().enumerate() {
        let lhs = conv(&db, &inner, k).min(dl[k].clone());
        let rhs = conv(&cb, &us, k).min(cl[k].clone());
        ensure(lhs == rhs, || {
            format!("series at {t}: {lhs} vs {rhs}\n down={down:?}\n up={up:?}\n u={u:?}")
        })?;
    }
    Ok(())
}
