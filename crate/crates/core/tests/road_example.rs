use std::time::Instant;

use roadcalc::road_model::*;
use roadcalc::{q, qi, Curve, Value, Q};

fn road() -> RingRoad {
    RingRoad::new(6, qi(1), qi(1), q(1, 2), qi(1)).unwrap()
}

fn atom(p: i64, t: i64) -> Curve {
    Curve::atom(Value::Finite(qi(p)), qi(t))
}

fn star(p: i64, t: i64) -> Curve {
    atom(p, t).closure().unwrap()
}

#[test]
fn example_one_three_cases() {
    let start = Instant::now();
    let r = road();

    let c = service_couple_density(&r, &q(1, 6)).unwrap();
    let beta = star(1, 6).positive_shift(&qi(1));
    assert_eq!(c.beta, beta);
    assert_eq!(c.lambda, beta);

    let c = service_couple_density(&r, &q(1, 3)).unwrap();
    let beta = star(1, 3).positive_shift(&qi(2));
    assert_eq!(c.beta, beta);
    assert_eq!(c.lambda, beta.min(&atom(0, 8)).min(&atom(1, 10)));

    let c = service_couple_density(&r, &q(1, 2)).unwrap();
    let beta = star(1, 3).conv(&star(3, 12)).positive_shift(&qi(3));
    assert_eq!(c.beta, beta);
    assert_eq!(c.lambda, beta);

    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn atom_a_for_example_one() {
    let r = road();
    assert_eq!(
        atom_a(&r, &q(1, 6)).unwrap(),
        atom(1, 6).min(&atom(1, 3)).min(&atom(5, 12))
    );
    assert_eq!(atom_a(&r, &q(1, 6)).unwrap().closure().unwrap(), star(1, 6));
    assert_eq!(
        atom_a(&r, &q(1, 2)).unwrap().closure().unwrap(),
        star(1, 3).conv(&star(3, 12))
    );
}

#[test]
fn final_simplification_of_the_proof() {
    // [γ^{-N} a a*]^+ = [γ^{-N} a*]^+ when a(0) < N
    let r = road();
    for rho in [q(1, 6), q(1, 3), q(1, 2)] {
        let a = atom_a(&r, &rho).unwrap();
        let n = r.vehicles(&rho);
        let astar = a.closure().unwrap();
        assert_eq!(a.conv(&astar).positive_shift(&n), astar.positive_shift(&n));
    }
}

#[test]
fn density_beta_grows_at_the_diagram_flow() {
    let r = road();
    for k in 1..12 {
        let rho = q(k, 12);
        let c = service_couple_density(&r, &rho).unwrap();
        assert!(c.beta.is_in_f() && c.lambda.is_in_f());
        assert_eq!(
            c.beta.long_run_rate().unwrap(),
            fundamental_flow(&r, &rho).unwrap(),
            "rho = {rho}"
        );
    }
}

fn grid_le(lo: &Curve, hi: &Curve, h: i64) -> Result<(), Q> {
    let mut t = Q::from_integer(0.into());
    while t <= qi(h) {
        if lo.eval(&t) > hi.eval(&t) {
            return Err(t);
        }
        t += q(1, 4);
    }
    Ok(())
}

#[test]
fn relaxed_couple_lower_bounds_density_couple() {
    let r = road();
    for k in 1..12 {
        let rho = q(k, 12);
        let thm = service_couple_density(&r, &rho).unwrap();
        let rel = service_couple_relaxed(&r, &rho).unwrap();
        assert_eq!(
            grid_le(&rel.beta, &thm.beta, 120),
            Ok(()),
            "beta, rho = {rho}"
        );
        assert_eq!(
            grid_le(&rel.lambda, &thm.lambda, 120),
            Ok(()),
            "lambda, rho = {rho}"
        );
        let cap = Curve::rate_latency(&r.v * &r.rho_j, qi(6));
        assert_eq!(grid_le(&rel.beta, &cap, 120), Ok(()));
    }
}

#[test]
fn exact_couple_dominates_density_couple() {
    let r = road();
    let uniform = vec![q(1, 3); 6];
    let exact = service_couple_exact(&r, &uniform).unwrap();
    let thm = service_couple_density(&r, &q(1, 3)).unwrap();
    assert_eq!(grid_le(&thm.beta, &exact.beta, 120), Ok(()));
    assert_eq!(grid_le(&thm.lambda, &exact.lambda, 120), Ok(()));

    let single = vec![qi(1), qi(0), qi(0), qi(0), qi(0), qi(0)];
    let exact = service_couple_exact(&r, &single).unwrap();
    let thm = service_couple_density(&r, &q(1, 6)).unwrap();
    assert_eq!(grid_le(&thm.beta, &exact.beta, 120), Ok(()));
    assert_eq!(grid_le(&thm.lambda, &exact.lambda, 120), Ok(()));

    let empty = service_couple_exact(&r, &[qi(0), qi(0), qi(0), qi(0), qi(0), qi(0)]).unwrap();
    assert!(empty.lambda.eval(&q(1, 2)).is_finite());
}
