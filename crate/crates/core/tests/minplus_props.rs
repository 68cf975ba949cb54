mod common;

use common::props::*;
use common::*;
use proptest::prelude::*;
use roadcalc::{q, qi, Q};

fn check(r: Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_agrees_with_grid_minimum(f in arb_curve(), g in arb_curve()) {
        check(conv_matches_oracle(&f, &g))?;
    }

    #[test]
    fn min_agrees_pointwise(f in arb_curve(), g in arb_curve()) {
        check(min_matches_pointwise(&f, &g))?;
    }

    #[test]
    fn deconv_agrees_with_grid_supremum(f in arb_curve(), g in arb_curve()) {
        check(deconv_matches_oracle(&f, &g))?;
    }

    #[test]
    fn atom_closure_agrees_with_dynamic_programme(f in arb_atoms()) {
        check(closure_matches_oracle(&f))?;
    }

    #[test]
    fn residual_agrees_with_running_supremum(f in arb_curve(), g in arb_curve()) {
        check(residual_matches_oracle(&f, &g))?;
    }

    #[test]
    fn vdev_agrees_with_grid(a in arb_curve(), b in arb_curve()) {
        check(vdev_matches_oracle(&a, &b))?;
    }

    #[test]
    fn hdev_agrees_with_fine_grid(a in arb_curve(), b in arb_curve()) {
        check(hdev_matches_oracle(&a, &b))?;
    }

    #[test]
    fn positive_shift_is_pointwise(f in arb_curve(), a in 0i64..=6) {
        check(positive_shift_pointwise(&f, &q(a, 2)))?;
    }

    #[test]
    fn dioid_laws_hold(f in arb_curve(), g in arb_curve(), h in arb_curve()) {
        check(dioid_laws(&f, &g, &h))?;
    }

    #[test]
    fn closure_properties(f in arb_atoms(), g in arb_atoms(), a in 0i64..=4) {
        check(closure_sandwich(&f))?;
        check(closure_absorbs_at_zero_origin(&f))?;
        check(closure_of_min_factors(&f, &g))?;
        check(shift_under_conv_inequality(&f, &g, &qi(a)))?;
        check(closure_is_a_fixpoint(&f))?;
    }

    #[test]
    fn staircase_stays_above_its_mean_line(p in 0i64..=5, t in 1i64..=7) {
        check(staircase_lower_bound(&qi(p), &Q::from_integer(t.into())))?;
    }

    #[test]
    fn serialization_round_trips(f in arb_curve()) {
        let s = serde_json::to_string(&f).unwrap();
        let back: roadcalc::Curve = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn p4_identity_fails_on_a_small_staircase() {
    // f = 0 on [0, 1], 1 on (1, 2]; g = δ^1; a = 1: at t = 9/4 the left side
    // is 0 and the right side 1
    let f = roadcalc::Curve::delta(qi(1)).min(&roadcalc::Curve::atom(
        roadcalc::Value::Finite(qi(1)),
        qi(2),
    ));
    let g = roadcalc::Curve::delta(qi(1));
    let a = qi(1);
    let t = q(9, 4);
    assert_eq!(
        f.conv(&g).positive_shift(&a).eval(&t),
        roadcalc::Value::zero()
    );
    assert_eq!(
        f.conv(&g.positive_shift(&a)).eval(&t),
        roadcalc::Value::Finite(qi(1))
    );
    assert!(shift_commutes_with_conv(&f, &g, &a).is_err());
    assert!(shift_under_conv_inequality(&f, &g, &a).is_ok());
}
