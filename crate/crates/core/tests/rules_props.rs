//! Calculus rules on random convex data: inclusion always, equality where
//! expected, and stability under direction refinement.

use lipgauge::calculus_rules::{
    cube_gauge, curated_fixtures, verify_chain_rule_2, verify_max_rule, verify_product_rule, verify_sum_rule, RULE_TOL,
};
use lipgauge::function::ScalarFunction;
use nalgebra::DVector;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(42),
        ..ProptestConfig::default()
    }
}

/// `a (x1 - p)^2 + b |x2 - q| + c x1`, written as an expression.
fn convex_expr(a: f64, b: f64, c: f64, p: f64, q: f64) -> ScalarFunction {
    let src = format!("{a} * (x1 - ({p}))^2 + {b} * abs(x2 - ({q})) + ({c}) * x1");
    ScalarFunction::from_expr(&src, 2).unwrap().with_convex(true)
}

fn coeffs() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.0f64..2.0, 0.0f64..2.0, -1.0f64..1.0, -0.5f64..0.5, -0.5f64..0.5)
}

fn point() -> impl Strategy<Value = DVector<f64>> {
    prop_oneof![
        Just(DVector::zeros(2)),
        (-0.8f64..0.8, -0.8f64..0.8).prop_map(|(a, b)| DVector::from_vec(vec![a, b])),
    ]
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn sum_rule_is_an_equality_for_convex_terms(u in coeffs(), v in coeffs(), x in point()) {
        let g = cube_gauge(2);
        let (p, q) = (convex_expr(u.0, u.1, u.2, u.3, u.4), convex_expr(v.0, v.1, v.2, v.3, v.4));
        let r = verify_sum_rule(&p, &q, &g, &g, &x, 12).unwrap();
        prop_assert!(r.inclusion_holds(), "violation {}", r.max_violation);
        prop_assert_eq!(r.equality_expected, Some(true));
        prop_assert!(r.equality_holds(), "gap {}", r.reverse_gap);
    }

    #[test]
    fn product_rule_inclusion(u in coeffs(), v in coeffs(), x in point()) {
        let g = cube_gauge(2);
        let (p, q) = (convex_expr(u.0, u.1, u.2, u.3, u.4), convex_expr(v.0, v.1, v.2, v.3, v.4));
        let r = verify_product_rule(&p, &q, &g, &g, &x, 12).unwrap();
        prop_assert!(r.inclusion_holds(), "violation {}", r.max_violation);
    }

    #[test]
    fn max_rule_inclusion(u in coeffs(), v in coeffs(), x in point()) {
        let g = cube_gauge(2);
        let fs = [convex_expr(u.0, u.1, u.2, u.3, u.4), convex_expr(v.0, v.1, v.2, v.3, v.4)];
        let r = verify_max_rule(&fs, &g, &x, 12).unwrap();
        prop_assert!(r.inclusion_holds(), "violation {}", r.max_violation);
    }

    #[test]
    fn coordinate_sum_chain_equals_sum_rule(u in coeffs(), v in coeffs(), x in point()) {
        let g = cube_gauge(2);
        let (p, q) = (convex_expr(u.0, u.1, u.2, u.3, u.4), convex_expr(v.0, v.1, v.2, v.3, v.4));
        let s = verify_sum_rule(&p, &q, &g, &g, &x, 8).unwrap();
        let outer = ScalarFunction::from_expr("x1 + x2", 2).unwrap();
        let c = verify_chain_rule_2(&[p, q], &outer, &g, &x, 8).unwrap();
        for (a, b) in s.rhs_support.iter().zip(&c.rhs_support) {
            prop_assert!((a - b).abs() < RULE_TOL, "{} vs {}", a, b);
        }
    }

    #[test]
    fn refinement_never_flips_inclusion(u in coeffs(), v in coeffs(), x in point()) {
        let g = cube_gauge(2);
        let (p, q) = (convex_expr(u.0, u.1, u.2, u.3, u.4), convex_expr(v.0, v.1, v.2, v.3, v.4));
        let coarse = verify_product_rule(&p, &q, &g, &g, &x, 4).unwrap();
        let fine = verify_product_rule(&p, &q, &g, &g, &x, 16).unwrap();
        // the coarse directions are a prefix of the fine ones
        prop_assert_eq!(&coarse.directions[..], &fine.directions[..coarse.directions.len()]);
        if fine.inclusion_holds() {
            prop_assert!(coarse.inclusion_holds());
        }
        prop_assert!(coarse.max_violation <= fine.max_violation + 1e-12);
    }
}

#[test]
fn curated_fixtures_match_expectations() {
    for case in curated_fixtures() {
        let r = case.run().unwrap();
        assert!(r.inclusion_holds(), "{}", case.name);
        assert_eq!(r.equality_holds(), case.expect_equality, "{}", case.name);
    }
}
