//! The discretised L2 examples: quadrature convergence, the gradient
//! pairing, convexity of `e^phi`, and the certificates near `f(t) = t`.

use lipgauge::convex_geometry::{span_of_difference, Gauge, Vector};
use lipgauge::l2_examples::{
    exp_phi_function, fixtures, l2_certificate, l2_sublevel_core, mu_l2, phi_function, phi_l2, subdiff_l2,
    GridFunction, WeightedGrid,
};
use lipgauge::lipschitz::local_witness;
use lipgauge::sampling;
use nalgebra::DVector;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(42),
        ..ProptestConfig::default()
    }
}

/// `t (1 + a + b sin(k pi t))`, feasible whenever `|a| + |b| < 1`.
fn perturbed(grid: &std::sync::Arc<WeightedGrid>, a: f64, b: f64, k: f64) -> Vector {
    grid.sample(|t| t * (1.0 + a + b * (k * std::f64::consts::PI * t).sin()))
}

#[test]
fn quadrature_converges() {
    let (g1, g2) = (WeightedGrid::midpoint(1000).unwrap(), WeightedGrid::midpoint(2000).unwrap());
    for (name, x) in fixtures() {
        let (a, b) = (
            GridFunction::from_fn(g1.clone(), x).unwrap(),
            GridFunction::from_fn(g2.clone(), x).unwrap(),
        );
        let (p1, p2) = (phi_l2(&a), phi_l2(&b));
        let (m1, m2) = (mu_l2(&a), mu_l2(&b));
        assert!((p1 - p2).abs() <= 1e-3 * p2.abs().max(1.0), "{name}: phi {p1} vs {p2}");
        assert!((m1 - m2).abs() <= 1e-3 * m2.max(1.0), "{name}: mu {m1} vs {m2}");
    }
}

#[test]
fn gradient_pairing_matches_difference_quotients() {
    let grid = WeightedGrid::midpoint(1000).unwrap();
    let phi = phi_function(&grid);
    let mut rng = sampling::rng(42);
    for (name, x) in fixtures() {
        let gx = GridFunction::from_fn(grid.clone(), x).unwrap();
        let sub = subdiff_l2(&gx).unwrap();
        let xv = gx.values().clone();
        for _ in 0..64 {
            // directions with v(t) = O(t) keep the quotient well scaled
            let z = sampling::gaussian_vector(&mut rng, grid.n());
            let v = DVector::from_iterator(grid.n(), z.iter().zip(grid.nodes()).map(|(z, t)| z * t));
            let v = &v / grid.l2_norm(&v);
            let h = 1e-5;
            let fd = (phi.value(&(&xv + &v * h)).unwrap() - phi.value(&(&xv - &v * h)).unwrap()) / (2.0 * h);
            let pair = sub.representative.dot(&v);
            assert!((fd - pair).abs() <= 1e-5 * (1.0 + pair.abs()), "{name}: {fd} vs {pair}");
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn exp_phi_is_midpoint_convex(
        a in -0.45f64..0.45, b in -0.45f64..0.45, k in 1.0f64..6.0,
        c in -0.45f64..0.45, d in -0.45f64..0.45, l in 1.0f64..6.0,
    ) {
        let grid = WeightedGrid::midpoint(400).unwrap();
        let e = exp_phi_function(&grid);
        let (x, y) = (perturbed(&grid, a, b, k), perturbed(&grid, c, d, l));
        let mid = e.value(&((&x + &y) * 0.5)).unwrap();
        let avg = 0.5 * (e.value(&x).unwrap() + e.value(&y).unwrap());
        prop_assert!(mid <= avg * (1.0 + 1e-12), "{} > {}", mid, avg);
    }

    #[test]
    fn subgradient_inequality(a in -0.45f64..0.45, b in -0.45f64..0.45, c in -0.45f64..0.45, d in -0.45f64..0.45) {
        let grid = WeightedGrid::midpoint(400).unwrap();
        let phi = phi_function(&grid);
        let x = perturbed(&grid, a, b, 3.0);
        let y = perturbed(&grid, c, d, 5.0);
        let sub = subdiff_l2(&GridFunction::new(grid.clone(), x.clone()).unwrap()).unwrap();
        let lhs = phi.value(&y).unwrap();
        let rhs = phi.value(&x).unwrap() + sub.representative.dot(&(&y - &x));
        prop_assert!(lhs >= rhs - 1e-12 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn certificate_holds(seed in 0u64..10_000) {
        let grid = WeightedGrid::midpoint(200).unwrap();
        for eps in [0.25, 0.5, 0.9] {
            let cert = l2_certificate(&grid, eps, 500, seed).unwrap();
            prop_assert!(cert.m >= 1.0 - 1e-12);
            prop_assert!(cert.holds(), "eps {}: {} > {}", eps, cert.empirical_l, cert.theoretical_l);
        }
    }
}

#[test]
fn local_witness_at_identity() {
    let grid = WeightedGrid::midpoint(6).unwrap();
    let phi = phi_function(&grid);
    let core = l2_sublevel_core(&grid, 1.0).unwrap();
    let f = grid.sample(|t| t);
    let w = local_witness(&phi, &core, &f, 0.5).unwrap();
    assert!(w.lambda > 0.0 && w.l.is_finite());
    let ball = w.ball(&core).unwrap();
    let g = Gauge::new(core.c_a.clone()).unwrap();
    let space = span_of_difference(&ball, &f).unwrap();
    let mut rng = sampling::rng(9);
    let pts = ball.sample_members(&f, &space, 64, &mut rng);
    for y in &pts {
        assert!(y.iter().all(|&v| v >= -1.0));
    }
    for pair in pts.chunks(2) {
        let gap = (phi.value(&pair[0]).unwrap() - phi.value(&pair[1]).unwrap()).abs();
        let d = g.eval(&(&pair[0] - &pair[1])).unwrap();
        assert!(gap <= w.l * d * (1.0 + 1e-6) + 1e-12, "{gap} > {}", w.l * d);
    }
}
