//! Gauge invariants on random symmetric polytopes, checked against the
//! closed form `mu(x) = max_i |a_i · x| / b_i`.

use lipgauge::convex_geometry::{check_symmetry, in_icr, ConvexSet, Gauge, Halfspace, Subspace, Vector};
use nalgebra::DVector;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
struct SymPoly {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    center: Vector,
}

impl SymPoly {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn rows(&self) -> Vec<Halfspace> {
        let mut rows = Vec::new();
        for (a, b) in self.normals.iter().zip(&self.offsets) {
            let ap = a.dot(&self.center);
            rows.push(Halfspace { normal: a.clone(), offset: b + ap });
            rows.push(Halfspace { normal: -a, offset: b - ap });
        }
        rows
    }

    fn set(&self) -> ConvexSet {
        ConvexSet::halfspaces(self.dim(), self.rows()).unwrap().with_center(self.center.clone()).unwrap()
    }

    fn closed_form(&self, x: &Vector) -> f64 {
        self.normals.iter().zip(&self.offsets).map(|(a, b)| a.dot(x).abs() / b).fold(0.0, f64::max)
    }

    fn min_slack(&self, y: &Vector) -> f64 {
        self.rows().iter().map(|h| h.offset - h.normal.dot(y)).fold(f64::INFINITY, f64::min)
    }
}

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-r..r, n).prop_map(DVector::from_vec)
}

/// Coordinate slabs (to keep it bounded) plus a few random slabs.
fn sym_poly() -> impl Strategy<Value = SymPoly> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(vec_in(n, 1.0), 0..4),
            prop::collection::vec(0.5f64..2.0, n + 4),
            vec_in(n, 3.0),
        )
            .prop_map(move |(extra, offs, center)| {
                let mut normals: Vec<Vector> = (0..n).map(|i| Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
                normals.extend(extra.into_iter().filter(|a| a.norm() > 0.1));
                let offsets = offs[..normals.len()].to_vec();
                SymPoly { normals, offsets, center }
            })
    })
}

fn with_points(k: usize) -> impl Strategy<Value = (SymPoly, Vec<Vector>)> {
    sym_poly().prop_flat_map(move |p| {
        let n = p.dim();
        (Just(p), prop::collection::vec(vec_in(n, 4.0), k))
    })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn matches_closed_form_and_is_even((p, xs) in with_points(6)) {
        let g = Gauge::new(p.set()).unwrap();
        prop_assert_eq!(g.kernel().dim(), 0);
        for x in &xs {
            let want = p.closed_form(x);
            let got = g.eval(x).unwrap();
            prop_assert!((got - want).abs() <= TOL * (1.0 + want), "{} vs {}", got, want);
            prop_assert!((g.eval(&-x).unwrap() - got).abs() <= TOL * (1.0 + got));
        }
    }

    #[test]
    fn bisection_on_an_oracle_copy_matches((p, xs) in with_points(6)) {
        let n = p.dim();
        let rows = p.rows();
        let oracle = ConvexSet::oracle(n, 1e3, "polytope", move |y: &Vector| {
            rows.iter().all(|h| h.normal.dot(y) <= h.offset)
        })
        .unwrap()
        .with_span_hint(Subspace::full(n))
        .with_center(p.center.clone())
        .unwrap();
        let g = Gauge::new(oracle).unwrap();
        for x in &xs {
            let want = p.closed_form(x);
            let got = g.eval(x).unwrap();
            prop_assert!((got - want).abs() <= 1e-8 * (1.0 + want), "{} vs {}", got, want);
        }
    }

    #[test]
    fn homogeneous_and_subadditive((p, xs) in with_points(4), alpha in 0.01f64..10.0) {
        let g = Gauge::new(p.set()).unwrap();
        for x in &xs {
            let gx = g.eval(x).unwrap();
            let gax = g.eval(&(x * alpha)).unwrap();
            prop_assert!((gax - alpha * gx).abs() <= TOL * (1.0 + alpha * gx));
        }
        for w in xs.windows(2) {
            let lhs = g.eval(&(&w[0] + &w[1])).unwrap();
            prop_assert!(lhs <= g.eval(&w[0]).unwrap() + g.eval(&w[1]).unwrap() + TOL);
        }
    }

    #[test]
    fn unit_sublevel_is_the_set((p, xs) in with_points(8)) {
        let s = p.set();
        let g = Gauge::new(s.clone()).unwrap();
        prop_assert!(check_symmetry(&s, &p.center, 32).unwrap());
        for x in &xs {
            let m = g.eval(x).unwrap();
            let inside = s.contains(&(&p.center + x));
            if m < 1.0 - TOL {
                prop_assert!(inside);
            }
            if inside {
                prop_assert!(m <= 1.0 + TOL);
            }
        }
    }

    #[test]
    fn sampled_icr_agrees_with_facet_slack((p, xs) in with_points(6)) {
        let s = p.set();
        let n = p.dim();
        let rows = p.rows();
        let oracle = ConvexSet::oracle(n, 1e3, "polytope", move |y: &Vector| {
            rows.iter().all(|h| h.normal.dot(y) <= h.offset + 1e-12)
        })
        .unwrap()
        .with_span_hint(Subspace::full(n));
        for x in &xs {
            // pull the point into the set
            let y = &p.center + x * (0.999 / p.closed_form(x).max(1.0));
            let slack = p.min_slack(&y);
            prop_assume!(slack.abs() > 1e-6);
            prop_assert!(s.contains(&y));
            prop_assert_eq!(in_icr(&oracle, &y, 16).unwrap(), slack > 0.0);
            prop_assert_eq!(in_icr(&s, &y, 16).unwrap(), slack > 0.0);
        }
    }
}

#[test]
fn strip_has_a_kernel() {
    let rows = vec![
        Halfspace { normal: DVector::from_vec(vec![1.0, 0.0]), offset: 2.0 },
        Halfspace { normal: DVector::from_vec(vec![-1.0, 0.0]), offset: 2.0 },
    ];
    let s = ConvexSet::halfspaces(2, rows).unwrap().with_center(DVector::zeros(2)).unwrap();
    let g = Gauge::new(s).unwrap();
    assert_eq!(g.kernel().dim(), 1);
    assert!(g.kernel().contains(&DVector::from_vec(vec![0.0, 1.0]), 1e-9));
    assert!((g.eval(&DVector::from_vec(vec![1.0, 5.0])).unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(g.eval(&DVector::from_vec(vec![0.0, -3.0])).unwrap(), 0.0);
}

#[test]
fn flat_set_is_infinite_off_span() {
    let s = ConvexSet::vertices(vec![DVector::from_vec(vec![-1.0, 0.0]), DVector::from_vec(vec![1.0, 0.0])])
        .unwrap()
        .with_center(DVector::zeros(2))
        .unwrap();
    let g = Gauge::new(s).unwrap();
    assert_eq!(g.span().dim(), 1);
    assert!((g.eval(&DVector::from_vec(vec![0.4, 0.0])).unwrap() - 0.4).abs() < 1e-9);
    assert_eq!(g.eval(&DVector::from_vec(vec![0.0, 0.1])).unwrap(), f64::INFINITY);
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(42),
        ..ProptestConfig::default()
    }
}
