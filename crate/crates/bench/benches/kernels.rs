use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lipgauge::calculus_rules::cube_gauge;
use lipgauge::convex_geometry::{vector, Vector};
use lipgauge::function::ScalarFunction;
use lipgauge::l2_examples::{run_example, WeightedGrid};
use lipgauge::lp::{LinearProgram, Relation};
use lipgauge::sampling;
use lipgauge::subdifferential::{default_dirs, dir_deriv, extract_subgradient};

fn gauge_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("gauge_eval");
    for n in [2usize, 4, 8] {
        let g = cube_gauge(n);
        let mut rng = sampling::rng(1);
        let pts: Vec<Vector> = (0..64).map(|_| sampling::gaussian_vector(&mut rng, n)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| pts.iter().map(|x| g.eval(black_box(x)).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

fn directional_derivative(c: &mut Criterion) {
    let f = ScalarFunction::from_expr("abs(x1) + x2^2 + exp(x3 - x1)", 3).unwrap();
    let (x, v) = (vector(&[0.0, 0.3, -0.2]), vector(&[1.0, -0.5, 0.25]));
    c.bench_function("dir_deriv", |b| b.iter(|| dir_deriv(&f, black_box(&x), black_box(&v)).unwrap()));
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_subgradient");
    for n in [2usize, 4] {
        let src = (1..=n).map(|i| format!("abs(x{i}) + x{i}^2")).collect::<Vec<_>>().join(" + ");
        let f = ScalarFunction::from_expr(&src, n).unwrap().with_convex(true);
        let g = cube_gauge(n);
        let x = Vector::zeros(n);
        let d = Vector::from_element(n, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| extract_subgradient(&f, &g, &x, black_box(&d), default_dirs(n)).unwrap())
        });
    }
    group.finish();
}

fn simplex(c: &mut Criterion) {
    let mut rng = sampling::rng(7);
    let (n, m) = (12, 30);
    let obj: Vec<f64> = (0..n).map(|_| sampling::uniform(&mut rng, -1.0, 1.0)).collect();
    let mut lp = LinearProgram::maximize(obj);
    for j in 0..n {
        lp.set_bounds(j, -1.0, 1.0);
    }
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| sampling::uniform(&mut rng, -1.0, 1.0)).collect();
        lp.add_row(row, Relation::Le, sampling::uniform(&mut rng, 0.5, 1.5));
    }
    c.bench_function("simplex_12x30", |b| b.iter(|| black_box(&lp).solve()));
}

fn l2_example(c: &mut Criterion) {
    let grid = WeightedGrid::midpoint(200).unwrap();
    let mut group = c.benchmark_group("l2_example");
    group.sample_size(10);
    group.bench_function("exp_chain_n200", |b| b.iter(|| run_example("exp_chain", &grid, 42).unwrap()));
    group.finish();
}

criterion_group!(benches, gauge_eval, directional_derivative, extraction, simplex, l2_example);
criterion_main!(benches);
