//! Discretised weighted-integral examples on `[0, 1]`.
//!
//! Functions are sampled at midpoint nodes `t_i = (i - 1/2) / N` with weights
//! `1/N`. The model function is
//! `phi(x) = sum_i w_i (x_i - t_i)^2 / t_i` on `{x >= -1}` (`+inf` elsewhere)
//! and its gauge is `mu(x) = sqrt(sum_i w_i x_i^2 / t_i)`.
//!
//! Subgradients are exported two ways: as coefficients `c_i` of the functional
//! `v -> sum_i w_i c_i v_i`, and as the Euclidean representative `w_i c_i`
//! (the vector the generic extraction routines return).

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use crate::convex_geometry::{ConvexSet, Gauge, Subspace, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lipschitz::{bound, empirical_constant_on_pairs, LipschitzCertificate};
use crate::sampling;
use crate::subdifferential::{default_dirs, extract_subgradient, lebourg_point};
use crate::symmetrization::SublevelCore;

pub const DEFAULT_GRID_N: usize = 1000;

/// Names accepted by [`run_example`].
pub const EXAMPLES: [&str; 5] = ["exp_chain", "sum", "product", "inner_chain", "lebourg"];

/// Pairs sampled for the two inequalities of the multiplication map.
const MAP_PAIRS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedGrid {
    /// Midpoint rule with `n` cells.
    pub fn midpoint(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node".into()));
        }
        let h = 1.0 / n as f64;
        Ok(Arc::new(Self {
            nodes: (0..n).map(|i| (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `<a, b>_w = sum_i w_i a_i b_i`.
    pub fn pair(&self, a: &Vector, b: &Vector) -> f64 {
        self.weights.iter().zip(a.iter().zip(b.iter())).map(|(w, (x, y))| w * x * y).sum()
    }

    /// `sqrt(<v, v>_w)`, the discrete `L2` norm.
    pub fn l2_norm(&self, v: &Vector) -> f64 {
        self.pair(v, v).sqrt()
    }

    /// The function `t -> f(t)` sampled at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vector {
        DVector::from_iterator(self.n(), self.nodes.iter().map(|&t| f(t)))
    }
}

/// Values of a function at the nodes of a grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    values: Vector,
    grid: Arc<WeightedGrid>,
}

#[derive(Serialize)]
struct GridFunctionDoc<'a> {
    n: usize,
    values: &'a [f64],
}

impl GridFunction {
    pub fn new(grid: Arc<WeightedGrid>, values: Vector) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::DimensionMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("grid function values".into()));
        }
        Ok(Self { values, grid })
    }

    pub fn from_fn(grid: Arc<WeightedGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.sample(f);
        Self::new(grid, values)
    }

    /// `f(t) = t`, the minimiser of `phi`.
    pub fn identity(grid: Arc<WeightedGrid>) -> Self {
        let values = grid.sample(|t| t);
        Self { values, grid }
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GridFunctionDoc {
            n: self.grid.n(),
            values: self.values.as_slice(),
        })
        .expect("plain numeric document")
    }
}

fn phi_on(grid: &WeightedGrid, x: &Vector) -> f64 {
    let mut s = 0.0;
    for ((&t, &w), &v) in grid.nodes.iter().zip(&grid.weights).zip(x.iter()) {
        if v < -1.0 || v.is_nan() {
            return f64::INFINITY;
        }
        s += w * (v - t) * (v - t) / t;
    }
    s
}

fn mu_on(grid: &WeightedGrid, x: &Vector) -> f64 {
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .zip(x.iter())
        .map(|((&t, &w), &v)| w * v * v / t)
        .sum::<f64>()
        .sqrt()
}

/// `sum_i w_i (x_i - t_i)^2 / t_i`, or `+inf` if some `x_i < -1`.
pub fn phi_l2(x: &GridFunction) -> f64 {
    phi_on(&x.grid, &x.values)
}

/// `sqrt(sum_i w_i x_i^2 / t_i)`.
pub fn mu_l2(x: &GridFunction) -> f64 {
    mu_on(&x.grid, &x.values)
}

/// The unique subgradient of `phi` at a strictly feasible point.
#[derive(Clone, Debug)]
pub struct L2Subgradient {
    /// `c_i = 2 (x_i - t_i) / t_i`, paired against `w_i v_i`.
    pub coefficients: Vector,
    /// `w_i c_i`, paired against `v` with the Euclidean product.
    pub representative: Vector,
}

impl L2Subgradient {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "coefficients": self.coefficients.as_slice(),
            "representative": self.representative.as_slice(),
        })
    }
}

pub fn subdiff_l2(x: &GridFunction) -> Result<L2Subgradient> {
    if x.values.iter().any(|&v| v <= -1.0) {
        return Err(Error::OutsideDomain);
    }
    let g = &x.grid;
    let coefficients = DVector::from_iterator(
        g.n(),
        g.nodes.iter().zip(x.values.iter()).map(|(&t, &v)| 2.0 * (v - t) / t),
    );
    let representative = coefficients.component_mul(&DVector::from_column_slice(&g.weights));
    Ok(L2Subgradient {
        coefficients,
        representative,
    })
}

/// `phi` as a convex function of the node values.
pub fn phi_function(grid: &Arc<WeightedGrid>) -> ScalarFunction {
    let g = grid.clone();
    ScalarFunction::new("phi_l2", grid.n(), move |x: &Vector| phi_on(&g, x)).with_convex(true)
}

/// `e^phi`.
pub fn exp_phi_function(grid: &Arc<WeightedGrid>) -> ScalarFunction {
    let g = grid.clone();
    ScalarFunction::new("exp(phi_l2)", grid.n(), move |x: &Vector| phi_on(&g, x).exp()).with_convex(true)
}

/// `e^phi + phi`.
pub fn sum_function(grid: &Arc<WeightedGrid>) -> ScalarFunction {
    let g = grid.clone();
    ScalarFunction::new("exp(phi_l2) + phi_l2", grid.n(), move |x: &Vector| {
        let p = phi_on(&g, x);
        p.exp() + p
    })
    .with_convex(true)
}

/// `phi e^phi`; convex because `s -> s e^s` is convex and increasing on `s >= 0`.
pub fn product_function(grid: &Arc<WeightedGrid>) -> ScalarFunction {
    let g = grid.clone();
    ScalarFunction::new("phi_l2 * exp(phi_l2)", grid.n(), move |x: &Vector| {
        let p = phi_on(&g, x);
        p * p.exp()
    })
    .with_convex(true)
}

/// `phi(g(x))` with `g(x)(t) = t x(t)`.
pub fn inner_chain_function(grid: &Arc<WeightedGrid>) -> ScalarFunction {
    let g = grid.clone();
    ScalarFunction::new("phi_l2(t x)", grid.n(), move |x: &Vector| {
        let y = DVector::from_iterator(x.len(), x.iter().zip(&g.nodes).map(|(v, t)| v * t));
        phi_on(&g, &y)
    })
    .with_convex(true)
}

/// `{x : x_i >= -1}`.
pub fn feasible_domain(grid: &Arc<WeightedGrid>) -> Result<ConvexSet> {
    Ok(
        ConvexSet::oracle(grid.n(), f64::INFINITY, "x >= -1", |x: &Vector| x.iter().all(|&v| v >= -1.0))?
            .with_span_hint(Subspace::full(grid.n()))
            .with_center(DVector::zeros(grid.n()))?,
    )
}

/// Gauge `mu` with unit ball the ellipsoid `{mu(x - f) <= 1}` about `f`.
///
/// The set `{phi <= 1} - f` is also cut by `x_i >= -1 - t_i` (the cut binds
/// near `t = 0`), so it is not symmetric. The ellipsoid is its symmetric
/// hull in the directions where the cut is inactive, and is what `mu` gauges.
pub fn l2_gauge(grid: &Arc<WeightedGrid>) -> Result<Gauge> {
    let n = grid.n();
    let f = grid.sample(|t| t);
    let radius = (n as f64).sqrt() + f.norm();
    let (gs, gm, fc) = (grid.clone(), grid.clone(), f.clone());
    let set = ConvexSet::oracle(n, radius, "mu ellipsoid", move |x: &Vector| mu_on(&gs, &(x - &fc)) <= 1.0)?
        .with_span_hint(Subspace::full(n))
        .with_center(f)?;
    Gauge::explicit(set, Subspace::full(n), Subspace::zero(n), move |x: &Vector| mu_on(&gm, x))
}

/// Discrete `L2` norm as a gauge, unit ball centred at `center`.
pub fn l2_norm_gauge(grid: &Arc<WeightedGrid>, center: &Vector) -> Result<Gauge> {
    let n = grid.n();
    let radius = (n as f64).sqrt() + center.norm();
    let (gs, gm, c) = (grid.clone(), grid.clone(), center.clone());
    let set = ConvexSet::oracle(n, radius, "L2 ball", move |x: &Vector| gs.l2_norm(&(x - &c)) <= 1.0)?
        .with_span_hint(Subspace::full(n))
        .with_center(center.clone())?;
    Gauge::explicit(set, Subspace::full(n), Subspace::zero(n), move |x: &Vector| gm.l2_norm(x))
}

/// Symmetric core of `{phi <= level}` about `f` on the feasible domain.
/// Intended for small grids: span and core tests probe every coordinate.
pub fn l2_sublevel_core(grid: &Arc<WeightedGrid>, level: f64) -> Result<SublevelCore> {
    let f = grid.sample(|t| t);
    SublevelCore::build(&phi_function(grid), &feasible_domain(grid)?, &f, Some(level))
}

/// `f + y` for the ellipsoid core `C = {mu(y) <= 1, |y_i| <= 1 + t_i}`.
fn in_core(grid: &WeightedGrid, y: &Vector) -> bool {
    mu_on(grid, y) <= 1.0 && y.iter().zip(&grid.nodes).all(|(v, t)| v.abs() <= 1.0 + t)
}

/// A random member of `C`: a weighted Gaussian direction scaled to
/// `mu = radius`, clipped to the box `|y_i| <= 1 + t_i`.
fn core_sample(grid: &WeightedGrid, rng: &mut sampling::SeededRng, radius: f64) -> Vector {
    let d = sampling::gaussian_vector(rng, grid.n());
    let d = DVector::from_iterator(grid.n(), d.iter().zip(&grid.nodes).map(|(z, t)| z * t.sqrt()));
    let mu = mu_on(grid, &d).max(1e-300);
    DVector::from_iterator(
        grid.n(),
        d.iter().zip(&grid.nodes).map(|(v, t)| (v * radius / mu).clamp(-1.0 - t, 1.0 + t)),
    )
}

/// Lipschitz certificate for `phi` on `f + eps C` where
/// `C = ({phi <= 1} - f) ∩ (f - {phi <= 1})`. `M = 1` is attained at
/// `f + f / mu(f)`; the empirical constant is measured with `mu`.
pub fn l2_certificate(grid: &Arc<WeightedGrid>, eps: f64, pairs: usize, seed: u64) -> Result<LipschitzCertificate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside (0, 1)")));
    }
    let n = grid.n();
    let f = grid.sample(|t| t);
    let phi = phi_function(grid);
    let gauge = l2_gauge(grid)?;
    let mut rng = sampling::rng(seed);

    let top = &f / mu_on(grid, &f);
    let mut m = phi.value(&(&f + &top))?;
    for _ in 0..64 {
        let y = core_sample(grid, &mut rng, 1.0);
        m = m.max(phi.value(&(&f + y))?);
    }

    let mut list = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let ru = sampling::uniform(&mut rng, 0.0, 1.0);
        let rv = sampling::uniform(&mut rng, 0.0, 1.0);
        let u = &f + core_sample(grid, &mut rng, ru) * eps;
        let v = &f + core_sample(grid, &mut rng, rv) * eps;
        list.push((u, v));
    }
    let empirical = empirical_constant_on_pairs(&phi, &gauge, &list)?;

    let (gr, fc) = (grid.clone(), f.clone());
    let region = ConvexSet::oracle(n, eps * ((n as f64).sqrt() + 1.0) + f.norm(), "eps core", move |x: &Vector| {
        in_core(&gr, &((x - &fc) / eps))
    })?
    .with_span_hint(Subspace::full(n))
    .with_center(f)?;
    Ok(LipschitzCertificate {
        gauge,
        region,
        theoretical_l: bound(m, eps),
        empirical_l: empirical,
        epsilon: eps,
        m,
        sample_pairs: pairs,
        seed,
    })
}

/// Smooth feasible fixtures with `x(t) - t = O(t)` near `0`.
pub fn fixtures() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("2t", |t| 2.0 * t),
        ("t + t^2/2", |t| t + 0.5 * t * t),
        ("t - 0.4 t (1 - t)", |t| t - 0.4 * t * (1.0 - t)),
        ("t + 0.3 t sin(2 pi t)", |t| t + 0.3 * t * (2.0 * std::f64::consts::PI * t).sin()),
        ("t/2 + t^3/5", |t| 0.5 * t + 0.2 * t * t * t),
    ]
}

/// `alpha` on `[0, beta]`, zero elsewhere. `phi` of this step diverges
/// logarithmically as the grid is refined.
pub fn chi_step(alpha: f64, beta: f64) -> impl Fn(f64) -> f64 {
    move |t| if t <= beta { alpha } else { 0.0 }
}

/// `max_i |a_i - b_i| / max_i |b_i|`.
pub fn relative_deviation(a: &Vector, b: &Vector) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}

/// Coefficients of an extracted Euclidean representative.
fn coefficients_of(grid: &WeightedGrid, zeta: &Vector) -> Vector {
    DVector::from_iterator(zeta.len(), zeta.iter().zip(&grid.weights).map(|(z, w)| z / w))
}

fn objective_for(r: &Vector) -> Vector {
    if r.amax() > 0.0 {
        r.clone()
    } else {
        DVector::from_element(r.len(), 1.0)
    }
}

/// Extract a subgradient of `func` at `x` under `mu` and return it as
/// coefficients.
fn extract_coefficients(grid: &Arc<WeightedGrid>, func: &ScalarFunction, gauge: &Gauge, x: &Vector, objective: &Vector) -> Result<Vector> {
    let zeta = extract_subgradient(func, gauge, x, objective, default_dirs(grid.n()))?;
    Ok(coefficients_of(grid, &zeta))
}

/// Closed form `factor(phi(x)) * dphi(x)` against extraction, for each fixture.
fn scaled_example(
    name: &str,
    grid: &Arc<WeightedGrid>,
    func: &ScalarFunction,
    factor: impl Fn(f64) -> f64,
    factor_label: &str,
) -> Result<serde_json::Value> {
    let gauge = l2_gauge(grid)?;
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_factor = 0.0f64;
    for (label, fx) in fixtures() {
        let x = GridFunction::from_fn(grid.clone(), fx)?;
        let p = phi_l2(&x);
        let sub = subdiff_l2(&x)?;
        let expected_factor = factor(p);
        let closed = &sub.coefficients * expected_factor;
        let extracted = extract_coefficients(grid, func, &gauge, &x.values, &objective_for(&sub.representative))?;
        let dev = relative_deviation(&extracted, &closed);
        let measured_factor = grid.pair(&extracted, &sub.coefficients) / grid.pair(&sub.coefficients, &sub.coefficients);
        let factor_dev = (measured_factor - expected_factor).abs() / expected_factor.abs();
        worst = worst.max(dev);
        worst_factor = worst_factor.max(factor_dev);
        cases.push(json!({
            "fixture": label,
            "phi": p,
            "expected_factor": expected_factor,
            "measured_factor": measured_factor,
            "factor_deviation": factor_dev,
            "coefficient_deviation": dev,
        }));
    }
    Ok(json!({
        "example": name,
        "grid_n": grid.n(),
        "function": func.name(),
        "factor": factor_label,
        "cases": cases,
        "max_relative_deviation": worst,
        "max_factor_deviation": worst_factor,
        "passed": worst <= 1e-5 && worst_factor <= 1e-5,
    }))
}

fn inner_chain_example(grid: &Arc<WeightedGrid>, seed: u64) -> Result<serde_json::Value> {
    let n = grid.n();
    let t = grid.sample(|t| t);
    let x = GridFunction::from_fn(grid.clone(), |t| t + 0.5 * t * t)?;
    let xv = x.values.clone();
    let func = inner_chain_function(grid);
    let gauge = l2_norm_gauge(grid, &xv)?;

    // Coefficients of v -> 2 sum w (x - t) v and of v -> 2 sum w (x - 1) t v.
    let stated = DVector::from_iterator(n, xv.iter().zip(t.iter()).map(|(v, s)| 2.0 * (v - s)));
    let pullback = DVector::from_iterator(n, xv.iter().zip(t.iter()).map(|(v, s)| 2.0 * (v - 1.0) * s));
    let objective = pullback.component_mul(&DVector::from_column_slice(grid.weights()));
    let extracted = extract_coefficients(grid, &func, &gauge, &xv, &objective)?;
    let dev_stated = relative_deviation(&extracted, &stated);
    let dev_pullback = relative_deviation(&extracted, &pullback);

    let mul = |v: &Vector| v.component_mul(&t);
    let mut rng = sampling::rng(seed);
    let (mut worst_mu, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..MAP_PAIRS {
        let a = sampling::gaussian_vector(&mut rng, n);
        let b = sampling::gaussian_vector(&mut rng, n);
        let d = grid.l2_norm(&(&a - &b));
        let gd = mul(&a) - mul(&b);
        worst_mu = worst_mu.max(mu_on(grid, &gd) / d);
        worst_norm = worst_norm.max(grid.l2_norm(&gd) / d);
    }
    let tol = 1e-5;
    Ok(json!({
        "example": "inner_chain",
        "grid_n": n,
        "function": func.name(),
        "point": "t + t^2/2",
        "stated_deviation": dev_stated,
        "stated_matches": dev_stated <= tol,
        "pullback_deviation": dev_pullback,
        "pullback_matches": dev_pullback <= tol,
        "map_pairs": MAP_PAIRS,
        "max_mu_ratio": worst_mu,
        "max_norm_ratio": worst_norm,
        "mu_inequality_holds": worst_mu <= 1.0 + 1e-12,
        "norm_inequality_holds": worst_norm <= 1.0 + 1e-12,
        "passed": dev_pullback <= tol && worst_mu <= 1.0 + 1e-12 && worst_norm <= 1.0 + 1e-12,
    }))
}

fn lebourg_example(grid: &Arc<WeightedGrid>) -> Result<serde_json::Value> {
    let phi = phi_function(grid);
    let gauge = l2_gauge(grid)?;
    let x = grid.sample(|t| t + 0.5 * t * t);
    let y = grid.sample(|t| 0.5 * t + 0.2 * t * t * t);
    let lp = lebourg_point(&phi, &gauge, &x, &y)?;
    // phi(x) - phi(y) = 2 sum w (alpha x + (1 - alpha) y - t) / t (x - y)
    let z = &x * lp.alpha + &y * (1.0 - lp.alpha);
    let zf = GridFunction::new(grid.clone(), z)?;
    let c = subdiff_l2(&zf)?.coefficients;
    let delta = phi_on(grid, &x) - phi_on(grid, &y);
    let mean_value_residual = (grid.pair(&c, &(&x - &y)) - delta).abs();
    Ok(json!({
        "example": "lebourg",
        "grid_n": grid.n(),
        "alpha": lp.alpha,
        "residual": lp.residual,
        "mean_value_residual": mean_value_residual,
        "passed": (lp.alpha - 0.5).abs() <= 1e-6 && lp.residual <= 1e-6 && mean_value_residual <= 1e-6,
    }))
}

/// Run one of [`EXAMPLES`] on `grid`.
pub fn run_example(name: &str, grid: &Arc<WeightedGrid>, seed: u64) -> Result<serde_json::Value> {
    match name {
        "exp_chain" => scaled_example(name, grid, &exp_phi_function(grid), f64::exp, "exp(phi)"),
        "sum" => scaled_example(name, grid, &sum_function(grid), |p| 1.0 + p.exp(), "1 + exp(phi)"),
        "product" => scaled_example(name, grid, &product_function(grid), |p| (1.0 + p) * p.exp(), "(1 + phi) exp(phi)"),
        "inner_chain" => inner_chain_example(grid, seed),
        "lebourg" => lebourg_example(grid),
        other => Err(Error::InvalidArgument(format!(
            "unknown example '{other}' (expected one of {})",
            EXAMPLES.join(", ")
        ))),
    }
}

/// Closed form against extraction for `phi` itself at every fixture.
pub fn closed_form_report(grid: &Arc<WeightedGrid>) -> Result<serde_json::Value> {
    let phi = phi_function(grid);
    let gauge = l2_gauge(grid)?;
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    for (label, fx) in fixtures() {
        let x = GridFunction::from_fn(grid.clone(), fx)?;
        let sub = subdiff_l2(&x)?;
        let extracted = extract_coefficients(grid, &phi, &gauge, &x.values, &objective_for(&sub.representative))?;
        let dev = relative_deviation(&extracted, &sub.coefficients);
        worst = worst.max(dev);
        cases.push(json!({ "fixture": label, "phi": phi_l2(&x), "coefficient_deviation": dev }));
    }
    let f = GridFunction::identity(grid.clone());
    let at_min = subdiff_l2(&f)?.coefficients.amax();
    Ok(json!({
        "grid_n": grid.n(),
        "phi_at_minimiser": phi_l2(&f),
        "max_coefficient_at_minimiser": at_min,
        "cases": cases,
        "max_relative_deviation": worst,
        "passed": phi_l2(&f) == 0.0 && at_min <= 1e-10 && worst <= 1e-5,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::minkowski_gauge;
    use crate::subdifferential::dir_deriv;

    fn grid(n: usize) -> Arc<WeightedGrid> {
        WeightedGrid::midpoint(n).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = grid(1000);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0);
    }

    #[test]
    fn minimum_and_closed_forms() {
        let g = grid(1000);
        let f = GridFunction::identity(g.clone());
        assert_eq!(phi_l2(&f), 0.0);
        assert!(subdiff_l2(&f).unwrap().coefficients.amax() <= 1e-10);
        assert!((mu_l2(&f) - 0.5f64.sqrt()).abs() < 1e-3);
        let zero = GridFunction::from_fn(g.clone(), |_| 0.0).unwrap();
        assert!((phi_l2(&zero) - 0.5).abs() < 1e-9);
        let two = GridFunction::from_fn(g.clone(), |t| 2.0 * t).unwrap();
        let c = subdiff_l2(&two).unwrap().coefficients;
        assert!(c.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let bad = GridFunction::from_fn(g, |_| -1.5).unwrap();
        assert_eq!(phi_l2(&bad), f64::INFINITY);
        assert!(subdiff_l2(&bad).is_err());
    }

    #[test]
    fn directional_pairing() {
        let g = grid(200);
        let phi = phi_function(&g);
        let x = GridFunction::from_fn(g.clone(), |t| t + 0.5 * t * t).unwrap();
        let c = subdiff_l2(&x).unwrap().coefficients;
        let v = g.sample(|t| t);
        let dd = dir_deriv(&phi, x.values(), &v).unwrap();
        assert!((dd - g.pair(&c, &v)).abs() < 1e-6);
    }

    #[test]
    fn gauge_matches_sublevel_where_cut_is_inactive() {
        let g = grid(32);
        let phi = phi_function(&g);
        let f = g.sample(|t| t);
        let s1 = ConvexSet::sublevel(phi, 1.0, feasible_domain(&g).unwrap())
            .unwrap()
            .with_center(f.clone())
            .unwrap();
        let set_gauge = Gauge::with_structure(s1, Subspace::full(32), Subspace::zero(32)).unwrap();
        let mut rng = sampling::rng(3);
        let mut checked = 0;
        for _ in 0..40 {
            let d = sampling::gaussian_vector(&mut rng, 32);
            let m = mu_on(&g, &d);
            let boundary = &d / m;
            if !boundary.iter().zip(g.nodes()).all(|(v, t)| *v >= -1.0 - t) {
                continue;
            }
            checked += 1;
            let s = minkowski_gauge(&set_gauge, &d).unwrap();
            assert!((s - m).abs() <= 1e-6 * (1.0 + m), "{s} vs {m}");
        }
        assert!(checked > 5);
        // the cut binds along -e_2
        let mut e2 = DVector::zeros(32);
        e2[1] = -1.0;
        let s = minkowski_gauge(&set_gauge, &e2).unwrap();
        assert!(s > mu_on(&g, &e2) * 1.01);
    }

    #[test]
    fn step_blows_up_under_refinement() {
        let vals: Vec<f64> = [100, 1000, 10000]
            .iter()
            .map(|&n| phi_l2(&GridFunction::from_fn(grid(n), chi_step(1.0, 0.5)).unwrap()))
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
        assert!(vals[2] - vals[1] > 2.0);
    }

    #[test]
    fn lebourg_midpoint() {
        let r = run_example("lebourg", &grid(1000), 42).unwrap();
        assert!((r["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-6, "{r}");
        assert!(r["residual"].as_f64().unwrap() < 1e-6);
        assert_eq!(r["passed"], true);
    }

    #[test]
    fn extraction_matches_closed_form() {
        let r = closed_form_report(&grid(1000)).unwrap();
        assert_eq!(r["passed"], true, "{r}");
    }

    #[test]
    fn certificate_holds() {
        let c = l2_certificate(&grid(200), 0.5, 500, 42).unwrap();
        assert!((c.m - 1.0).abs() < 1e-9);
        assert!(c.holds(), "{} vs {}", c.empirical_l, c.theoretical_l);
        assert!(c.empirical_l <= 2.0 * 0.5 + 1e-9);
    }
}
