//! Sampled verifiers for the subdifferential calculus rules.
//!
//! A set inclusion `A ⊆ B` between convex sets is decided by support
//! dominance `h_A(v) <= h_B(v)` on a direction sample. Left-hand sides are
//! supports of the composite function; right-hand sides are assembled from
//! the supports of the pieces.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex_geometry::{ConvexSet, Gauge, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::sampling;
use crate::subdifferential::{probe_directions, support, DEFAULT_SEED};

/// Support-unit tolerance for inclusion and equality verdicts.
pub const RULE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InclusionHolds,
    EqualityHolds,
    Violated,
}

#[derive(Clone, Debug)]
pub struct RuleReport {
    pub rule_name: String,
    pub point: Vector,
    pub directions: Vec<Vector>,
    pub lhs_support: Vec<f64>,
    pub rhs_support: Vec<f64>,
    /// `max (lhs - rhs)`.
    pub max_violation: f64,
    /// `max (rhs - lhs)`.
    pub reverse_gap: f64,
    pub verdict: Verdict,
    /// Whether the regular-case hypotheses hold, when the rule has them.
    pub equality_expected: Option<bool>,
}

#[derive(Serialize)]
struct RuleReportDoc<'a> {
    rule_name: &'a str,
    point: Vec<f64>,
    directions: Vec<Vec<f64>>,
    lhs_support: &'a [f64],
    rhs_support: &'a [f64],
    max_violation: f64,
    verdict: Verdict,
    equality_expected: Option<bool>,
}

impl RuleReport {
    fn new(
        rule_name: &str,
        point: &Vector,
        directions: Vec<Vector>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        equality_expected: Option<bool>,
    ) -> Self {
        let max_violation = lhs.iter().zip(&rhs).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        let reverse_gap = lhs.iter().zip(&rhs).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
        let verdict = if max_violation > RULE_TOL {
            Verdict::Violated
        } else if reverse_gap <= RULE_TOL {
            Verdict::EqualityHolds
        } else {
            Verdict::InclusionHolds
        };
        Self {
            rule_name: rule_name.into(),
            point: point.clone(),
            directions,
            lhs_support: lhs,
            rhs_support: rhs,
            max_violation,
            reverse_gap,
            verdict,
            equality_expected,
        }
    }

    /// Inclusion holds (with or without equality).
    pub fn inclusion_holds(&self) -> bool {
        self.verdict != Verdict::Violated
    }

    pub fn equality_holds(&self) -> bool {
        self.verdict == Verdict::EqualityHolds
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = |x: &Vector| x.iter().copied().collect::<Vec<f64>>();
        serde_json::to_value(RuleReportDoc {
            rule_name: &self.rule_name,
            point: v(&self.point),
            directions: self.directions.iter().map(v).collect(),
            lhs_support: &self.lhs_support,
            rhs_support: &self.rhs_support,
            max_violation: self.max_violation,
            verdict: self.verdict,
            equality_expected: self.equality_expected,
        })
        .expect("plain numeric document")
    }
}

/// Support of `c A` from the support of `A`: `c h(v)` for `c >= 0`, else
/// `|c| h(-v)`.
fn scaled(c: f64, h_plus: f64, h_minus: f64) -> f64 {
    if c >= 0.0 {
        c * h_plus
    } else {
        -c * h_minus
    }
}

fn supports(f: &ScalarFunction, g: &Gauge, x: &Vector, dirs: &[Vector]) -> Result<Vec<f64>> {
    dirs.par_iter().map(|d| support(f, g, x, d)).collect()
}

fn supports_pm(f: &ScalarFunction, g: &Gauge, x: &Vector, dirs: &[Vector]) -> Result<Vec<(f64, f64)>> {
    dirs.par_iter()
        .map(|d| Ok((support(f, g, x, d)?, support(f, g, x, &-d)?)))
        .collect()
}

fn check_spans(a: &Gauge, b: &Gauge) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if !a.span().same_as(b.span(), 1e-8) {
        return Err(Error::InvalidArgument("gauge spans differ".into()));
    }
    Ok(())
}

/// `∂^{mu+nu}(phi + f)(x) ⊆ ∂^mu phi(x) + ∂^nu f(x)`.
pub fn verify_sum_rule(
    phi: &ScalarFunction,
    f: &ScalarFunction,
    g_mu: &Gauge,
    g_nu: &Gauge,
    x: &Vector,
    dirs: usize,
) -> Result<RuleReport> {
    check_spans(g_mu, g_nu)?;
    let gs = Gauge::sum(g_mu, g_nu)?;
    let total = ScalarFunction::sum(phi, f);
    let directions = probe_directions(gs.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(&total, &gs, x, &directions)?;
    let a = supports(phi, g_mu, x, &directions)?;
    let b = supports(f, g_nu, x, &directions)?;
    let rhs = a.iter().zip(&b).map(|(p, q)| p + q).collect();
    let eq = phi.is_convex() && f.is_convex();
    Ok(RuleReport::new("sum", x, directions, lhs, rhs, Some(eq)))
}

/// `∂(phi f)(x) ⊆ f(x) ∂phi(x) + phi(x) ∂f(x)`.
pub fn verify_product_rule(
    phi: &ScalarFunction,
    f: &ScalarFunction,
    g_mu: &Gauge,
    g_nu: &Gauge,
    x: &Vector,
    dirs: usize,
) -> Result<RuleReport> {
    check_spans(g_mu, g_nu)?;
    let gs = Gauge::sum(g_mu, g_nu)?;
    let prod = ScalarFunction::product(phi, f);
    let (px, fx) = (phi.value(x)?, f.value(x)?);
    let directions = probe_directions(gs.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(&prod, &gs, x, &directions)?;
    let a = supports_pm(phi, g_mu, x, &directions)?;
    let b = supports_pm(f, g_nu, x, &directions)?;
    let rhs = a
        .iter()
        .zip(&b)
        .map(|(&(ap, am), &(bp, bm))| scaled(fx, ap, am) + scaled(px, bp, bm))
        .collect();
    let eq = phi.is_convex() && f.is_convex() && px >= 0.0 && fx >= 0.0;
    Ok(RuleReport::new("product", x, directions, lhs, rhs, Some(eq)))
}

/// Clarke subdifferential of a function on R^n at `u` by gradient sampling:
/// central-difference gradients at the `2^n` points `u ± delta/2` for six
/// shrinking `delta`, clustered. Returns the cluster means of the last scale.
pub fn outer_subdifferential(g: &ScalarFunction, u: &Vector) -> Result<Vec<Vector>> {
    let n = u.len();
    if n > 12 {
        return Err(Error::InvalidArgument("gradient sampling is limited to 12 outer variables".into()));
    }
    let scale = 1.0 + u.amax();
    let mut history: Vec<Vec<Vector>> = Vec::new();
    for s in 0..6 {
        let delta = 1e-2 * 0.1f64.powi(s) * scale;
        let h = delta * 1e-2;
        let mut grads = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let y = DVector::from_fn(n, |i, _| u[i] + if mask >> i & 1 == 1 { 0.5 } else { -0.5 } * delta);
            let mut grad = DVector::zeros(n);
            for i in 0..n {
                let mut e = DVector::zeros(n);
                e[i] = h;
                grad[i] = (g.value(&(&y + &e))? - g.value(&(&y - &e))?) / (2.0 * h);
            }
            grads.push(grad);
        }
        history.push(cluster(&grads, 1e-3));
    }
    let last = history.pop().expect("six scales");
    let prev = history.pop().expect("six scales");
    let stable = last.len() == prev.len()
        && last
            .iter()
            .all(|a| prev.iter().any(|b| (a - b).norm() <= 1e-3 * (1.0 + a.norm())));
    if !stable {
        return Err(Error::NoConvergence("outer subdifferential sampling did not stabilise".into()));
    }
    Ok(last)
}

fn cluster(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut groups: Vec<(Vector, usize)> = Vec::new();
    for p in points {
        match groups
            .iter_mut()
            .find(|(c, k)| (&(c.clone() / *k as f64) - p).norm() <= tol * (1.0 + p.norm()))
        {
            Some((c, k)) => {
                *c += p;
                *k += 1;
            }
            None => groups.push((p.clone(), 1)),
        }
    }
    groups.into_iter().map(|(c, k)| c / k as f64).collect()
}

/// `∂(g ∘ h)(x) ⊆ co { sum alpha_i ∂h_i(x) : alpha in ∂g(h(x)) }`.
pub fn verify_chain_rule_2(
    h: &[ScalarFunction],
    outer: &ScalarFunction,
    g_mu: &Gauge,
    x: &Vector,
    dirs: usize,
) -> Result<RuleReport> {
    let n = h.len();
    if outer.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: outer.dim(),
        });
    }
    let u = DVector::from_iterator(n, h.iter().map(|hi| hi.value(x)).collect::<Result<Vec<_>>>()?);
    let alphas = outer_subdifferential(outer, &u)?;
    let (hs, out) = (h.to_vec(), outer.clone());
    let composite = ScalarFunction::new(format!("{}∘h", outer.name()), x.len(), move |y: &Vector| {
        let mut vals = Vec::with_capacity(hs.len());
        for hi in &hs {
            match hi.value(y) {
                Ok(v) => vals.push(v),
                Err(_) => return f64::INFINITY,
            }
        }
        out.raw_or_inf(&DVector::from_vec(vals))
    });
    let directions = probe_directions(g_mu.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(&composite, g_mu, x, &directions)?;
    let parts = h
        .iter()
        .map(|hi| supports_pm(hi, g_mu, x, &directions))
        .collect::<Result<Vec<_>>>()?;
    let rhs = (0..directions.len())
        .map(|j| {
            alphas
                .iter()
                .map(|a| (0..n).map(|i| scaled(a[i], parts[i][j].0, parts[i][j].1)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let regular = alphas.len() == 1 || outer.is_convex();
    let eq = regular && h.iter().all(|hi| hi.is_convex()) && alphas.iter().all(|a| a.iter().all(|&c| c >= 0.0));
    Ok(RuleReport::new("chain2", x, directions, lhs, rhs, Some(eq)))
}

/// A differentiable map `R^m -> R^n` with its Jacobian-vector product.
#[derive(Clone)]
pub struct InnerMap {
    pub dim_in: usize,
    pub dim_out: usize,
    pub map: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
    pub jvp: Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>,
    /// Affine maps keep convexity of the composite.
    pub affine: bool,
}

impl InnerMap {
    /// `x -> a x`.
    pub fn linear(a: nalgebra::DMatrix<f64>) -> Self {
        let (m, n) = (a.nrows(), a.ncols());
        let (a1, a2) = (a.clone(), a);
        Self {
            dim_in: n,
            dim_out: m,
            map: Arc::new(move |x: &Vector| &a1 * x),
            jvp: Arc::new(move |_: &Vector, v: &Vector| &a2 * v),
            affine: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(nalgebra::DMatrix::identity(n, n))
    }
}

/// Pairs where the inner map expands distances, `mu(g(u) - g(w)) > p(u - w)`.
pub fn inner_map_violation(
    inner: &InnerMap,
    g_mu: &Gauge,
    p: &Gauge,
    around: &Vector,
    pairs: usize,
    seed: u64,
) -> Result<Option<(Vector, Vector)>> {
    let mut rng = sampling::rng(seed);
    let space = p.quotient();
    for _ in 0..pairs {
        let a = sampling::unit_in(&mut rng, space) * sampling::uniform(&mut rng, 0.0, 0.5);
        let b = sampling::unit_in(&mut rng, space) * sampling::uniform(&mut rng, 0.0, 0.5);
        let (pa, pb) = (p.eval(&a)?, p.eval(&b)?);
        let (u, w) = (around + a / pa.max(1.0), around + b / pb.max(1.0));
        let lhs = g_mu.eval(&((inner.map)(&u) - (inner.map)(&w)))?;
        let rhs = p.eval(&(&u - &w))?;
        if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
            return Ok(Some((u, w)));
        }
    }
    Ok(None)
}

/// `∂^p(phi ∘ g)(x) ⊆ { zeta ∘ Dg(x) : zeta in ∂^mu phi(g(x)) }`.
pub fn verify_chain_rule_1(
    phi: &ScalarFunction,
    g_mu: &Gauge,
    inner: &InnerMap,
    p: &Gauge,
    x: &Vector,
    dirs: usize,
) -> Result<RuleReport> {
    if inner.dim_out != phi.dim() || inner.dim_in != x.len() || p.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: inner.dim_in,
            got: x.len(),
        });
    }
    if let Some((u, w)) = inner_map_violation(inner, g_mu, p, x, 256, DEFAULT_SEED)? {
        return Err(Error::InvalidArgument(format!(
            "inner map expands the gauge between {:?} and {:?}",
            u.as_slice(),
            w.as_slice()
        )));
    }
    let (ph, map) = (phi.clone(), inner.map.clone());
    let composite = ScalarFunction::new(format!("{}∘g", phi.name()), x.len(), move |y: &Vector| {
        ph.raw_or_inf(&map(y))
    })
    .with_convex(phi.is_convex() && inner.affine);
    let gx = (inner.map)(x);
    let directions = probe_directions(p.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(&composite, p, x, &directions)?;
    let rhs = directions
        .par_iter()
        .map(|v| support(phi, g_mu, &gx, &(inner.jvp)(x, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleReport::new("chain1", x, directions, lhs, rhs, Some(phi.is_convex())))
}

/// `∂ max_i f_i(x) ⊆ co { ∂f_i(x) : i active }`.
pub fn verify_max_rule(fs: &[ScalarFunction], g_mu: &Gauge, x: &Vector, dirs: usize) -> Result<RuleReport> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument("max rule needs at least one function".into()));
    }
    let vals = fs.iter().map(|f| f.value(x)).collect::<Result<Vec<_>>>()?;
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<&ScalarFunction> = fs.iter().zip(&vals).filter(|(_, &v)| v >= top - 1e-9).map(|(f, _)| f).collect();
    let fmax = ScalarFunction::max_of(fs);
    let directions = probe_directions(g_mu.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(&fmax, g_mu, x, &directions)?;
    let parts = active
        .iter()
        .map(|f| supports(f, g_mu, x, &directions))
        .collect::<Result<Vec<_>>>()?;
    let rhs = (0..directions.len())
        .map(|j| parts.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let eq = active.iter().all(|f| f.is_convex());
    Ok(RuleReport::new("max", x, directions, lhs, rhs, Some(eq)))
}

/// `∂phi(x1, x2) ⊆ ∂_{x1} phi(·, x2)(x1) × ∂_{x2} phi(x1, ·)(x2)` under the
/// product gauge.
pub fn verify_partial_rule(
    phi: &ScalarFunction,
    g1: &Gauge,
    g2: &Gauge,
    x1: &Vector,
    x2: &Vector,
    dirs: usize,
) -> Result<RuleReport> {
    let (n1, n2) = (x1.len(), x2.len());
    if phi.dim() != n1 + n2 || g1.dim() != n1 || g2.dim() != n2 {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            got: n1 + n2,
        });
    }
    let gp = Gauge::product(g1, g2)?;
    let join = move |a: &Vector, b: &Vector| {
        let mut z = DVector::zeros(n1 + n2);
        z.rows_mut(0, n1).copy_from(a);
        z.rows_mut(n1, n2).copy_from(b);
        z
    };
    let x = join(x1, x2);
    let (p1, c2) = (phi.clone(), x2.clone());
    let slice1 = ScalarFunction::new("slice1", n1, move |y: &Vector| p1.raw_or_inf(&join(y, &c2)))
        .with_convex(phi.is_convex());
    let (p2, c1) = (phi.clone(), x1.clone());
    let slice2 = ScalarFunction::new("slice2", n2, move |y: &Vector| p2.raw_or_inf(&join(&c1, y)))
        .with_convex(phi.is_convex());
    let directions = probe_directions(gp.quotient(), dirs, DEFAULT_SEED);
    let lhs = supports(phi, &gp, &x, &directions)?;
    let rhs = directions
        .par_iter()
        .map(|v| {
            let v1 = v.rows(0, n1).into_owned();
            let v2 = v.rows(n1, n2).into_owned();
            Ok(support(&slice1, g1, x1, &v1)? + support(&slice2, g2, x2, &v2)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleReport::new("partial", &x, directions, lhs, rhs, None))
}

/// Rule families accepted by [`curated_fixtures`] and the CLI.
pub const RULES: [&str; 6] = ["sum", "product", "chain1", "chain2", "max", "partial"];

/// A named verification instance.
pub struct RuleCase {
    pub name: &'static str,
    pub rule: &'static str,
    /// Expected outcome: equality (`true`) or strict inclusion (`false`).
    pub expect_equality: bool,
    run: Box<dyn Fn() -> Result<RuleReport> + Send + Sync>,
}

impl RuleCase {
    pub fn run(&self) -> Result<RuleReport> {
        (self.run)()
    }
}

fn expr(src: &str, n: usize) -> ScalarFunction {
    ScalarFunction::from_expr(src, n).expect("fixture expression parses")
}

/// `[-1, 1]^n` gauge about the origin.
pub fn cube_gauge(n: usize) -> Gauge {
    let c = ConvexSet::cube(n, 1.0).with_center(DVector::zeros(n)).expect("origin is in the cube");
    Gauge::new(c).expect("cube gauge")
}

fn v(xs: &[f64]) -> Vector {
    DVector::from_column_slice(xs)
}

const FIXTURE_DIRS: usize = 24;

/// Convex (or regular) fixtures for every rule with known expected verdicts.
pub fn curated_fixtures() -> Vec<RuleCase> {
    fn case(
        name: &'static str,
        rule: &'static str,
        expect_equality: bool,
        run: impl Fn() -> Result<RuleReport> + Send + Sync + 'static,
    ) -> RuleCase {
        RuleCase {
            name,
            rule,
            expect_equality,
            run: Box::new(run),
        }
    }
    vec![
        case("sum/square+square", "sum", true, || {
            let g = cube_gauge(1);
            verify_sum_rule(&expr("x1^2", 1), &expr("x1^2", 1), &g, &g, &v(&[1.0]), FIXTURE_DIRS)
        }),
        case("sum/abs+linear", "sum", true, || {
            let g = cube_gauge(1);
            verify_sum_rule(&expr("abs(x1)", 1), &expr("x1", 1), &g, &g, &v(&[0.0]), FIXTURE_DIRS)
        }),
        case("sum/l1+quadratic", "sum", true, || {
            let g = cube_gauge(2);
            verify_sum_rule(
                &expr("abs(x1) + abs(x2)", 2),
                &expr("x1^2 + 0.5*x1*x2 + x2^2", 2),
                &g,
                &g,
                &v(&[0.0, 0.3]),
                FIXTURE_DIRS,
            )
        }),
        case("product/x*x", "product", true, || {
            let g = cube_gauge(1);
            verify_product_rule(&expr("x1", 1), &expr("x1", 1), &g, &g, &v(&[2.0]), FIXTURE_DIRS)
        }),
        case("product/abs*(1+abs)", "product", true, || {
            let g = cube_gauge(1);
            verify_product_rule(&expr("abs(x1)", 1), &expr("1 + abs(x1)", 1), &g, &g, &v(&[0.0]), FIXTURE_DIRS)
        }),
        case("product/quadratic*exp", "product", true, || {
            let g = cube_gauge(2);
            verify_product_rule(
                &expr("x1^2 + x2^2 + 1", 2),
                &expr("exp(x1 - x2)", 2),
                &g,
                &g,
                &v(&[0.4, -0.2]),
                FIXTURE_DIRS,
            )
        }),
        case("chain2/exp", "chain2", true, || {
            let g = cube_gauge(1);
            verify_chain_rule_2(&[expr("abs(x1)", 1)], &expr("exp(x1)", 1), &g, &v(&[0.0]), FIXTURE_DIRS)
        }),
        case("chain2/identity", "chain2", true, || {
            let g = cube_gauge(2);
            verify_chain_rule_2(&[expr("max(x1, x2)", 2)], &expr("x1", 1), &g, &v(&[0.0, 0.0]), FIXTURE_DIRS)
        }),
        case("chain2/coordinate-sum", "chain2", true, || {
            let g = cube_gauge(1);
            verify_chain_rule_2(
                &[expr("abs(x1)", 1), expr("x1", 1)],
                &expr("x1 + x2", 2),
                &g,
                &v(&[0.0]),
                FIXTURE_DIRS,
            )
        }),
        case("chain1/identity", "chain1", true, || {
            let g = cube_gauge(2);
            verify_chain_rule_1(
                &expr("abs(x1) + x2^2", 2),
                &g,
                &InnerMap::identity(2),
                &g,
                &v(&[0.0, 0.5]),
                FIXTURE_DIRS,
            )
        }),
        case("chain1/scaled-square", "chain1", true, || {
            // mu = |.|, p = 2|.| so that |2u - 2w| <= p(u - w)
            let mu = cube_gauge(1);
            let p = Gauge::new(ConvexSet::cube(1, 0.5).with_center(v(&[0.0]))?)?;
            verify_chain_rule_1(
                &expr("x1^2", 1),
                &mu,
                &InnerMap::linear(nalgebra::DMatrix::from_element(1, 1, 2.0)),
                &p,
                &v(&[0.3]),
                FIXTURE_DIRS,
            )
        }),
        case("max/x,-x", "max", true, || {
            let g = cube_gauge(1);
            verify_max_rule(&[expr("x1", 1), expr("-x1", 1)], &g, &v(&[0.0]), FIXTURE_DIRS)
        }),
        case("max/single", "max", true, || {
            let g = cube_gauge(2);
            verify_max_rule(&[expr("x1^2 + abs(x2)", 2)], &g, &v(&[0.5, 0.0]), FIXTURE_DIRS)
        }),
        case("max/inactive-branch", "max", true, || {
            let g = cube_gauge(1);
            verify_max_rule(&[expr("x1^2", 1), expr("x1^2 + 1", 1)], &g, &v(&[0.7]), FIXTURE_DIRS)
        }),
        case("partial/sum-of-squares", "partial", true, || {
            let g = cube_gauge(1);
            verify_partial_rule(&expr("x1^2 + x2^2", 2), &g, &g, &v(&[0.3]), &v(&[-0.6]), FIXTURE_DIRS)
        }),
        case("partial/l1", "partial", true, || {
            let g = cube_gauge(1);
            verify_partial_rule(&expr("abs(x1) + abs(x2)", 2), &g, &g, &v(&[0.0]), &v(&[0.0]), FIXTURE_DIRS)
        }),
        case("partial/simplex-in-box", "partial", false, || {
            let g = cube_gauge(1);
            verify_partial_rule(&expr("max(x1, x2)", 2), &g, &g, &v(&[0.0]), &v(&[0.0]), FIXTURE_DIRS)
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curated_verdicts() {
        for case in curated_fixtures() {
            let r = case.run().unwrap_or_else(|e| panic!("{}: {e}", case.name));
            assert!(r.inclusion_holds(), "{}: violation {}", case.name, r.max_violation);
            assert_eq!(r.equality_holds(), case.expect_equality, "{}: gap {}", case.name, r.reverse_gap);
        }
    }

    #[test]
    fn chain_with_coordinate_sum_matches_sum_rule() {
        let g = cube_gauge(2);
        let (a, b) = (expr("abs(x1) + x2^2", 2), expr("max(x1, -x2)", 2));
        let x = v(&[0.0, 0.0]);
        let s = verify_sum_rule(&a, &b, &g, &g, &x, 16).unwrap();
        let c = verify_chain_rule_2(&[a, b], &expr("x1 + x2", 2), &g, &x, 16).unwrap();
        for (p, q) in s.rhs_support.iter().zip(&c.rhs_support) {
            assert!((p - q).abs() < RULE_TOL);
        }
        for (p, q) in s.lhs_support.iter().zip(&c.lhs_support) {
            assert!((p - q).abs() < RULE_TOL);
        }
    }

    #[test]
    fn outer_sampling() {
        let a = outer_subdifferential(&expr("max(x1, x2)", 2), &v(&[0.0, 0.0])).unwrap();
        assert!(a.iter().any(|g| (g - v(&[1.0, 0.0])).norm() < 1e-6));
        assert!(a.iter().any(|g| (g - v(&[0.0, 1.0])).norm() < 1e-6));
        let e = outer_subdifferential(&expr("exp(x1)", 1), &v(&[0.5])).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0][0] - 0.5f64.exp()).abs() < 1e-6);
    }
}
