//! Convex sets, their Minkowski gauges, spans, kernels and intrinsic cores.
//!
//! A [`Gauge`] is the Minkowski functional of a set `S` about its centre `p`:
//! `mu(x) = inf { t > 0 : x in t (S - p) }`. It is `+inf` off
//! `span(S - p)` and vanishes on the kernel (the lineality space of `S`).

mod set;
mod subspace;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

pub use set::{
    bisect_extent, implicit_equalities, relative_interior_point, ConvexSet, Halfspace, Membership,
    Representation, MEMBER_TOL,
};
pub use subspace::{Subspace, RANK_TOL};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::sampling;

pub type Vector = DVector<f64>;

/// Radius beyond which a ray is treated as unbounded.
pub const PROBE_RADIUS: f64 = 1e8;
/// Default relative tolerance of gauge evaluations.
pub const GAUGE_TOL: f64 = 1e-9;
/// Geometric shrink floor used by the intrinsic-core probe, relative to
/// `1 + |x|_inf`. Kept well above the membership tolerance so that a step
/// through a facet is never accepted.
pub const ICR_T_MIN: f64 = 1e-9;

pub fn vector(xs: &[f64]) -> Vector {
    DVector::from_column_slice(xs)
}

pub type GaugeFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

#[derive(Clone)]
enum GaugeKind {
    /// Evaluate from the set itself.
    Set,
    /// Closed-form evaluator supplied by the caller.
    Explicit(GaugeFn),
    /// `mu + nu`.
    Sum(Gauge, Gauge),
    /// `max(mu1(x1), mu2(x2))` on a product space.
    Product(Gauge, Gauge),
}

struct GaugeInner {
    set: ConvexSet,
    center: Vector,
    span: Subspace,
    kernel: Subspace,
    quotient: Subspace,
    kind: GaugeKind,
}

/// Minkowski gauge of a centred convex set, with its span and kernel.
#[derive(Clone)]
pub struct Gauge {
    inner: Arc<GaugeInner>,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gauge")
            .field("dim", &self.dim())
            .field("span_dim", &self.inner.span.dim())
            .field("kernel_dim", &self.inner.kernel.dim())
            .finish()
    }
}

impl Gauge {
    /// Gauge of `set` about its centre. Span and kernel are computed.
    pub fn new(set: ConvexSet) -> Result<Self> {
        let center = set.center().cloned().ok_or(Error::MissingCenter)?;
        let span = span_of_difference(&set, &center)?;
        let kernel = compute_kernel(&set, &center, &span)?;
        Ok(Self::assemble(set, center, span, kernel, GaugeKind::Set))
    }

    /// Gauge with caller-supplied span and kernel (e.g. known analytically).
    pub fn with_structure(set: ConvexSet, span: Subspace, kernel: Subspace) -> Result<Self> {
        let center = set.center().cloned().ok_or(Error::MissingCenter)?;
        Ok(Self::assemble(set, center, span, kernel, GaugeKind::Set))
    }

    /// Gauge whose values come from a closed form rather than the set.
    pub fn explicit(
        set: ConvexSet,
        span: Subspace,
        kernel: Subspace,
        f: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let center = set.center().cloned().ok_or(Error::MissingCenter)?;
        Ok(Self::assemble(set, center, span, kernel, GaugeKind::Explicit(Arc::new(f))))
    }

    fn assemble(set: ConvexSet, center: Vector, span: Subspace, kernel: Subspace, kind: GaugeKind) -> Self {
        let quotient = span.minus(&kernel);
        Self {
            inner: Arc::new(GaugeInner {
                set,
                center,
                span,
                kernel,
                quotient,
                kind,
            }),
        }
    }

    /// `mu + nu` for two gauges sharing a centre: the gauge of
    /// `{x : mu(x - p) + nu(x - p) <= 1}`.
    pub fn sum(a: &Gauge, b: &Gauge) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let p = a.center().clone();
        let (ga, gb, pc) = (a.clone(), b.clone(), p.clone());
        let radius = match (a.set().bounding_radius(), b.set().bounding_radius()) {
            (Some(r), Some(s)) => r.min(s) + 2.0 * p.norm(),
            (Some(r), None) | (None, Some(r)) => r + 2.0 * p.norm(),
            (None, None) => f64::INFINITY,
        };
        let span = a.span().intersection(b.span());
        let set = ConvexSet::oracle(a.dim(), radius, "gauge sum ball", move |y: &Vector| {
            let d = y - &pc;
            match (ga.eval(&d), gb.eval(&d)) {
                (Ok(u), Ok(v)) => u + v <= 1.0,
                _ => false,
            }
        })?
        .with_span_hint(span.clone())
        .with_center(p.clone())?;
        let kernel = a.kernel().intersection(b.kernel());
        Ok(Self::assemble(set, p, span, kernel, GaugeKind::Sum(a.clone(), b.clone())))
    }

    /// `max(mu1(x1), mu2(x2))` on `R^(n1 + n2)`: the gauge of the product set.
    pub fn product(a: &Gauge, b: &Gauge) -> Result<Self> {
        let (n1, n2) = (a.dim(), b.dim());
        let mut p = DVector::zeros(n1 + n2);
        p.rows_mut(0, n1).copy_from(a.center());
        p.rows_mut(n1, n2).copy_from(b.center());
        let (sa, sb) = (a.set().clone(), b.set().clone());
        let radius = match (sa.bounding_radius(), sb.bounding_radius()) {
            (Some(r), Some(s)) => (r * r + s * s).sqrt(),
            _ => f64::INFINITY,
        };
        let span = a.span().direct_sum(b.span());
        let set = ConvexSet::oracle(n1 + n2, radius, "product set", move |y: &Vector| {
            sa.contains(&y.rows(0, n1).into_owned()) && sb.contains(&y.rows(n1, n2).into_owned())
        })?
        .with_span_hint(span.clone())
        .with_center(p.clone())?;
        let kernel = a.kernel().direct_sum(b.kernel());
        Ok(Self::assemble(set, p, span, kernel, GaugeKind::Product(a.clone(), b.clone())))
    }

    pub fn dim(&self) -> usize {
        self.inner.set.dim()
    }

    pub fn set(&self) -> &ConvexSet {
        &self.inner.set
    }

    pub fn center(&self) -> &Vector {
        &self.inner.center
    }

    /// `span(S - p)`.
    pub fn span(&self) -> &Subspace {
        &self.inner.span
    }

    /// `{v : mu(v) = mu(-v) = 0}`.
    pub fn kernel(&self) -> &Subspace {
        &self.inner.kernel
    }

    /// Orthogonal complement of the kernel inside the span.
    pub fn quotient(&self) -> &Subspace {
        &self.inner.quotient
    }

    /// `mu(x)`; `+inf` off the span, `0` on the kernel.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("gauge argument".into()));
        }
        let nx = x.norm();
        if nx == 0.0 {
            return Ok(0.0);
        }
        let inner = &self.inner;
        if !inner.span.is_full() && inner.span.residual(x) > GAUGE_TOL * (1.0 + nx) {
            return Ok(f64::INFINITY);
        }
        if inner.kernel.dim() > 0 && inner.quotient.project(x).norm() <= 1e-12 * nx {
            return Ok(0.0);
        }
        match &inner.kind {
            GaugeKind::Explicit(f) => Ok(f(x)),
            GaugeKind::Sum(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            GaugeKind::Product(a, b) => {
                let n1 = a.dim();
                let u = a.eval(&x.rows(0, n1).into_owned())?;
                let v = b.eval(&x.rows(n1, b.dim()).into_owned())?;
                Ok(u.max(v))
            }
            GaugeKind::Set => Ok(set_gauge(&inner.set, &inner.center, x)),
        }
    }
}

/// `mu_S(x)` for the gauge `g` (free-function form).
pub fn minkowski_gauge(g: &Gauge, x: &Vector) -> Result<f64> {
    g.eval(x)
}

/// Gauge of `s` about `p` computed directly from the representation.
fn set_gauge(s: &ConvexSet, p: &Vector, x: &Vector) -> f64 {
    match s.repr() {
        Representation::Halfspaces(rows) => {
            let mut mu = 0.0f64;
            let nx = x.norm();
            for h in rows {
                let rate = h.normal.dot(x);
                let slack = h.offset - h.normal.dot(p);
                if slack <= MEMBER_TOL * (1.0 + h.offset.abs()) {
                    if rate > 1e-12 * h.normal.norm() * nx {
                        return f64::INFINITY;
                    }
                    continue;
                }
                mu = mu.max(rate / slack);
            }
            mu
        }
        Representation::Vertices(vs) => vertex_gauge(vs, p, x),
        _ => {
            let nx = x.norm();
            let d = x / nx;
            let cap = s.probe_cap(p);
            let rho = s.ray_extent(p, &d, cap);
            if rho >= cap && s.bounding_radius().is_none() {
                0.0
            } else if rho <= 0.0 {
                f64::INFINITY
            } else {
                nx / rho
            }
        }
    }
}

/// `min sum(lambda)` with `sum lambda_i (v_i - p) = x`, `lambda >= 0`.
fn vertex_gauge(vs: &[Vector], p: &Vector, x: &Vector) -> f64 {
    let k = vs.len();
    let mut lp = LinearProgram::maximize(vec![-1.0; k]);
    lp.nonnegative();
    for i in 0..x.len() {
        lp.add_row(vs.iter().map(|v| v[i] - p[i]).collect(), Relation::Eq, x[i]);
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => (-s.value).max(0.0),
        _ => f64::INFINITY,
    }
}

/// `span(S - base)`; `base` must be a member.
pub fn span_of_difference(s: &ConvexSet, base: &Vector) -> Result<Subspace> {
    if base.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: base.len(),
        });
    }
    if !s.contains(base) {
        return Err(Error::NotAMember("span base point".into()));
    }
    match s.repr() {
        Representation::Halfspaces(_) | Representation::Vertices(_) => span_of_difference_any(s),
        _ => Ok(probe_span(s, base)),
    }
}

/// `span(S - S)` without a designated base point.
pub(crate) fn span_of_difference_any(s: &ConvexSet) -> Result<Subspace> {
    let n = s.dim();
    match s.repr() {
        Representation::Halfspaces(rows) => {
            let eq = implicit_equalities(n, rows)?;
            let normals: Vec<Vector> = eq.iter().map(|&i| rows[i].normal.clone()).collect();
            Ok(Subspace::from_spanning(n, &normals).complement())
        }
        Representation::Vertices(vs) => {
            let diffs: Vec<Vector> = vs.iter().map(|v| v - &vs[0]).collect();
            Ok(Subspace::from_spanning(n, &diffs))
        }
        _ => {
            let a = s.anchor()?;
            Ok(probe_span(s, &a))
        }
    }
}

/// Chords found along coordinate and random directions of the probe space.
fn probe_span(s: &ConvexSet, base: &Vector) -> Subspace {
    let n = s.dim();
    let space = s.probe_subspace().unwrap_or_else(|_| Subspace::full(n));
    if space.dim() == 0 {
        return Subspace::zero(n);
    }
    let mut dirs = space.basis_vectors();
    let mut rng = sampling::rng(0xC0DE ^ n as u64);
    for _ in 0..(4 * space.dim()).saturating_sub(space.dim()) {
        dirs.push(sampling::unit_in(&mut rng, &space));
    }
    let cap = s.probe_cap(base).min(PROBE_RADIUS);
    let mut chords = Vec::new();
    for d in dirs {
        for dd in [d.clone(), -d] {
            let rho = s.ray_extent(base, &dd, cap);
            if rho > 0.0 {
                chords.push(dd * rho);
            }
        }
    }
    Subspace::from_spanning(n, &chords)
}

fn compute_kernel(s: &ConvexSet, p: &Vector, span: &Subspace) -> Result<Subspace> {
    let n = s.dim();
    match s.repr() {
        Representation::Halfspaces(rows) => {
            let normals: Vec<Vector> = rows.iter().map(|h| h.normal.clone()).collect();
            Ok(Subspace::from_spanning(n, &normals).complement().intersection(span))
        }
        Representation::Vertices(_) => Ok(Subspace::zero(n)),
        _ if s.bounding_radius().is_some_and(|r| r < PROBE_RADIUS) => Ok(Subspace::zero(n)),
        _ => {
            let mut cands = span.basis_vectors();
            let mut rng = sampling::rng(0x4E11 ^ n as u64);
            for _ in 0..2 * span.dim() {
                cands.push(sampling::unit_in(&mut rng, span));
            }
            let unbounded = |d: &Vector| {
                s.ray_extent(p, d, PROBE_RADIUS) >= PROBE_RADIUS && s.ray_extent(p, &-d, PROBE_RADIUS) >= PROBE_RADIUS
            };
            let hits: Vec<Vector> = cands.into_iter().filter(|d| unbounded(d)).collect();
            Ok(Subspace::from_spanning(n, &hits))
        }
    }
}

/// `Ker(mu)` for a gauge.
pub fn kernel_of_gauge(g: &Gauge) -> Subspace {
    g.kernel().clone()
}

/// Whether `x` lies in the intrinsic core of `s`: every line through `x`
/// inside `aff(S)` extends a little on both sides within `S`.
pub fn in_icr(s: &ConvexSet, x: &Vector, probe_dirs: usize) -> Result<bool> {
    if !s.contains(x) {
        return Err(Error::NotAMember("icr probe point".into()));
    }
    match s.repr() {
        Representation::Halfspaces(rows) => {
            let eq = implicit_equalities(s.dim(), rows)?;
            Ok(rows.iter().enumerate().all(|(i, h)| {
                eq.contains(&i)
                    || h.normal.norm() == 0.0
                    || h.offset - h.normal.dot(x) > 1e-10 * (1.0 + h.offset.abs())
            }))
        }
        Representation::Vertices(vs) => Ok(vertex_relint(vs, x)),
        _ => {
            let span = span_of_difference(s, x)?;
            let mut dirs = Vec::new();
            for b in span.basis_vectors() {
                dirs.push(-&b);
                dirs.push(b);
            }
            let mut rng = sampling::rng(0x1C2 ^ probe_dirs as u64);
            for _ in 0..probe_dirs {
                if span.dim() > 0 {
                    dirs.push(sampling::unit_in(&mut rng, &span));
                }
            }
            let floor = ICR_T_MIN * (1.0 + x.amax());
            Ok(dirs.iter().all(|d| {
                let mut t = 1.0;
                while t >= floor {
                    if s.contains(&(x + d * t)) {
                        return true;
                    }
                    t *= 0.5;
                }
                false
            }))
        }
    }
}

/// `x = sum lambda_i v_i` with every `lambda_i > 0`.
fn vertex_relint(vs: &[Vector], x: &Vector) -> bool {
    let k = vs.len();
    let mut obj = vec![0.0; k + 1];
    obj[k] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.nonnegative();
    lp.set_bounds(k, 0.0, 1.0);
    for i in 0..x.len() {
        let mut row: Vec<f64> = vs.iter().map(|v| v[i]).collect();
        row.push(0.0);
        lp.add_row(row, Relation::Eq, x[i]);
    }
    let mut ones = vec![1.0; k];
    ones.push(0.0);
    lp.add_row(ones, Relation::Eq, 1.0);
    for j in 0..k {
        let mut row = vec![0.0; k + 1];
        row[j] = 1.0;
        row[k] = -1.0;
        lp.add_row(row, Relation::Ge, 0.0);
    }
    matches!(lp.solve(), LpOutcome::Optimal(s) if s.value > 1e-9)
}

/// Whether `2p - y` is in `S` for every `y` in `S`. Exact for halfspace and
/// vertex representations, sampled (`samples` members) otherwise.
pub fn check_symmetry(s: &ConvexSet, p: &Vector, samples: usize) -> Result<bool> {
    if p.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: p.len(),
        });
    }
    if !s.contains(p) {
        return Err(Error::NotAMember("symmetry centre".into()));
    }
    match s.repr() {
        Representation::Halfspaces(rows) => {
            for h in rows {
                // reflected row: -a·y <= b - 2 a·p must be implied by S
                let mut lp = LinearProgram::maximize((-&h.normal).iter().copied().collect());
                for r in rows {
                    lp.add_row(r.normal.iter().copied().collect(), Relation::Le, r.offset);
                }
                let bound = h.offset - 2.0 * h.normal.dot(p);
                match lp.solve() {
                    LpOutcome::Optimal(sol) => {
                        if sol.value > bound + 1e-9 * (1.0 + bound.abs()) {
                            return Ok(false);
                        }
                    }
                    LpOutcome::Unbounded => return Ok(false),
                    _ => return Err(Error::EmptySet("halfspace system".into())),
                }
            }
            Ok(true)
        }
        Representation::Vertices(vs) => Ok(vs.iter().all(|v| s.contains(&(p * 2.0 - v)))),
        _ => {
            let space = s.probe_subspace()?;
            let mut rng = sampling::rng(0x5A11 ^ samples as u64);
            let pts = s.sample_members(p, &space, samples, &mut rng);
            Ok(pts.iter().all(|m| s.contains(&(p - (m - p)))))
        }
    }
}
