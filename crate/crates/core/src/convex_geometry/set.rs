use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::{Subspace, Vector, PROBE_RADIUS};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::sampling::{self, SeededRng};

/// Relative slack allowed in halfspace membership tests.
pub const MEMBER_TOL: f64 = 1e-12;
/// Relative width at which ray bisection stops.
const EXTENT_REL_TOL: f64 = 1e-12;

pub type Membership = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

#[derive(Clone)]
pub enum Representation {
    Halfspaces(Vec<Halfspace>),
    Vertices(Vec<Vector>),
    /// `{x in base : f(x) <= level}`.
    Sublevel {
        function: Arc<ScalarFunction>,
        level: f64,
        base: Arc<ConvexSet>,
    },
    /// Membership callback. All members satisfy `|x| <= bounding_radius`.
    Oracle {
        membership: Membership,
        bounding_radius: f64,
        span_hint: Option<Subspace>,
        label: String,
    },
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Halfspaces(h) => write!(f, "Halfspaces({} rows)", h.len()),
            Representation::Vertices(v) => write!(f, "Vertices({} points)", v.len()),
            Representation::Sublevel { function, level, .. } => {
                write!(f, "Sublevel({} <= {level})", function.name())
            }
            Representation::Oracle { label, bounding_radius, .. } => {
                write!(f, "Oracle({label}, radius {bounding_radius})")
            }
        }
    }
}

/// A convex subset of R^n with an optional distinguished centre.
#[derive(Clone, Debug)]
pub struct ConvexSet {
    dim: usize,
    repr: Representation,
    center: Option<Vector>,
}

fn check_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

impl ConvexSet {
    pub fn halfspaces(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        for h in &rows {
            check_dim(dim, h.normal.len())?;
            check_finite(&h.normal, "halfspace normal")?;
            if !h.offset.is_finite() {
                return Err(Error::NonFinite("halfspace offset".into()));
            }
        }
        Ok(Self {
            dim,
            repr: Representation::Halfspaces(rows),
            center: None,
        })
    }

    /// All of R^n.
    pub fn whole_space(dim: usize) -> Self {
        Self {
            dim,
            repr: Representation::Halfspaces(Vec::new()),
            center: None,
        }
    }

    /// Axis-aligned box `lo <= x <= hi`; infinite entries drop the bound.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let n = lo.len();
        let mut rows = Vec::new();
        for i in 0..n {
            if lo[i] > hi[i] {
                return Err(Error::EmptySet(format!("bound {i}: {} > {}", lo[i], hi[i])));
            }
            if hi[i].is_finite() {
                rows.push(Halfspace {
                    normal: DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }),
                    offset: hi[i],
                });
            }
            if lo[i].is_finite() {
                rows.push(Halfspace {
                    normal: DVector::from_fn(n, |k, _| if k == i { -1.0 } else { 0.0 }),
                    offset: -lo[i],
                });
            }
        }
        Self::halfspaces(n, rows)
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::from_bounds(&[a], &[b])
    }

    /// `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self::from_bounds(&vec![-r; n], &vec![r; n]).expect("valid cube")
    }

    pub fn vertices(points: Vec<Vector>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::EmptySet("no vertices".into()))?;
        let dim = first.len();
        for p in &points {
            check_dim(dim, p.len())?;
            check_finite(p, "vertex")?;
        }
        Ok(Self {
            dim,
            repr: Representation::Vertices(points),
            center: None,
        })
    }

    pub fn sublevel(function: ScalarFunction, level: f64, base: ConvexSet) -> Result<Self> {
        check_dim(base.dim, function.dim())?;
        if !level.is_finite() {
            return Err(Error::NonFinite("sublevel".into()));
        }
        Ok(Self {
            dim: base.dim,
            repr: Representation::Sublevel {
                function: Arc::new(function),
                level,
                base: Arc::new(base),
            },
            center: None,
        })
    }

    pub fn oracle(
        dim: usize,
        bounding_radius: f64,
        label: impl Into<String>,
        membership: impl Fn(&Vector) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        if bounding_radius.is_nan() || bounding_radius <= 0.0 {
            return Err(Error::InvalidArgument("bounding radius must be positive".into()));
        }
        Ok(Self {
            dim,
            repr: Representation::Oracle {
                membership: Arc::new(membership),
                bounding_radius,
                span_hint: None,
                label: label.into(),
            },
            center: None,
        })
    }

    /// Attach a subspace that contains `span(S - S)`, used to aim probes.
    pub fn with_span_hint(mut self, hint: Subspace) -> Self {
        if let Representation::Oracle { span_hint, .. } = &mut self.repr {
            *span_hint = Some(hint);
        }
        self
    }

    /// Attach a centre; fails if it is not a member.
    pub fn with_center(mut self, c: Vector) -> Result<Self> {
        check_dim(self.dim, c.len())?;
        check_finite(&c, "centre")?;
        if !self.contains(&c) {
            return Err(Error::NotAMember("centre".into()));
        }
        self.center = Some(c);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &Representation {
        &self.repr
    }

    pub fn center(&self) -> Option<&Vector> {
        self.center.as_ref()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match &self.repr {
            Representation::Halfspaces(rows) => rows
                .iter()
                .all(|h| h.normal.dot(x) <= h.offset + MEMBER_TOL * (1.0 + h.offset.abs())),
            Representation::Vertices(vs) => hull_contains(vs, x),
            Representation::Sublevel { function, level, base } => {
                base.contains(x) && function.try_value(x).is_some_and(|v| v <= *level)
            }
            Representation::Oracle { membership, .. } => membership(x),
        }
    }

    /// Radius of a ball about the origin containing the set, if known.
    pub fn bounding_radius(&self) -> Option<f64> {
        match &self.repr {
            Representation::Halfspaces(_) => None,
            Representation::Vertices(vs) => Some(vs.iter().map(|v| v.norm()).fold(0.0, f64::max)),
            Representation::Sublevel { base, .. } => base.bounding_radius(),
            Representation::Oracle { bounding_radius, .. } => {
                bounding_radius.is_finite().then_some(*bounding_radius)
            }
        }
    }

    /// Cap on the distance probed along a ray from `anchor`.
    pub fn probe_cap(&self, anchor: &Vector) -> f64 {
        match self.bounding_radius() {
            Some(r) => (r + anchor.norm()) * (1.0 + 1e-9) + 1e-12,
            None => PROBE_RADIUS,
        }
    }

    /// `sup {s in [0, cap] : anchor + s d in S}` for a member `anchor`.
    pub fn ray_extent(&self, anchor: &Vector, d: &Vector, cap: f64) -> f64 {
        match &self.repr {
            Representation::Halfspaces(rows) => {
                let mut s = cap;
                for h in rows {
                    let rate = h.normal.dot(d);
                    let slack = h.offset - h.normal.dot(anchor);
                    let scale = h.normal.norm() * d.norm();
                    if rate > 1e-14 * scale {
                        s = s.min((slack / rate).max(0.0));
                    }
                }
                s
            }
            Representation::Vertices(vs) => vertex_ray_extent(vs, anchor, d, cap),
            _ => bisect_extent(|s| self.contains(&(anchor + d * s)), cap),
        }
    }

    /// Subspace containing `S - S` as far as the representation reveals it.
    pub fn probe_subspace(&self) -> Result<Subspace> {
        match &self.repr {
            Representation::Sublevel { base, .. } => super::span_of_difference_any(base),
            Representation::Oracle { span_hint, .. } => {
                Ok(span_hint.clone().unwrap_or_else(|| Subspace::full(self.dim)))
            }
            _ => super::span_of_difference_any(self),
        }
    }

    /// A member of the set: the centre if present, otherwise a
    /// representation-specific interior-ish point.
    pub fn anchor(&self) -> Result<Vector> {
        if let Some(c) = &self.center {
            return Ok(c.clone());
        }
        match &self.repr {
            Representation::Vertices(vs) => {
                let mut c = DVector::zeros(self.dim);
                for v in vs {
                    c += v;
                }
                Ok(c / vs.len() as f64)
            }
            Representation::Halfspaces(rows) => relative_interior_point(self.dim, rows),
            Representation::Sublevel { function, level, base } => {
                let a = base.anchor()?;
                let space = base.probe_subspace()?;
                let mut rng = sampling::rng(0x5eed);
                let mut best: Option<(f64, Vector)> = None;
                let mut candidates = vec![a.clone()];
                candidates.extend(base.sample_members(&a, &space, 64 + 16 * self.dim, &mut rng));
                for p in candidates {
                    if let Some(v) = function.try_value(&p) {
                        if best.as_ref().is_none_or(|(b, _)| v < *b) {
                            best = Some((v, p));
                        }
                    }
                }
                match best {
                    Some((v, p)) if v <= *level => Ok(p),
                    _ => Err(Error::EmptySet(format!("no sampled point has {} <= {level}", function.name()))),
                }
            }
            Representation::Oracle { .. } => Err(Error::MissingCenter),
        }
    }

    /// Random members: ray samples from `anchor` along directions of `space`
    /// (a quarter of them on the boundary), or convex combinations for
    /// vertex sets.
    pub fn sample_members(&self, anchor: &Vector, space: &Subspace, count: usize, rng: &mut SeededRng) -> Vec<Vector> {
        let mut out = Vec::with_capacity(count);
        if let Representation::Vertices(vs) = &self.repr {
            let k = vs.len();
            for i in 0..count {
                let p = match i % 4 {
                    0 => vs[i / 4 % k].clone(),
                    1 => {
                        let a = &vs[rand::Rng::gen_range(rng, 0..k)];
                        let b = &vs[rand::Rng::gen_range(rng, 0..k)];
                        let t = sampling::uniform(rng, 0.0, 1.0);
                        a * (1.0 - t) + b * t
                    }
                    _ => {
                        let w = sampling::dirichlet(rng, k);
                        let mut p = DVector::zeros(self.dim);
                        for (wi, v) in w.iter().zip(vs) {
                            p += v * *wi;
                        }
                        p
                    }
                };
                out.push(p);
            }
            return out;
        }
        if space.dim() == 0 {
            return vec![anchor.clone(); count];
        }
        let cap = self.probe_cap(anchor);
        let k = space.dim() as f64;
        for i in 0..count {
            let d = sampling::unit_in(rng, space);
            let rho = self.ray_extent(anchor, &d, cap);
            let s = if i % 4 == 0 {
                rho * (1.0 - 1e-9)
            } else {
                rho * sampling::uniform(rng, 0.0, 1.0).powf(1.0 / k)
            };
            out.push(anchor + d * s);
        }
        out
    }

    /// `p + eps (S - p)`.
    pub fn scaled_about(&self, p: &Vector, eps: f64) -> Result<Self> {
        check_dim(self.dim, p.len())?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        let out = match &self.repr {
            Representation::Halfspaces(rows) => Self::halfspaces(
                self.dim,
                rows.iter()
                    .map(|h| Halfspace {
                        normal: h.normal.clone(),
                        offset: eps * h.offset + (1.0 - eps) * h.normal.dot(p),
                    })
                    .collect(),
            )?,
            Representation::Vertices(vs) => {
                Self::vertices(vs.iter().map(|v| p + (v - p) * eps).collect())?
            }
            _ => {
                let inner = self.clone();
                let (pc, hint) = (p.clone(), self.probe_subspace().ok());
                let radius = self
                    .bounding_radius()
                    .map(|r| eps * (r + p.norm()) + p.norm())
                    .unwrap_or(f64::INFINITY);
                let s = Self::oracle(self.dim, radius, format!("scaled({eps})"), move |x: &Vector| {
                    inner.contains(&(&pc + (x - &pc) / eps))
                })?;
                match hint {
                    Some(h) => s.with_span_hint(h),
                    None => s,
                }
            }
        };
        let c = self.center.as_ref().map(|c| p + (c - p) * eps);
        Ok(Self { center: c, ..out })
    }

    /// `S ∩ (2 x0 - S)`, the largest subset symmetric about `x0`.
    pub fn symmetric_part(&self, x0: &Vector) -> Result<Self> {
        check_dim(self.dim, x0.len())?;
        let out = match &self.repr {
            Representation::Halfspaces(rows) => {
                let mut all = rows.clone();
                for h in rows {
                    all.push(Halfspace {
                        normal: -&h.normal,
                        offset: h.offset - 2.0 * h.normal.dot(x0),
                    });
                }
                Self::halfspaces(self.dim, all)?
            }
            _ => {
                let inner = self.clone();
                let c = x0.clone();
                let hint = self.probe_subspace()?;
                let radius = self
                    .bounding_radius()
                    .unwrap_or(f64::INFINITY);
                Self::oracle(self.dim, radius, "symmetric part", move |x: &Vector| {
                    let d = x - &c;
                    inner.contains(&(&c + &d)) && inner.contains(&(&c - &d))
                })?
                .with_span_hint(hint)
            }
        };
        if out.contains(x0) {
            out.with_center(x0.clone())
        } else {
            Ok(out)
        }
    }
}

impl ConvexSet {
    /// Extreme points of a bounded polytope: the vertex list itself, or for
    /// halfspaces an enumeration of `dim`-row intersections when there are at
    /// most `max_combinations` of them. `None` otherwise.
    pub fn polytope_vertices(&self, max_combinations: usize) -> Option<Vec<Vector>> {
        match &self.repr {
            Representation::Vertices(vs) => Some(vs.clone()),
            Representation::Halfspaces(rows) => {
                let n = self.dim;
                if n == 0 || rows.len() < n || binomial(rows.len(), n) > max_combinations as f64 {
                    return None;
                }
                let mut out: Vec<Vector> = Vec::new();
                for combo in rows.iter().combinations(n) {
                    let a = DMatrix::from_fn(n, n, |i, j| combo[i].normal[j]);
                    let b = DVector::from_iterator(n, combo.iter().map(|h| h.offset));
                    let Some(x) = a.lu().solve(&b) else { continue };
                    if !x.iter().all(|v| v.is_finite()) || !self.contains_loose(&x, 1e-9) {
                        continue;
                    }
                    if out.iter().all(|y| (y - &x).norm() > 1e-9 * (1.0 + x.norm())) {
                        out.push(x);
                    }
                }
                // an unbounded polyhedron has a recession direction; reject it
                let bounded = !out.is_empty()
                    && (0..n).all(|i| {
                        let mut e = DVector::zeros(n);
                        e[i] = 1.0;
                        let a = &out[0];
                        self.ray_extent(a, &e, PROBE_RADIUS) < PROBE_RADIUS
                            && self.ray_extent(a, &-e, PROBE_RADIUS) < PROBE_RADIUS
                    });
                bounded.then_some(out)
            }
            _ => None,
        }
    }

    fn contains_loose(&self, x: &Vector, tol: f64) -> bool {
        match &self.repr {
            Representation::Halfspaces(rows) => rows
                .iter()
                .all(|h| h.normal.dot(x) <= h.offset + tol * (1.0 + h.offset.abs() + h.normal.norm() * x.norm())),
            _ => self.contains(x),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bracket then bisect the largest `s <= cap` with `pred(s)`; assumes
/// `pred(0)` and monotonicity.
pub fn bisect_extent(pred: impl Fn(f64) -> bool, cap: f64) -> f64 {
    let s0 = 1.0f64.min(cap);
    let (mut lo, mut hi);
    if pred(s0) {
        lo = s0;
        hi = 2.0 * s0;
        loop {
            if hi >= cap {
                if pred(cap) {
                    return cap;
                }
                hi = cap;
                break;
            }
            if !pred(hi) {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    } else {
        hi = s0;
        lo = 0.5 * s0;
        while !pred(lo) {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-15 * s0 {
                return 0.0;
            }
        }
    }
    while hi - lo > EXTENT_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn hull_contains(vs: &[Vector], x: &Vector) -> bool {
    let n = x.len();
    let k = vs.len();
    let mut lp = LinearProgram::feasibility(k);
    lp.nonnegative();
    let scale = 1.0 + x.amax() + vs.iter().map(|v| v.amax()).fold(0.0, f64::max);
    for i in 0..n {
        lp.add_row(vs.iter().map(|v| v[i] / scale).collect(), Relation::Eq, x[i] / scale);
    }
    lp.add_row(vec![1.0; k], Relation::Eq, 1.0);
    matches!(lp.solve(), LpOutcome::Optimal(_))
}

fn vertex_ray_extent(vs: &[Vector], anchor: &Vector, d: &Vector, cap: f64) -> f64 {
    let n = anchor.len();
    let k = vs.len();
    // variables: lambda_1..k, s
    let mut obj = vec![0.0; k + 1];
    obj[k] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.nonnegative();
    lp.set_bounds(k, 0.0, cap);
    for i in 0..n {
        let mut row: Vec<f64> = vs.iter().map(|v| v[i]).collect();
        row.push(-d[i]);
        lp.add_row(row, Relation::Eq, anchor[i]);
    }
    let mut ones = vec![1.0; k];
    ones.push(0.0);
    lp.add_row(ones, Relation::Eq, 1.0);
    match lp.solve() {
        LpOutcome::Optimal(s) => s.value.clamp(0.0, cap),
        _ => 0.0,
    }
}

/// Indices of rows that hold with equality on the whole polyhedron.
pub fn implicit_equalities(dim: usize, rows: &[Halfspace]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, h) in rows.iter().enumerate() {
        let mut lp = LinearProgram::maximize((-&h.normal).iter().copied().collect());
        for r in rows {
            lp.add_row(r.normal.iter().copied().collect(), Relation::Le, r.offset);
        }
        match lp.solve() {
            LpOutcome::Optimal(s) => {
                let min = -s.value;
                if min >= h.offset - 1e-9 * (1.0 + h.offset.abs()) {
                    out.push(i);
                }
            }
            LpOutcome::Infeasible { .. } => {
                return Err(Error::EmptySet("halfspace system is infeasible".into()))
            }
            _ => {}
        }
        let _ = dim;
    }
    Ok(out)
}

/// A point in the relative interior of `{x : rows}` (Chebyshev-style,
/// ignoring implicit equalities and capping the radius at 1).
pub fn relative_interior_point(dim: usize, rows: &[Halfspace]) -> Result<Vector> {
    if rows.is_empty() {
        return Ok(DVector::zeros(dim));
    }
    let eq = implicit_equalities(dim, rows)?;
    let mut obj = vec![0.0; dim + 1];
    obj[dim] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.set_bounds(dim, 0.0, 1.0);
    for (i, h) in rows.iter().enumerate() {
        let mut row: Vec<f64> = h.normal.iter().copied().collect();
        if eq.contains(&i) {
            row.push(0.0);
            lp.add_row(row, Relation::Eq, h.offset);
        } else {
            row.push(h.normal.norm());
            lp.add_row(row, Relation::Le, h.offset);
        }
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => Ok(DVector::from_column_slice(&s.x[..dim])),
        _ => Err(Error::EmptySet("halfspace system is infeasible".into())),
    }
}
