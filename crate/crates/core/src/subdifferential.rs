//! Directional derivatives, gauge-relative Clarke subdifferentials, Fermat's
//! rule and the Lebourg mean-value point.
//!
//! Subgradients are functionals on the quotient `span / Ker mu`; they are
//! stored as vectors in the orthogonal complement of the kernel inside the
//! span, paired with directions by the Euclidean dot product. Support values
//! are `f'(x; Qv)` for convex `f` and `f°(x; Qv)` otherwise, `Q` being the
//! orthogonal projection onto that complement.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex_geometry::{Gauge, Subspace, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::sampling;

/// Halvings in the difference-quotient ladder.
pub const LADDER_STEPS: usize = 40;
/// Relative tolerance of the max-formula attainment check.
pub const ATTAIN_TOL: f64 = 1e-5;
/// Relative slack when comparing `<zeta, v>` with a support value.
pub const SUPPORT_TOL: f64 = 1e-6;
/// Bound on `|<zeta, k>|` for kernel vectors `k`.
pub const KERNEL_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 42;
/// Minimum number of support constraints per extraction.
pub const MIN_DIRS: usize = 64;

const FERMAT_SAMPLES: usize = 256;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn check_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// A one-sided derivative estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quotient {
    pub value: f64,
    /// Extrapolation spread plus rounding noise at the chosen step.
    pub error: f64,
    /// The ladder did not settle (only expected for non-convex `f`).
    pub oscillating: bool,
}

/// `f'(x; v) = lim_{t -> 0+} (f(x + t v) - f(x)) / t`.
pub fn dir_deriv(f: &ScalarFunction, x: &Vector, v: &Vector) -> Result<f64> {
    Ok(dir_deriv_estimate(f, x, v)?.value)
}

/// Ladder `t_k = t0 2^-k` with first-order Richardson extrapolation; the
/// step with the smallest spread-plus-noise is kept. For convex `f` the
/// result is also capped by the monotone quotients.
pub fn dir_deriv_estimate(f: &ScalarFunction, x: &Vector, v: &Vector) -> Result<Quotient> {
    check_dim(f.dim(), v.len())?;
    check_finite(v, "direction")?;
    let fx = f.value(x)?;
    let nv = v.norm();
    if nv == 0.0 {
        return Ok(Quotient {
            value: 0.0,
            error: 0.0,
            oscillating: false,
        });
    }
    let u = v / nv;
    let mut t = 1.0;
    let mut first = None;
    for _ in 0..=60 {
        if let Some(val) = f.try_value(&(x + &u * t)) {
            first = Some(val);
            break;
        }
        t *= 0.5;
    }
    let first = first.ok_or(Error::NoFeasibleStep)?;
    let mut q = Vec::with_capacity(LADDER_STEPS + 1);
    let mut steps = Vec::with_capacity(LADDER_STEPS + 1);
    q.push((first - fx) / t);
    steps.push(t);
    for _ in 0..LADDER_STEPS {
        t *= 0.5;
        let ft = f.try_value(&(x + &u * t)).ok_or(Error::NoFeasibleStep)?;
        q.push((ft - fx) / t);
        steps.push(t);
    }
    let xn = x.norm();
    let noise = |k: usize| 4.0 * f64::EPSILON * (fx.abs() + q[k].abs() * (1.0 + xn) + 1e-300) / steps[k];
    let r: Vec<f64> = (0..LADDER_STEPS).map(|k| 2.0 * q[k + 1] - q[k]).collect();
    let mut best = (f64::INFINITY, 0usize);
    for k in 1..LADDER_STEPS {
        let e = (r[k] - r[k - 1]).abs() + noise(k + 1);
        if e < best.0 {
            best = (e, k);
        }
    }
    let (error, k) = best;
    let mut value = r[k];
    if f.is_convex() {
        let cap = q[..=k + 1].iter().cloned().fold(f64::INFINITY, f64::min);
        value = value.min(cap);
    }
    if !value.is_finite() {
        return Err(Error::NoConvergence("directional derivative is not finite".into()));
    }
    Ok(Quotient {
        value: value * nv,
        error: error * nv,
        oscillating: error > 1e-6 * (1.0 + value.abs()),
    })
}

/// Shell sampling parameters for [`gen_dir_deriv_with`].
#[derive(Clone, Debug)]
pub struct ShellConfig {
    /// Outermost gauge radius.
    pub r0: f64,
    /// Shells `r0 2^-j`, `j < shells`.
    pub shells: usize,
    /// Base points per shell.
    pub probes: usize,
    /// Only the innermost `tail` shells enter the maximum.
    pub tail: usize,
    pub seed: u64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        Self {
            r0: 1e-2,
            shells: 20,
            probes: 32,
            tail: 4,
            seed: DEFAULT_SEED,
        }
    }
}

/// `f°(x; v)`: limsup of `(f(y + t v) - f(y)) / t` over `mu(y - x) -> 0`,
/// `t -> 0+`, with `probes` base points per shell.
pub fn gen_dir_deriv(f: &ScalarFunction, g: &Gauge, x: &Vector, v: &Vector, probes: usize) -> Result<f64> {
    gen_dir_deriv_with(
        f,
        g,
        x,
        v,
        &ShellConfig {
            probes,
            ..ShellConfig::default()
        },
    )
}

pub fn gen_dir_deriv_with(f: &ScalarFunction, g: &Gauge, x: &Vector, v: &Vector, cfg: &ShellConfig) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), v.len())?;
    check_dim(g.dim(), v.len())?;
    check_finite(v, "direction")?;
    f.value(x).map_err(|_| Error::NeighborhoodInfeasible)?;
    let nv = v.norm();
    if nv == 0.0 {
        return Ok(0.0);
    }
    let u = v / nv;
    let (quot, ker) = (g.quotient(), g.kernel());
    let mut rng = sampling::rng(cfg.seed);
    let mut best = f64::NEG_INFINITY;
    for j in cfg.shells.saturating_sub(cfg.tail)..cfg.shells {
        let r = cfg.r0 * 0.5f64.powi(j as i32);
        for p in 0..cfg.probes.max(1) {
            let mut offset = DVector::zeros(x.len());
            if p > 0 {
                if quot.dim() > 0 {
                    let w = sampling::unit_in(&mut rng, quot);
                    let m = g.eval(&w)?;
                    if m.is_finite() && m > 0.0 {
                        offset += w * (r / m);
                    }
                }
                if ker.dim() > 0 {
                    let s = sampling::uniform(&mut rng, 0.0, 1.0);
                    offset += sampling::unit_in(&mut rng, ker) * (r * s);
                }
            }
            let y = x + offset;
            let (Some(fy), Some(fyt)) = (f.try_value(&y), f.try_value(&(&y + &u * r))) else {
                continue;
            };
            best = best.max((fyt - fy) / r);
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::NeighborhoodInfeasible);
    }
    Ok(best * nv)
}

/// Support value of the subdifferential at `x` in direction `v`, with an
/// error estimate.
pub fn support_estimate(f: &ScalarFunction, g: &Gauge, x: &Vector, v: &Vector) -> Result<(f64, f64)> {
    check_dim(g.dim(), v.len())?;
    let w = g.quotient().project(v);
    if f.is_convex() {
        let q = dir_deriv_estimate(f, x, &w)?;
        Ok((q.value, q.error))
    } else {
        let h = gen_dir_deriv_with(f, g, x, &w, &ShellConfig::default())?;
        Ok((h, SUPPORT_TOL * (1.0 + h.abs())))
    }
}

/// `h(v) = max { <zeta, v> : zeta in the subdifferential at x }`.
pub fn support(f: &ScalarFunction, g: &Gauge, x: &Vector, v: &Vector) -> Result<f64> {
    Ok(support_estimate(f, g, x, v)?.0)
}

/// Loosening of an LP support constraint.
fn slack(h: f64, err: f64) -> f64 {
    1e-9 * h.abs() + 1e-12 + 4.0 * err
}

/// Allowed excess of `<zeta, v>` over `h(v)` in membership tests.
fn member_tol(h: f64, err: f64) -> f64 {
    SUPPORT_TOL * (1.0 + h.abs()) + 4.0 * err
}

/// `±` basis directions of `space` followed by `extra` random unit directions.
pub fn probe_directions(space: &Subspace, extra: usize, seed: u64) -> Vec<Vector> {
    let mut out = Vec::with_capacity(2 * space.dim() + extra);
    for b in space.basis_vectors() {
        out.push(b.clone());
        out.push(-b);
    }
    if space.dim() > 0 {
        let mut rng = sampling::rng(seed);
        for _ in 0..extra {
            out.push(sampling::unit_in(&mut rng, space));
        }
    }
    out
}

/// Whether `zeta` is in the subdifferential: it must vanish on the kernel
/// and satisfy `<zeta, v> <= h(v)` on probed quotient directions.
pub fn is_subgradient(f: &ScalarFunction, g: &Gauge, x: &Vector, zeta: &Vector, dirs: usize) -> Result<bool> {
    check_dim(g.dim(), zeta.len())?;
    check_finite(zeta, "subgradient")?;
    if !g.span().contains(zeta, 1e-9) {
        return Ok(false);
    }
    let zn = zeta.norm();
    if g.kernel().basis_vectors().iter().any(|k| zeta.dot(k).abs() > KERNEL_TOL * (1.0 + zn)) {
        return Ok(false);
    }
    let directions = probe_directions(g.quotient(), dirs, DEFAULT_SEED);
    let verdicts = directions
        .par_iter()
        .map(|d| support_estimate(f, g, x, d).map(|(h, e)| zeta.dot(d) <= h + member_tol(h, e)))
        .collect::<Result<Vec<bool>>>()?;
    Ok(verdicts.into_iter().all(|b| b))
}

/// Sampled support constraints for the subdifferential at one point, in
/// quotient coordinates: box bounds from `±` basis directions plus rows for
/// random directions.
struct SupportModel {
    quotient: Subspace,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
}

impl SupportModel {
    fn build(f: &ScalarFunction, g: &Gauge, x: &Vector, dirs: usize) -> Result<Self> {
        check_dim(f.dim(), x.len())?;
        let quotient = g.quotient().clone();
        let k = quotient.dim();
        if k == 0 {
            return Err(Error::DegenerateGauge);
        }
        let basis = quotient.basis_vectors();
        let bounds = basis
            .par_iter()
            .map(|b| -> Result<(f64, f64)> {
                let (hp, ep) = support_estimate(f, g, x, b)?;
                let (hm, em) = support_estimate(f, g, x, &-b)?;
                Ok((-hm - slack(hm, em), hp + slack(hp, ep)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lower = Vec::with_capacity(k);
        let mut upper = Vec::with_capacity(k);
        for (i, (lo, hi)) in bounds.into_iter().enumerate() {
            if lo > hi {
                return Err(Error::Infeasible { rows: vec![2 * i, 2 * i + 1] });
            }
            lower.push(lo);
            upper.push(hi);
        }
        let extra = dirs.saturating_sub(2 * k);
        let mut rng = sampling::rng(DEFAULT_SEED ^ 0xD1);
        let coords: Vec<Vector> = (0..extra).map(|_| sampling::unit_vector(&mut rng, k)).collect();
        let rows = coords
            .par_iter()
            .map(|c| {
                let d = quotient.from_coords(c);
                let (h, e) = support_estimate(f, g, x, &d)?;
                Ok((c.iter().copied().collect(), h + slack(h, e)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            quotient,
            lower,
            upper,
            rows,
        })
    }

    /// Maximise `<zeta, d>` and certify that the optimum reaches `h(d)`.
    fn solve(&self, f: &ScalarFunction, g: &Gauge, x: &Vector, d: &Vector) -> Result<(Vector, f64)> {
        let k = self.quotient.dim();
        let c: Vec<f64> = self.quotient.coords(d).iter().copied().collect();
        let (hp, ep) = support_estimate(f, g, x, d)?;
        let (hm, em) = support_estimate(f, g, x, &-d)?;
        let mut lp = LinearProgram::maximize(c.clone());
        for j in 0..k {
            lp.set_bounds(j, self.lower[j], self.upper[j]);
        }
        for (a, b) in &self.rows {
            lp.add_row(a.clone(), Relation::Le, *b);
        }
        if c.iter().any(|&a| a != 0.0) {
            lp.add_row(c.clone(), Relation::Le, hp + slack(hp, ep));
            lp.add_row(c.iter().map(|a| -a).collect(), Relation::Le, hm + slack(hm, em));
        }
        let offset = 2 * k;
        let sol = match lp.solve() {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible { rows } => {
                return Err(Error::Infeasible {
                    rows: rows.into_iter().map(|r| r + offset).collect(),
                })
            }
            LpOutcome::Unbounded => return Err(Error::NoConvergence("support LP unbounded".into())),
            LpOutcome::IterationLimit => return Err(Error::NoConvergence("support LP iteration limit".into())),
        };
        if (sol.value - hp).abs() > ATTAIN_TOL * hp.abs().max(1.0) {
            return Err(Error::NotAttained {
                support: hp,
                optimum: sol.value,
            });
        }
        let zeta = self.quotient.from_coords(&DVector::from_vec(sol.x));
        Ok((zeta, hp))
    }
}

/// A subgradient maximising `<zeta, objective_dir>`; `dirs` is the total
/// number of support constraints (`±` basis directions count towards it).
pub fn extract_subgradient(
    f: &ScalarFunction,
    g: &Gauge,
    x: &Vector,
    objective_dir: &Vector,
    dirs: usize,
) -> Result<Vector> {
    check_dim(g.dim(), objective_dir.len())?;
    check_finite(objective_dir, "objective")?;
    let model = SupportModel::build(f, g, x, dirs)?;
    Ok(model.solve(f, g, x, objective_dir)?.0)
}

/// Default constraint count: `max(2 dim, 64)`.
pub fn default_dirs(dim: usize) -> usize {
    (2 * dim).max(MIN_DIRS)
}

/// Support values and extracted extreme subgradients at one point.
#[derive(Clone, Debug)]
pub struct SupportSet {
    pub base_point: Vector,
    pub directions: Vec<Vector>,
    pub support_values: Vec<f64>,
    pub subgradients: Vec<Vector>,
}

#[derive(Serialize)]
struct SupportSetDoc {
    base_point: Vec<f64>,
    directions: Vec<Vec<f64>>,
    support_values: Vec<f64>,
    subgradients: Vec<Vec<f64>>,
}

impl SupportSet {
    /// Largest `<zeta_i, v_j> - h(v_j)` over stored pairs.
    pub fn max_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for z in &self.subgradients {
            for (d, h) in self.directions.iter().zip(&self.support_values) {
                worst = worst.max(z.dot(d) - h);
            }
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = |x: &Vector| x.iter().copied().collect::<Vec<f64>>();
        serde_json::to_value(SupportSetDoc {
            base_point: v(&self.base_point),
            directions: self.directions.iter().map(v).collect(),
            support_values: self.support_values.clone(),
            subgradients: self.subgradients.iter().map(v).collect(),
        })
        .expect("plain numeric document")
    }
}

/// Extract subgradients for `n_objectives` spread directions (`±` quotient
/// basis first, then random).
pub fn subdifferential_hull(f: &ScalarFunction, g: &Gauge, x: &Vector, n_objectives: usize) -> Result<SupportSet> {
    let model = SupportModel::build(f, g, x, default_dirs(g.dim()))?;
    let mut objectives = probe_directions(g.quotient(), n_objectives, DEFAULT_SEED ^ 0x0B);
    objectives.truncate(n_objectives.max(1));
    let solved = objectives
        .par_iter()
        .map(|d| model.solve(f, g, x, d))
        .collect::<Result<Vec<_>>>()?;
    let (subgradients, support_values) = solved.into_iter().unzip();
    Ok(SupportSet {
        base_point: x.clone(),
        directions: objectives,
        support_values,
        subgradients,
    })
}

/// Fermat's rule: if `u` is a sampled extremum of `f` on
/// `u + eps (C - x0)` (restricted to the quotient directions of the
/// gauge), then `0` is a subgradient at `u`.
pub fn fermat_check(f: &ScalarFunction, g: &Gauge, u: &Vector, eps: f64) -> Result<bool> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    check_dim(g.dim(), u.len())?;
    let fu = f.value(u)?;
    let x0 = g.center();
    let mut rng = sampling::rng(DEFAULT_SEED);
    let members = g.set().sample_members(x0, g.quotient(), FERMAT_SAMPLES, &mut rng);
    let tol = 1e-12 * (1.0 + fu.abs());
    let (mut is_min, mut is_max) = (true, true);
    for s in members {
        let y = u + (s - x0) * eps;
        let fy = f.value(&y)?;
        is_min &= fy >= fu - tol;
        is_max &= fy <= fu + tol;
    }
    if !is_min && !is_max {
        return Err(Error::NotExtremal);
    }
    let zero = DVector::zeros(u.len());
    is_subgradient(f, g, u, &zero, default_dirs(g.dim()))
}

/// A mean-value point `z = alpha x + (1 - alpha) y` and a subgradient at `z`
/// with `<zeta, y - x> = f(y) - f(x)`.
#[derive(Clone, Debug)]
pub struct LebourgPoint {
    pub z: Vector,
    pub zeta: Vector,
    pub alpha: f64,
    /// `|<zeta, y - x> - (f(y) - f(x))|`.
    pub residual: f64,
    /// `mu(y - x) = 0`: no interior point is needed.
    pub kernel_case: bool,
}

const LEBOURG_NODES: usize = 1024;

pub fn lebourg_point(f: &ScalarFunction, g: &Gauge, x: &Vector, y: &Vector) -> Result<LebourgPoint> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), y.len())?;
    let (fx, fy) = (f.value(x)?, f.value(y)?);
    let d = y - x;
    let delta = fy - fx;
    let mu = g.eval(&d)?;
    if mu <= 1e-12 {
        if delta.abs() > 1e-9 {
            return Err(Error::KernelViolation {
                distance: mu,
                gap: delta.abs(),
            });
        }
        return Ok(LebourgPoint {
            z: (x + y) * 0.5,
            zeta: DVector::zeros(x.len()),
            alpha: 0.5,
            residual: delta.abs(),
            kernel_case: true,
        });
    }
    let tol = 1e-6 * (1.0 + delta.abs());
    let at = |s: f64| x + &d * s;
    // right and left slopes of s -> f(x + s d)
    let slopes = |s: f64| -> Result<(f64, f64)> {
        let z = at(s);
        Ok((-support(f, g, &z, &-&d)?, support(f, g, &z, &d)?))
    };
    let brackets = |(lo, hi): (f64, f64)| lo - tol <= delta && delta <= hi + tol;

    let s = if brackets(slopes(0.5)?) {
        0.5
    } else if f.is_convex() {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slopes(mid)?.1 < delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    } else {
        let nodes: Vec<f64> = (0..LEBOURG_NODES).map(|i| (i as f64 + 0.5) / LEBOURG_NODES as f64).collect();
        let sl = nodes.par_iter().map(|&s| slopes(s)).collect::<Result<Vec<_>>>()?;
        if let Some(i) = sl.iter().position(|&b| brackets(b)) {
            nodes[i]
        } else {
            let mid = |b: (f64, f64)| 0.5 * (b.0 + b.1) - delta;
            let i = (0..LEBOURG_NODES - 1)
                .find(|&i| mid(sl[i]) * mid(sl[i + 1]) <= 0.0)
                .ok_or_else(|| Error::NoConvergence("no sign change of the slope on the segment".into()))?;
            let (mut lo, mut hi) = (nodes[i], nodes[i + 1]);
            let sign_lo = mid(sl[i]).signum();
            for _ in 0..50 {
                let m = 0.5 * (lo + hi);
                if mid(slopes(m)?).signum() == sign_lo {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let z = at(s);
    let model = SupportModel::build(f, g, &z, default_dirs(g.dim()))?;
    let (zp, _) = model.solve(f, g, &z, &d)?;
    let (zm, _) = model.solve(f, g, &z, &-&d)?;
    let (ap, am) = (zp.dot(&d), zm.dot(&d));
    let lambda = if ap - am > 1e-15 * (1.0 + ap.abs()) {
        ((delta - am) / (ap - am)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let zeta = &zp * lambda + &zm * (1.0 - lambda);
    let residual = (zeta.dot(&d) - delta).abs();
    if residual > tol {
        return Err(Error::NoConvergence(format!("mean-value residual {residual:e}")));
    }
    Ok(LebourgPoint {
        z,
        zeta,
        alpha: 1.0 - s,
        residual,
        kernel_case: false,
    })
}
