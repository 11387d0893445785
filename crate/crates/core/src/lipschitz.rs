//! Gauge-relative Lipschitz constants: the bound `M (1 + eps) / (1 - eps)`
//! on `eps (C - p) + p` for convex functions, sampled empirical constants,
//! and local witness balls.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex_geometry::{check_symmetry, in_icr, span_of_difference, ConvexSet, Gauge, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::sampling;
use crate::symmetrization::SublevelCore;

pub use crate::counterexamples::counterexample_suite;

pub const DEFAULT_PAIRS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
/// Gauge distance below which a pair counts as a kernel pair.
pub const KERNEL_DISTANCE: f64 = 1e-12;
/// Value gap that makes a kernel pair a violation.
pub const KERNEL_GAP: f64 = 1e-9;
/// Sup estimates above this are treated as unbounded.
pub const UNBOUNDED_M: f64 = 1e12;

const SYMMETRY_SAMPLES: usize = 256;
const MAX_VERTEX_COMBINATIONS: usize = 50_000;

#[derive(Clone, Debug)]
pub struct LipschitzConfig {
    /// Extra members sampled for `M` (default `10 dim^2`).
    pub m_samples: Option<usize>,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        Self {
            m_samples: None,
            pairs: DEFAULT_PAIRS,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LipschitzCertificate {
    pub gauge: Gauge,
    /// `eps (C - p) + p`.
    pub region: ConvexSet,
    pub theoretical_l: f64,
    pub empirical_l: f64,
    pub epsilon: f64,
    /// `sup_C f - f(p)` (sampled; exact on polytopes for convex `f`).
    pub m: f64,
    pub sample_pairs: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct CertificateDoc {
    #[serde(rename = "theoretical_L")]
    theoretical_l: Option<f64>,
    #[serde(rename = "empirical_L")]
    empirical_l: f64,
    #[serde(rename = "M")]
    m: f64,
    epsilon: f64,
    pairs: usize,
    seed: u64,
}

impl LipschitzCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CertificateDoc {
            theoretical_l: self.theoretical_l.is_finite().then_some(self.theoretical_l),
            empirical_l: self.empirical_l,
            m: self.m,
            epsilon: self.epsilon,
            pairs: self.sample_pairs,
            seed: self.seed,
        })
        .expect("plain numeric document")
    }

    /// `empirical_L <= theoretical_L (1 + 1e-6)`.
    pub fn holds(&self) -> bool {
        !self.theoretical_l.is_finite() || self.empirical_l <= self.theoretical_l * (1.0 + 1e-6) + 1e-12
    }
}

/// `M (1 + eps) / (1 - eps)`.
pub fn bound(m: f64, eps: f64) -> f64 {
    m * (1.0 + eps) / (1.0 - eps)
}

/// `sup_{x in C} f(x) - f(p)` over vertices (when available) and sampled
/// members.
pub fn sup_gap(f: &ScalarFunction, c: &ConvexSet, p: &Vector, samples: usize, seed: u64) -> Result<f64> {
    let fp = f.value(p)?;
    let mut pts = c.polytope_vertices(MAX_VERTEX_COMBINATIONS).unwrap_or_default();
    let space = span_of_difference(c, p)?;
    let mut rng = sampling::rng(seed);
    pts.extend(c.sample_members(p, &space, samples, &mut rng));
    let vals = pts
        .par_iter()
        .map(|x| f.value(x).map_err(|_| Error::Unbounded(f64::INFINITY)))
        .collect::<Result<Vec<f64>>>()?;
    let m = vals.iter().fold(0.0f64, |a, &v| a.max(v - fp));
    if !m.is_finite() || m > UNBOUNDED_M {
        return Err(Error::Unbounded(m));
    }
    Ok(m)
}

/// Certificate for convex `f` on `eps (C - p) + p`, `C` symmetric about `p`.
pub fn theoretical_constant(f: &ScalarFunction, c: &ConvexSet, p: &Vector, eps: f64) -> Result<LipschitzCertificate> {
    theoretical_constant_with(f, c, p, eps, &LipschitzConfig::default())
}

pub fn theoretical_constant_with(
    f: &ScalarFunction,
    c: &ConvexSet,
    p: &Vector,
    eps: f64,
    cfg: &LipschitzConfig,
) -> Result<LipschitzCertificate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside (0, 1)")));
    }
    if !check_symmetry(c, p, SYMMETRY_SAMPLES)? {
        return Err(Error::AsymmetricSet);
    }
    let n = c.dim();
    let m = sup_gap(f, c, p, cfg.m_samples.unwrap_or(10 * n * n), cfg.seed)?;
    let centred = c.clone().with_center(p.clone())?;
    let gauge = Gauge::new(centred.clone())?;
    let region = centred.scaled_about(p, eps)?;
    let empirical = empirical_constant(f, &gauge, &region, cfg.pairs, cfg.seed)?;
    Ok(LipschitzCertificate {
        gauge,
        region,
        theoretical_l: bound(m, eps),
        empirical_l: empirical,
        epsilon: eps,
        m,
        sample_pairs: cfg.pairs,
        seed: cfg.seed,
    })
}

/// `max |f(u) - f(v)| / mu(u - v)` over `pairs` sampled pairs of `region`
/// (an eighth of them displaced along the gauge kernel).
pub fn empirical_constant(f: &ScalarFunction, g: &Gauge, region: &ConvexSet, pairs: usize, seed: u64) -> Result<f64> {
    let anchor = region.anchor()?;
    let space = span_of_difference(region, &anchor)?;
    let mut rng = sampling::rng(seed);
    let pts = region.sample_members(&anchor, &space, 2 * pairs, &mut rng);
    let mut list: Vec<(Vector, Vector)> = Vec::with_capacity(pairs);
    let ker = g.kernel();
    let kernel_pairs = if ker.dim() > 0 { pairs / 8 } else { 0 };
    for i in 0..pairs - kernel_pairs.min(pairs) {
        list.push((pts[2 * i].clone(), pts[2 * i + 1].clone()));
    }
    let cap = region.probe_cap(&anchor);
    for i in 0..kernel_pairs.min(pairs) {
        let u = &pts[2 * i + 1];
        let k = sampling::unit_in(&mut rng, ker);
        let reach = region.ray_extent(u, &k, cap).min(1e6);
        let s = reach * sampling::uniform(&mut rng, 0.0, 1.0);
        list.push((u.clone(), u + k * s));
    }
    empirical_constant_on_pairs(f, g, &list)
}

/// `max |f(u) - f(v)| / mu(u - v)` over the given pairs; a pair at gauge
/// distance `<= 1e-12` with a value gap `> 1e-9` is a kernel violation.
pub fn empirical_constant_on_pairs(f: &ScalarFunction, g: &Gauge, pairs: &[(Vector, Vector)]) -> Result<f64> {
    let ratios = pairs
        .par_iter()
        .map(|(u, v)| -> Result<f64> {
            let gap = (f.value(u)? - f.value(v)?).abs();
            let d = g.eval(&(u - v))?;
            if d <= KERNEL_DISTANCE {
                if gap > KERNEL_GAP {
                    return Err(Error::KernelViolation { distance: d, gap });
                }
                return Ok(0.0);
            }
            Ok(if d.is_finite() { gap / d } else { 0.0 })
        })
        .collect::<Vec<_>>();
    let mut best = 0.0f64;
    for r in ratios {
        best = best.max(r?);
    }
    Ok(best)
}

/// A ball `x + lambda (C - p)` on which `f` is `L`-Lipschitz w.r.t. the
/// gauge of `C`.
#[derive(Clone, Debug)]
pub struct LocalWitness {
    pub x: Vector,
    pub lambda: f64,
    pub l: f64,
    /// Step with `x + t (x - p)` in the domain.
    pub t: f64,
    /// `sup f - f(x)` over `x + t/(1+t) (C - p)`.
    pub m: f64,
}

impl LocalWitness {
    /// The witness ball as a set centred at `x`.
    pub fn ball(&self, core: &SublevelCore) -> Result<ConvexSet> {
        let (c, p, x, lam) = (core.c_a.clone(), core.x0.clone(), self.x.clone(), self.lambda);
        let radius = c.bounding_radius().map(|r| lam * (r + p.norm()) + x.norm()).unwrap_or(f64::INFINITY);
        let hint = c.probe_subspace()?;
        ConvexSet::oracle(c.dim(), radius, "witness ball", move |z: &Vector| {
            c.contains(&(&p + (z - &x) / lam))
        })?
        .with_span_hint(hint)
        .with_center(self.x.clone())
    }
}

/// Witness radius at `x` following the translation argument: find `t` with
/// `y = x + t (x - p)` in the domain, so `x + t/(1+t) (C - p)` lies in the
/// domain, then apply the bound there with ratio `eps`.
pub fn local_witness(f: &ScalarFunction, core: &SublevelCore, x: &Vector, eps: f64) -> Result<LocalWitness> {
    local_witness_with(f, core, x, eps, &LipschitzConfig::default())
}

pub fn local_witness_with(
    f: &ScalarFunction,
    core: &SublevelCore,
    x: &Vector,
    eps: f64,
    cfg: &LipschitzConfig,
) -> Result<LocalWitness> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside (0, 1)")));
    }
    if !core.domain.contains(x) || !in_icr(&core.domain, x, 16)? || !f.in_domain(x) {
        return Err(Error::NotInIntrinsicCore);
    }
    let p = &core.x0;
    let d = x - p;
    let mut t = 1.0;
    while !(core.domain.contains(&(x + &d * t)) && f.in_domain(&(x + &d * t))) {
        t *= 0.5;
        if t < 1e-12 {
            return Err(Error::NotInIntrinsicCore);
        }
    }
    let shrink = t / (1.0 + t);
    let fx = f.value(x)?;
    let space = span_of_difference(&core.c_a, p)?;
    let n = x.len();
    let mut rng = sampling::rng(cfg.seed);
    let mut pts = core.c_a.sample_members(p, &space, cfg.m_samples.unwrap_or(10 * n * n).max(16), &mut rng);
    pts.push(p.clone());
    let mut m = 0.0f64;
    for s in pts {
        let y = x + (s - p) * shrink;
        let v = f.value(&y).map_err(|_| Error::Unbounded(f64::INFINITY))?;
        m = m.max(v - fx);
    }
    if !m.is_finite() || m > UNBOUNDED_M {
        return Err(Error::Unbounded(m));
    }
    Ok(LocalWitness {
        x: x.clone(),
        lambda: eps * shrink,
        l: bound(m, eps) / shrink,
        t,
        m,
    })
}
