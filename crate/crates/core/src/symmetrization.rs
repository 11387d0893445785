//! Sublevel sets `S_A = {x in S : f(x) <= A}` and their symmetric cores.
//!
//! The core is taken as `S_A ∩ (2 x0 - S_A)`, which is convex, symmetric
//! about `x0` and (when `x0` is in the intrinsic core of `S_A`) has the same
//! linear span as `S_A`. The pointwise definition with a per-point scale
//! `alpha` is kept as [`literal_ca_member`] for comparison.

use crate::convex_geometry::{in_icr, span_of_difference, ConvexSet, Gauge, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;

/// Residual allowed when comparing the spans of `S_A` and `C_A`.
pub const SPAN_TOL: f64 = 1e-8;

/// Probe directions used by the intrinsic-core test.
const ICR_PROBES: usize = 16;

/// `{x in domain : f(x) <= level}`; fails if no probed point of the domain
/// reaches the level.
pub fn sublevel_set(f: &ScalarFunction, domain: &ConvexSet, level: f64) -> Result<ConvexSet> {
    let s = ConvexSet::sublevel(f.clone(), level, domain.clone())?;
    s.anchor()?;
    Ok(s)
}

/// `S_A ∩ (2 x0 - S_A)`, centred at `x0`.
pub fn symmetric_core(s_a: &ConvexSet, x0: &Vector) -> Result<ConvexSet> {
    if x0.len() != s_a.dim() {
        return Err(Error::DimensionMismatch {
            expected: s_a.dim(),
            got: x0.len(),
        });
    }
    if !s_a.contains(x0) {
        return Err(Error::NotAMember("core centre".into()));
    }
    s_a.symmetric_part(x0)
}

/// `2^-j` for `j = 0..=20`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=20).map(|j| 0.5f64.powi(j)).collect()
}

/// Pointwise test: some `alpha` in the grid has `x0 ± alpha (x - x0)` in `S_A`.
pub fn literal_ca_member(s_a: &ConvexSet, x0: &Vector, x: &Vector, alpha_grid: &[f64]) -> bool {
    if !s_a.contains(x) {
        return false;
    }
    let d = x - x0;
    alpha_grid
        .iter()
        .any(|&a| s_a.contains(&(x0 + &d * a)) && s_a.contains(&(x0 - &d * a)))
}

/// `S_A`, its symmetric core `C_A` about `x0`, and the data that built them.
#[derive(Clone, Debug)]
pub struct SublevelCore {
    pub s_a: ConvexSet,
    pub c_a: ConvexSet,
    pub x0: Vector,
    pub level: f64,
    pub source: ScalarFunction,
    pub domain: ConvexSet,
}

impl SublevelCore {
    /// Build the core of `f` on `domain` about `x0`. The level defaults to
    /// `f(x0) + 1`.
    pub fn build(f: &ScalarFunction, domain: &ConvexSet, x0: &Vector, level: Option<f64>) -> Result<Self> {
        if !domain.contains(x0) {
            return Err(Error::NotAMember("x0 outside the domain".into()));
        }
        let fx0 = f.value(x0)?;
        let level = level.unwrap_or(fx0 + 1.0);
        if fx0 > level {
            return Err(Error::InvalidArgument(format!("level {level} is below f(x0) = {fx0}")));
        }
        let s_a = ConvexSet::sublevel(f.clone(), level, domain.clone())?.with_center(x0.clone())?;
        let c_a = symmetric_core(&s_a, x0)?;
        Ok(Self {
            s_a,
            c_a,
            x0: x0.clone(),
            level,
            source: f.clone(),
            domain: domain.clone(),
        })
    }

    /// `span(C_A - C_A) = span(S_A - S_A)`.
    pub fn verify_span_equality(&self) -> bool {
        let (Ok(a), Ok(c)) = (
            span_of_difference(&self.s_a, &self.x0),
            span_of_difference(&self.c_a, &self.x0),
        ) else {
            return false;
        };
        a.dim() == c.dim() && a.is_subspace_of(&c, SPAN_TOL) && c.is_subspace_of(&a, SPAN_TOL)
    }

    /// `x0 in icr S_A`.
    pub fn verify_icr_membership(&self) -> bool {
        in_icr(&self.s_a, &self.x0, ICR_PROBES).unwrap_or(false)
    }

    /// Minkowski gauge of `C_A` about `x0`.
    pub fn gauge(&self) -> Result<Gauge> {
        Gauge::new(self.c_a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::{check_symmetry, vector};

    fn square() -> ScalarFunction {
        ScalarFunction::from_expr("x1^2", 1).unwrap()
    }

    #[test]
    fn core_of_square_on_interval() {
        let dom = ConvexSet::interval(-1.0, 2.0).unwrap();
        let core = SublevelCore::build(&square(), &dom, &vector(&[0.0]), Some(1.0)).unwrap();
        for i in 0..=300 {
            let x = -1.5 + i as f64 * 0.01;
            assert_eq!(core.c_a.contains(&vector(&[x])), x.abs() <= 1.0, "x = {x}");
        }
        assert!(core.verify_span_equality());
        assert!(core.verify_icr_membership());
        assert!(check_symmetry(&core.c_a, &core.x0, 200).unwrap());
        let g = core.gauge().unwrap();
        assert!((g.eval(&vector(&[0.5])).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn reflection_intersection_versus_literal() {
        let s = ConvexSet::interval(-1.0, 2.0).unwrap();
        let x0 = vector(&[0.0]);
        let c = symmetric_core(&s, &x0).unwrap();
        assert!(c.contains(&vector(&[-1.0])) && c.contains(&vector(&[1.0])));
        assert!(!c.contains(&vector(&[1.5])));
        let grid = default_alpha_grid();
        assert!(literal_ca_member(&s, &x0, &vector(&[2.0]), &grid));
        assert!(literal_ca_member(&s, &x0, &x0, &grid));
        assert!(!c.contains(&vector(&[2.0])));
    }

    #[test]
    fn degenerate_level() {
        let dom = ConvexSet::interval(-1.0, 1.0).unwrap();
        let core = SublevelCore::build(&square(), &dom, &vector(&[0.0]), Some(0.0)).unwrap();
        assert!(core.verify_icr_membership());
        assert!(core.verify_span_equality());
    }

    #[test]
    fn rejects_low_level() {
        let dom = ConvexSet::interval(-1.0, 1.0).unwrap();
        assert!(SublevelCore::build(&square(), &dom, &vector(&[0.5]), Some(0.1)).is_err());
        assert!(sublevel_set(&square(), &ConvexSet::interval(2.0, 3.0).unwrap(), 1.0).is_err());
    }
}
