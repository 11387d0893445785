//! Scalar functions on R^n with an optional convex domain.

use std::fmt;
use std::sync::Arc;

use crate::convex_geometry::{ConvexSet, Vector};
use crate::error::{Error, Result};
use crate::func_expr::{self, Expr};

pub type EvalFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// A real function of `dim` variables. `+inf` (or a point outside `domain`)
/// means "outside the domain".
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    dim: usize,
    eval: EvalFn,
    domain: Option<Arc<ConvexSet>>,
    convex: bool,
    lipschitz_hint: Option<f64>,
    expr: Option<Arc<Expr>>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("convex", &self.convex)
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(name: impl Into<String>, dim: usize, f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(f),
            domain: None,
            convex: false,
            lipschitz_hint: None,
            expr: None,
        }
    }

    /// Build from an expression string; convexity is inferred conservatively.
    pub fn from_expr(src: &str, dim: usize) -> Result<Self> {
        let e = Arc::new(func_expr::parse(src, dim)?);
        let convex = e.is_known_convex() && !e.contains_floor();
        let ev = e.clone();
        let mut f = Self::new(src.trim(), dim, move |x: &Vector| {
            ev.eval(x.as_slice()).unwrap_or(f64::INFINITY)
        });
        f.convex = convex;
        f.expr = Some(e);
        Ok(f)
    }

    pub fn with_domain(mut self, domain: ConvexSet) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_convex(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn domain(&self) -> Option<&ConvexSet> {
        self.domain.as_deref()
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_deref()
    }

    /// Raw evaluation: no domain check, `+inf` allowed.
    pub fn raw(&self, x: &Vector) -> f64 {
        (self.eval)(x)
    }

    /// Value at `x`, or `OutsideDomain` if `x` is not in the domain.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(d) = &self.domain {
            if !d.contains(x) {
                return Err(Error::OutsideDomain);
            }
        }
        let v = (self.eval)(x);
        if v.is_nan() {
            return Err(Error::NonFinite(format!("{} returned NaN", self.name)));
        }
        if v.is_infinite() {
            return Err(Error::OutsideDomain);
        }
        Ok(v)
    }

    pub fn try_value(&self, x: &Vector) -> Option<f64> {
        self.value(x).ok()
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        self.try_value(x).is_some()
    }

    pub fn negate(&self) -> Self {
        let a = self.clone();
        let mut f = Self::new(format!("-({})", self.name), self.dim, move |x: &Vector| -a.raw_or_inf(x));
        f.domain = self.domain.clone();
        f
    }

    /// Raw value with the domain enforced (`+inf` outside). Useful when
    /// composing functions.
    pub fn raw_or_inf(&self, x: &Vector) -> f64 {
        self.value(x).unwrap_or(f64::INFINITY)
    }

    pub fn sum(a: &Self, b: &Self) -> Self {
        let (fa, fb) = (a.clone(), b.clone());
        Self::new(format!("({}) + ({})", a.name, b.name), a.dim, move |x: &Vector| {
            combine(&fa, &fb, x, |p, q| p + q)
        })
        .with_convex(a.convex && b.convex)
    }

    pub fn product(a: &Self, b: &Self) -> Self {
        let (fa, fb) = (a.clone(), b.clone());
        Self::new(format!("({}) * ({})", a.name, b.name), a.dim, move |x: &Vector| {
            combine(&fa, &fb, x, |p, q| p * q)
        })
    }

    pub fn max_of(fs: &[Self]) -> Self {
        let parts: Vec<Self> = fs.to_vec();
        let name = format!("max({})", fs.iter().map(|f| f.name.clone()).collect::<Vec<_>>().join(", "));
        let convex = fs.iter().all(|f| f.convex);
        Self::new(name, fs[0].dim, move |x: &Vector| {
            let mut m = f64::NEG_INFINITY;
            for f in &parts {
                match f.value(x) {
                    Ok(v) => m = m.max(v),
                    Err(_) => return f64::INFINITY,
                }
            }
            m
        })
        .with_convex(convex)
    }
}

fn combine(a: &ScalarFunction, b: &ScalarFunction, x: &Vector, op: impl Fn(f64, f64) -> f64) -> f64 {
    match (a.value(x), b.value(x)) {
        (Ok(p), Ok(q)) => op(p, q),
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn expression_functions() {
        let f = ScalarFunction::from_expr("x1^2 + abs(x2)", 2).unwrap();
        assert!(f.is_convex());
        assert_eq!(f.value(&DVector::from_vec(vec![2.0, -1.0])).unwrap(), 5.0);
        let g = ScalarFunction::from_expr("sqrt(x1)", 1).unwrap();
        assert_eq!(g.value(&DVector::from_vec(vec![-1.0])), Err(Error::OutsideDomain));
        assert!(!ScalarFunction::from_expr("floor(x1)", 1).unwrap().is_convex());
    }
}
