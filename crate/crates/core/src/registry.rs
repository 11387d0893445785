//! Named functions usable wherever an expression is accepted.

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::l2_examples::{self, WeightedGrid, DEFAULT_GRID_N};

/// How a registry entry is built.
#[derive(Clone, Copy, Debug)]
pub enum Source {
    /// An expression in `x1..xn` of fixed arity.
    Expr { src: &'static str, dim: usize },
    /// A function on a weighted grid; the dimension is the grid size.
    Grid(fn(&std::sync::Arc<WeightedGrid>) -> ScalarFunction),
}

#[derive(Clone, Copy, Debug)]
pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
    pub source: Source,
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "square",
        description: "x^2",
        source: Source::Expr { src: "x1^2", dim: 1 },
    },
    Entry {
        name: "abs",
        description: "|x|",
        source: Source::Expr { src: "abs(x1)", dim: 1 },
    },
    Entry {
        name: "sum_of_squares",
        description: "x^2 + y^2",
        source: Source::Expr {
            src: "x1^2 + x2^2",
            dim: 2,
        },
    },
    Entry {
        name: "max_pair",
        description: "max(x, y)",
        source: Source::Expr {
            src: "max(x1, x2)",
            dim: 2,
        },
    },
    Entry {
        name: "neg_sqrt_one_minus_abs",
        description: "-sqrt(1 - |x|) on [-1, 1]",
        source: Source::Expr {
            src: "-sqrt(1 - abs(x1))",
            dim: 1,
        },
    },
    Entry {
        name: "floor",
        description: "integer part (quasiconvex, not convex)",
        source: Source::Expr { src: "floor(x1)", dim: 1 },
    },
    Entry {
        name: "neg_identity",
        description: "-x",
        source: Source::Expr { src: "-x1", dim: 1 },
    },
    Entry {
        name: "phi_l2",
        description: "sum_i w_i (x_i - t_i)^2 / t_i on x >= -1 (grid)",
        source: Source::Grid(l2_examples::phi_function),
    },
    Entry {
        name: "exp_phi_l2",
        description: "exp(phi_l2) (grid)",
        source: Source::Grid(l2_examples::exp_phi_function),
    },
];

pub fn entries() -> &'static [Entry] {
    ENTRIES
}

pub fn entry(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Build a registry function. Grid entries use `grid_n` cells (default 1000).
pub fn build(name: &str, grid_n: Option<usize>) -> Result<ScalarFunction> {
    let e = entry(name).ok_or_else(|| Error::InvalidArgument(format!("unknown function '{name}'")))?;
    let f = match e.source {
        Source::Expr { src, dim } => ScalarFunction::from_expr(src, dim)?,
        Source::Grid(make) => make(&WeightedGrid::midpoint(grid_n.unwrap_or(DEFAULT_GRID_N))?),
    };
    Ok(f.named(e.name))
}

/// Highest `xk` index in an expression string (its implied arity).
pub fn infer_arity(src: &str) -> usize {
    let b = src.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < b.len() {
        let starts_word = i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_');
        if b[i] == b'x' && starts_word {
            let mut j = i + 1;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let ends_word = j == b.len() || !(b[j].is_ascii_alphanumeric() || b[j] == b'_');
            if j > i + 1 && ends_word {
                if let Ok(k) = src[i + 1..j].parse::<usize>() {
                    best = best.max(k);
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// A registry name or an expression. `dim` overrides the inferred arity of
/// expressions and sizes grid entries.
pub fn resolve(input: &str, dim: Option<usize>) -> Result<ScalarFunction> {
    let input = input.trim();
    if let Some(e) = entry(input) {
        if let (Source::Expr { dim: d, .. }, Some(want)) = (e.source, dim) {
            if d != want {
                return Err(Error::DimensionMismatch { expected: want, got: d });
            }
        }
        return build(input, dim);
    }
    let n = dim.unwrap_or_else(|| infer_arity(input).max(1));
    ScalarFunction::from_expr(input, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::vector;

    #[test]
    fn names_and_expressions() {
        assert_eq!(resolve("sum_of_squares", None).unwrap().value(&vector(&[1.0, 2.0])).unwrap(), 5.0);
        assert_eq!(resolve("x3 - x1", None).unwrap().dim(), 3);
        assert_eq!(resolve("phi_l2", Some(10)).unwrap().dim(), 10);
        assert!(resolve("square", Some(2)).is_err());
        assert!(resolve("nope(", None).is_err());
        assert_eq!(infer_arity("max(x12, exp(x2))"), 12);
        assert_eq!(infer_arity("3"), 0);
    }

    #[test]
    fn every_entry_builds() {
        for e in entries() {
            let f = build(e.name, Some(8)).unwrap();
            assert_eq!(f.name(), e.name);
        }
    }
}
