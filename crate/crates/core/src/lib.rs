//! Gauge-relative Lipschitz analysis and subdifferential calculus for
//! functions on convex subsets of R^n.
//!
//! Sets and their Minkowski gauges live in [`convex_geometry`]; sublevel sets
//! and symmetric cores in [`symmetrization`]; Lipschitz certificates in
//! [`lipschitz`]; directional derivatives, subgradient extraction, Fermat
//! and mean-value procedures in [`subdifferential`]; rule verifiers in
//! [`calculus_rules`]; the weighted-grid examples in [`l2_examples`].

pub mod calculus_rules;
pub mod convex_geometry;
pub mod counterexamples;
pub mod document;
pub mod error;
pub mod func_expr;
pub mod function;
pub mod l2_examples;
pub mod lipschitz;
pub mod lp;
pub mod registry;
pub mod sampling;
pub mod subdifferential;
pub mod symmetrization;

pub use convex_geometry::{ConvexSet, Gauge, Vector};
pub use error::{Error, Result};
pub use function::ScalarFunction;
