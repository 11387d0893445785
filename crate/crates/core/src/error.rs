use thiserror::Error;

/// Errors raised by the geometric and variational routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share an ambient dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A coordinate or parameter was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A point that must lie in a set does not.
    #[error("point is not a member of the set: {0}")]
    NotAMember(String),

    /// The set has no members (or none were found by probing).
    #[error("empty set: {0}")]
    EmptySet(String),

    /// The claimed symmetry centre is not a centre of symmetry.
    #[error("set is not symmetric about the given centre")]
    AsymmetricSet,

    /// A gauge needs a centre but the set does not carry one.
    #[error("set has no centre")]
    MissingCenter,

    /// Argument out of its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A function value was requested outside its domain.
    #[error("point outside the function domain")]
    OutsideDomain,

    /// The base point is not in the intrinsic core of the domain.
    #[error("point is not in the intrinsic core")]
    NotInIntrinsicCore,

    /// Sampled values of the function were unbounded on the set.
    #[error("function appears unbounded on the sampled set (sup estimate {0})")]
    Unbounded(f64),

    /// A pair of points at gauge distance zero has different values.
    #[error("kernel violation: gauge distance {distance:e} but value gap {gap:e}")]
    KernelViolation { distance: f64, gap: f64 },

    /// The gauge kernel equals its span, so no non-zero functional survives.
    #[error("degenerate gauge: kernel equals span")]
    DegenerateGauge,

    /// The linear program for subgradient extraction had no feasible point.
    #[error("support constraints are inconsistent (rows {rows:?})")]
    Infeasible { rows: Vec<usize> },

    /// The linear program optimum did not reach the support value.
    #[error("support value {support} not attained (optimum {optimum})")]
    NotAttained { support: f64, optimum: f64 },

    /// The base point is neither a sampled minimiser nor a maximiser.
    #[error("point is not a local extremum on the sampled ball")]
    NotExtremal,

    /// No positive step along the direction stays in the domain.
    #[error("no feasible step along the direction")]
    NoFeasibleStep,

    /// No probe point near the base point lies in the domain.
    #[error("no gauge neighbourhood of the point lies in the domain")]
    NeighborhoodInfeasible,

    /// An iterative procedure gave up.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A representation cannot be serialised.
    #[error("not serialisable: {0}")]
    NotSerializable(String),

    /// Failure while parsing or evaluating an expression.
    #[error(transparent)]
    Expr(#[from] crate::func_expr::ExprError),

    /// Malformed JSON document.
    #[error("bad document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
