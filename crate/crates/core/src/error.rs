use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("period mismatch: {left} vs {right}")]
    PeriodMismatch { left: usize, right: usize },
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("matrix is singular (nullspace dimension {nullity})")]
    Singular { nullity: usize },
    #[error("circulant operator is singular (nullspace dimension {nullity})")]
    SingularOperator { nullity: usize },
    #[error("no odd periodic solution exists")]
    NoSolution,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("polygon is degenerate: Wronskian vanishes at site {site}")]
    DegeneratePolygon { site: usize },
    #[error("monodromy must have determinant 1, found {0}")]
    NotSpecial(String),
    #[error("affine chart fails at site {site}: last homogeneous component is zero")]
    ChartViolation { site: usize },
    #[error("index {index} outside the fundamental domain 0..{n}")]
    OutOfDomain { index: i64, n: usize },
    #[error("gauge is not unique: gcd(nu, N) = {gcd} > 1")]
    NonUniqueGauge { gcd: usize },
    #[error("no periodic gauge reaches the requested beta: product of beta differs from product of rho")]
    GaugeUnreachable,
    #[error("constraints are not second class: constraint block has a kernel coupled to the free variables")]
    ConstraintNotSecondClass,
    #[error("field {field} vanishes at site {site}")]
    ZeroEntry { field: String, site: usize },
    #[error("tensor is not linear in family {family}: quadratic terms present")]
    LinearityViolated { family: String },
    #[error("unknown tensor name {0:?}")]
    UnknownTensor(String),
    #[error("polygon trajectory degenerated at t = {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
