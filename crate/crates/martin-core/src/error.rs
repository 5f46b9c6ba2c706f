use thiserror::Error;

use crate::vector::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown root system type `{0}`")]
    UnknownType(String),
    #[error("rank {rank} is not valid for type {label}")]
    InvalidRank { label: String, rank: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("Weyl group of order {order} exceeds the enumeration cap {cap}")]
    GroupTooLarge { order: u128, cap: usize },
    #[error("vector {0} is not dominant")]
    NotDominant(Vector),
    #[error("vector {0} is not in the required lattice")]
    NotInLattice(Vector),
    #[error("index set must be a proper subset of the simple roots")]
    NotProperSubset,
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("singular evaluation point: denominator vanishes on coroot {coroot}")]
    Singular { coroot: Vector },
    #[error("extrapolation did not converge (error estimate {estimate:e})")]
    Extrapolation { estimate: f64 },
    #[error("least-squares fit failed: residual {residual:e}")]
    IllConditioned { residual: f64 },
    #[error("negative structure constant {value:e} for {nu}")]
    NegativeConstant { nu: Vector, value: f64 },
    #[error("support exceeded cap {cap}")]
    SupportOverflow { cap: usize },
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("point {0} is not a special vertex")]
    NotSpecial(Vector),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
