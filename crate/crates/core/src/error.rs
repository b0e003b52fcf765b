use thiserror::Error;

/// Errors produced anywhere in the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("generator matrix has rank {rank} < {dim}: the ordering cone is not pointed")]
    RankDeficient { rank: usize, dim: usize },
    #[error("the ordering cone has empty interior")]
    EmptyInterior,
    #[error("direction is not in the interior of the ordering cone")]
    NotInterior,

    #[error("halfspace system has no vertex (unbounded below)")]
    UnboundedBelow,
    #[error("halfspace system is infeasible")]
    Infeasible,
    #[error("cut removed every vertex")]
    EmptyResult,
    #[error("polyhedron must be three-dimensional for OFF export, got q = {0}")]
    WrongDimension(usize),

    #[error("problem document: {0}")]
    Schema(String),
    #[error("matrix in {0} is not positive semidefinite")]
    NotPsd(String),
    #[error("nonsmooth objective atoms require the natural ordering cone")]
    NonsmoothWithGeneralCone,
    #[error("weight vector is not a nonzero element of the dual cone")]
    WeightNotInDualCone,
    #[error("scalarization direction is zero")]
    ZeroDirection,

    #[error("scalar program is infeasible")]
    ProgramInfeasible,
    #[error("scalar program is unbounded")]
    ProgramUnbounded,
    #[error("solver hit its iteration limit ({0})")]
    MaxIter(&'static str),
    #[error("line search failed to make progress")]
    LineSearchFail,
    #[error("recovered dual weight is degenerate (|w| = {norm:e}, w.c = {wc:e})")]
    DualDegenerate { norm: f64, wc: f64 },

    #[error("initialization: weighted-sum scalarization is unbounded")]
    InitUnbounded,
    #[error("initialization: outer approximation has no vertex")]
    InitNoVertex,
    #[error("iteration {iter}: {source}")]
    Iteration {
        iter: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("no analytic oracle registered for this problem")]
    OracleUnavailable,
    #[error("result did not converge (status {0})")]
    NotConverged(String),
    #[error("i/o: {0}")]
    Io(String),

    #[error("bad instance parameter: {0}")]
    BadParameter(String),
    #[error("stiffness matrix is singular")]
    SingularStiffness,
    #[error("bad data shape: {0}")]
    BadShape(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
