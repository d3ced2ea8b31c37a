use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty point set")]
    EmptySet,
    #[error("duplicate lattice point ({0}, {1})")]
    DuplicatePoint(i64, i64),
    #[error("point ({x}, {y}) is not on the circle x^2 + y^2 = {n}")]
    NotOnCircle { x: i64, y: i64, n: u64 },
    #[error("the origin is the median of every antipodal pair")]
    AmbiguousMedian,
    #[error("doubled median with |2z|^2 = {norm_sq} lies outside the disk of radius sqrt({n})")]
    OutsideDisk { norm_sq: i64, n: u64 },
    #[error("curvature changes sign near parameter {at}")]
    CurvatureSignChange { at: f64 },
    #[error("curvature vanishes near parameter {at}")]
    ZeroCurvature { at: f64 },
    #[error("total curvature {total} is not below pi/2")]
    TotalCurvature { total: f64 },
    /// A proven inequality or a structural invariant failed. This indicates a
    /// bug or an input that violates a documented contract.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("quadrature did not converge with {nodes} nodes (best estimate {best})")]
    NonConvergence { best: f64, nodes: usize },
}
