use thiserror::Error;

/// Errors produced by mesh handling, assembly, solves and constant estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("triangle {index} is clockwise (signed area {area:e})")]
    Orientation { index: usize, area: f64 },

    #[error("triangle {index} is degenerate (area {area:e})")]
    Degenerate { index: usize, area: f64 },

    #[error("shape (alpha={alpha}, theta={theta}) violates 0<alpha<=1, acos(alpha/2)<=theta<pi")]
    ShapeOutOfRange { alpha: f64, theta: f64 },

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("linear solve did not converge: relative residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("constraint matrix is rank deficient")]
    RankDeficient,

    #[error("Gram matrix is numerically singular at polynomial degree {degree}")]
    DegenerateGram { degree: usize },

    #[error("field and mesh do not match: {0}")]
    MeshMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
