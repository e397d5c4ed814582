//! Error type shared by all geometry modules.

use thiserror::Error;

/// Errors produced by the geometry and verification engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Pivoted Gram-Schmidt ran out of vectors with usable pseudo-norm:
    /// the remaining span is degenerate (or numerically indistinguishable
    /// from degenerate) for the given inner product.
    #[error("null pivot: best remaining pseudo-norm {best:e} below threshold {threshold:e}")]
    NullPivot { best: f64, threshold: f64 },

    #[error("point is not on the quadric (membership residual {residual:e})")]
    NotOnQuadric { residual: f64 },

    #[error("matrix is not skew-symmetric for the given signature (residual {residual:e})")]
    NotSkew { residual: f64 },

    /// Fiber pseudo-length hit the singular set of the metric family,
    /// where 1 + <e,e> vanishes.
    #[error("fiber pseudo-length {e_len} lies on the singular set <e,e> = -1")]
    Singular { e_len: f64 },

    #[error("tangent plane is numerically degenerate")]
    DegenerateTangent,

    #[error("matrix is not invertible")]
    NonInvertible,

    #[error(
        "linear map does not carry the source quadric onto the target (residual {residual:e})"
    )]
    QuadricMapMismatch { residual: f64 },

    #[error(
        "Killing field is not preharmonic: A^3 is not proportional to A (residual {residual:e})"
    )]
    NotPreharmonic { residual: f64 },

    #[error("field does not have constant pseudo-length (spread {spread:e})")]
    NotConstantLength { spread: f64 },

    #[error("zero Killing field has no fixed-point classification or normal form")]
    ZeroField,

    #[error("variation patch touches the singular set <sigma,sigma> = -1 (margin {margin:e})")]
    SingularPatch { margin: f64 },

    #[error("chart box leaves the quadric: radicand {radicand:e} at a quadrature node")]
    InvalidChart { radicand: f64 },

    #[error("vector field is not tangent to the quadric (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("tangent-bundle vectors are attached at different points of the total space")]
    BundlePointMismatch,

    /// Metric-parameter data degenerate to the point that the coefficient
    /// system no longer has finitely many solutions.
    #[error("preharmonic data is degenerate; metric-parameter set is not finite")]
    DegenerateParamSystem,
}

pub type Result<T> = std::result::Result<T, Error>;
