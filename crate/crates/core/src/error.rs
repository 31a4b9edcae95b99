use thiserror::Error;

/// Errors raised by the geometric operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("rotation angle {angle} is outside the injectivity radius of the logarithm")]
    OutsideInjectivityRadius { angle: f64 },

    #[error("outside domain: {0}")]
    OutsideDomain(String),

    #[error("Newton inversion did not converge: residual {residual:e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("tangent vectors are based at different points")]
    BasePointMismatch,

    #[error("points are not in the same fiber (base distance {distance:e})")]
    NotSameFiber { distance: f64 },

    #[error("object belongs to bundle {found}, expected {expected}")]
    BundleMismatch { expected: String, found: String },

    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),

    #[error("difference quotients are inconsistent (discrepancy {discrepancy:e}); map is not differentiable along the diagonal")]
    NonDifferentiable { discrepancy: f64 },

    #[error("retraction is not equivariant: sampled defect {defect:e}")]
    NotEquivariant { defect: f64 },

    #[error("difference does not descend to the base: fiber dependence {defect:e}")]
    DescentFailure { defect: f64 },

    #[error("one-form is not closed: sampled curvature {curvature:e}")]
    NotClosed { curvature: f64 },

    #[error("curvatures do not match: sampled defect {defect:e}")]
    CurvatureMismatch { defect: f64 },

    #[error("base is not simply connected: {0}")]
    NotSimplyConnected(String),

    #[error("operation requires an abelian structure group, got {0}")]
    NonAbelian(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::KindMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
