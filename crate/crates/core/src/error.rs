use thiserror::Error;

/// Errors raised by the geometry kernels.
///
/// Numeric payloads are widened to `f64` so the error type does not depend on
/// the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate {index} is not strictly positive (value {value})")]
    NonPositiveCoordinate { index: usize, value: f64 },
    #[error("dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),
    #[error("sequence cannot be normalized (sum {0})")]
    NotNormalizable(f64),
    #[error("coordinates sum to {sum}, outside [1 - {tail_bound}, 1]")]
    NotOnSimplex { sum: f64, tail_bound: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("exponent q = {0} must lie in (1, inf)")]
    InvalidExponent(f64),
    #[error("operation requires q = 2, got q = {0}")]
    ExponentNotTwo(f64),
    #[error("sequence kind `{0}` has no analytic tail model")]
    NoTailModel(String),
    #[error("refinement dimensions must be strictly increasing")]
    NonIncreasingDims,
    #[error("geometric ratio {0} outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),
    #[error("tangent components sum to {sum}, not zero (tolerance {tol})")]
    NotTangent { sum: f64, tol: f64 },
    #[error("point is not on the l^q unit sphere (sum |x|^q = {0})")]
    NotOnSphere(f64),
    #[error("sphere point is not strictly positive")]
    NotPositive,
    #[error("truncation discards too much mass (retained {0})")]
    TailTooLarge(f64),
    #[error("tangent vectors are attached to different base points")]
    BaseMismatch,
    #[error("geodesic endpoints coincide")]
    DegenerateEndpoints,
    #[error("operation requires tail_bound = 0, got {0}")]
    NonZeroTail(f64),
    #[error("finite-difference step underflow: positivity unreachable at h = {0}")]
    StepUnderflow(f64),
    #[error("curve undefined near t = {0}")]
    CurveDomain(f64),
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("integration left the simplex at step {step} (t = {time})")]
    PositivityLost { step: usize, time: f64 },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("complex point is not on the unit sphere (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("bracket has imaginary residue {0}")]
    ComplexResidue(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
