use thiserror::Error;

/// Errors raised by the library.
///
/// Hypothesis failures carry the measured quantity that violated them so a
/// caller can report it without recomputing anything.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("decomposition failed to converge")]
    Decomposition,

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("gamma undefined for zero operator")]
    ZeroOperator,

    #[error("rank tolerance must lie in [0, 1), got {0}")]
    InvalidRankTol(f64),

    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("operator is not an orthogonal projection (residual {0:.3e})")]
    NotProjection(f64),

    #[error("operator is not a partial isometry (residual {0:.3e})")]
    NotPartialIsometry(f64),

    #[error(
        "null spaces differ (nullities {nullity_a} and {nullity_b}, largest angle sine {sine:.3e}); \
         left orbit membership needs A-B in J and N(A)=N(B)"
    )]
    NullSpaceMismatch {
        nullity_a: usize,
        nullity_b: usize,
        sine: f64,
    },

    #[error("essential codimension {index} != 0")]
    IndexMismatch { index: i64 },

    #[error("moduli differ: |||A|-|B||| = {0:.3e}")]
    ModulusMismatch(f64),

    #[error("singular value clusters do not match: {0}")]
    SpectrumMismatch(String),

    #[error("intertwiner is numerically singular (smallest singular value {0:.3e})")]
    SingularIntertwiner(f64),

    #[error("summands are not orthogonal (residual {0:.3e})")]
    NotOrthogonal(f64),

    #[error("ambiguous numerical rank: principal cosine {0:.17e} is too close to the cutoff")]
    AmbiguousRank(f64),

    #[error("clusters not separable at grouping tolerance {tol:.3e}: relative gap {gap:.3e} after singular value {index}")]
    ClusterGap { index: usize, gap: f64, tol: f64 },

    #[error("family hypothesis violated: {0}")]
    FamilyHypothesis(String),

    #[error("oblique duality needs S + T^perp = H and S cap T^perp = 0: {0}")]
    AngleCondition(String),

    #[error("frame has no nonzero vectors (alpha = 0)")]
    ZeroFrame,

    #[error("negative entry {0} in a singular value sequence")]
    NegativeEntry(f64),

    #[error("invalid gauge specification {0:?}")]
    InvalidGauge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for malformed input (as opposed to a failed mathematical hypothesis).
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::NonFinite)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
