use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Coarse grouping used by front ends to pick exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// The hypersurface, structure or point violates an invariant.
    Geometry,
    /// A requested order does not fit the available truncation.
    Cap,
    /// Everything else: shape misuse, failed preconditions, internal faults.
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{what} mismatch: {left} vs {right}")]
    ShapeMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("variable index {var} out of range for {nvars} variables")]
    VariableOutOfRange { var: usize, nvars: usize },
    #[error("expected {expected} substituted series, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("substituted series {index} has a nonzero constant term")]
    NonzeroConstantTerm { index: usize },
    #[error("series has zero constant term and cannot be inverted")]
    NotInvertible,
    #[error("order {needed} exceeds the reliable truncation depth {available}")]
    TruncationDepth { needed: i32, available: i32 },
    #[error("invalid hypersurface: {0}")]
    InvalidHypersurface(String),
    #[error("invalid almost complex structure: {0}")]
    InvalidStructure(String),
    #[error("vector field is not complex tangent: {0}")]
    NotComplexTangent(String),
    #[error("disk jet is not regular (du/dx(0) = 0)")]
    NonRegularDisk,
    #[error("reparametrization has vanishing derivative at 0")]
    DegenerateReparametrization,
    #[error("no closed form available for L^({p},{q})")]
    UnsupportedClosedForm { p: u32, q: u32 },
    #[error("jet precondition violated: {0}")]
    JetMismatch(String),
    #[error("contact order {found} is below the required {needed}")]
    InsufficientContact { found: u32, needed: u32 },
    #[error("field does not commute at 0 up to order {order}")]
    CommutationDefect { order: u32 },
    #[error("K_max = {k_max} needs a degree cap of at least {needed}, have {cap}")]
    CapOverflow { k_max: u32, needed: u32, cap: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("direction list is empty")]
    EmptyDirections,
    #[error("point is not on the hypersurface: {0}")]
    PointNotOnHypersurface(String),
    #[error("theorem check failed: {0}")]
    TheoremViolation(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidHypersurface(_)
            | Error::InvalidStructure(_)
            | Error::PointNotOnHypersurface(_) => ErrorClass::Geometry,
            Error::TruncationDepth { .. } | Error::CapOverflow { .. } => ErrorClass::Cap,
            _ => ErrorClass::Other,
        }
    }
}
