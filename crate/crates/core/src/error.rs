use thiserror::Error;

/// Errors raised by the algebra kernel, the parsers and the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polynomials live in different variable tables")]
    ContextMismatch,
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has no image in the assignment")]
    UnassignedVariable(String),
    #[error("invalid weight for `{name}`: {weight}")]
    InvalidWeight { name: String, weight: i64 },
    #[error("operation undefined on the zero polynomial: {0}")]
    ZeroPolynomial(&'static str),
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("polynomial `{poly}` is not fixed by group element `{element}`")]
    NotInvariant { poly: String, element: String },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("inhomogeneous relation `{relation}` (degrees {degrees:?})")]
    Inhomogeneous { relation: String, degrees: Vec<u32> },
    #[error("relation ideal of `{0}` is the unit ideal")]
    UnitIdeal(String),
    #[error("incompatible generator pair `{name}`: difference `{difference}` is nonzero in the common quotient")]
    IncompatiblePair { name: String, difference: String },
    #[error("`{0}` lies in the ideal (it is zero in the quotient)")]
    ZeroInQuotient(String),
    #[error("non-zero-divisor gate failed for `{element}`: witness `{witness}`")]
    ZeroDivisor { element: String, witness: String },
    #[error("io error on `{path}`: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
