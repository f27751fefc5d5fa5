use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lattice basis is singular")]
    SingularBasis,
    #[error("not a sublattice: basis vector {0} of the smaller lattice is not contained in the larger one")]
    NotSublattice(usize),
    #[error("polarization form is not alternating: component {component}, entries ({i},{j})")]
    NonAlternatingForm { component: usize, i: usize, j: usize },
    #[error("polarization form is incompatible with the torus action: {0}")]
    IncompatiblePolarization(String),
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} is a perfect square")]
    SquareInput(i64),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("unsupported character: {0}")]
    UnsupportedCharacter(String),
    #[error("index did not stabilize up to precision {k_max} at p = {p}")]
    PrecisionNotStabilized { p: u64, k_max: u32 },
    #[error("torus action has a trivial subrepresentation on coordinates {0:?}")]
    TrivialSubrepresentation(Vec<usize>),
    #[error("lattice at p = {0} does not split along the character blocks")]
    LatticeNotBlockCompatible(u64),
    #[error("subspace W' is not stable under the torus action")]
    SubspaceNotStable,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Broad failure classes, used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Precision,
    Unsupported,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::PrecisionNotStabilized { .. } => ErrorClass::Precision,
            Error::UnsupportedField(_)
            | Error::UnsupportedCharacter(_)
            | Error::Unsupported(_) => ErrorClass::Unsupported,
            _ => ErrorClass::Validation,
        }
    }
}
