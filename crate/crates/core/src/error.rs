use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the algebraic computations.
///
/// Parse failures of the model language have their own type,
/// [`crate::dsl::ParseError`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("operation `{symbol}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element index {index} out of range for carrier of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("signature mismatch: `{left}` vs `{right}`")]
    SignatureMismatch { left: String, right: String },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid table for `{symbol}`: {reason}")]
    InvalidTable { symbol: String, reason: String },
    #[error("constant-free signature and no generators: the generated subalgebra would be empty")]
    EmptyGeneration,
    #[error("tuple has {found} components, product context has {expected}")]
    TupleShape { expected: usize, found: usize },
    #[error("{needed} points exceed the point budget of {budget}")]
    PointBudget { needed: u128, budget: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no generator-fixing isomorphism recorded at rank {0}")]
    MissingIso(usize),
    #[error("transported congruence at rank {rank} is not closed over the derived algebra")]
    TransportNotClosed { rank: usize },
    #[error("applicability basis rejected: {0}")]
    MissingBasis(String),
}
