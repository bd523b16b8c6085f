use thiserror::Error;

/// Errors raised by automaton construction, parsing and the bounded decision procedures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("undefined state `{0}`")]
    UndefinedState(String),

    #[error("duplicate definition of state `{0}`")]
    DuplicateState(String),

    #[error("unknown letter `{0}`")]
    UnknownLetter(String),

    #[error("duplicate letter `{0}` in alphabet")]
    DuplicateLetter(String),

    #[error("image list of `{0}` is not a permutation of the alphabet")]
    NotPermutation(String),

    #[error("state `{state}` has {found} sections but the alphabet has {expected} letters")]
    Arity {
        state: String,
        expected: usize,
        found: usize,
    },

    #[error("automaton is not invertible: output row of `{0}` is not a permutation")]
    NotInvertible(String),

    #[error("malformed automaton: {0}")]
    Malformed(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("section closure exceeded its budget of {budget} members")]
    BudgetExceeded { budget: usize },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("group word does not preserve the level domain (vertex {0})")]
    DomainNotPreserved(String),

    #[error("invalid family specification: {0}")]
    InvalidFamily(String),

    #[error("operation requires a binary alphabet, found {0} letters")]
    NonBinaryAlphabet(usize),

    #[error("permutation is not expressible over the available constants: {0}")]
    NotExpressible(String),

    #[error("internal verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error reports an exhausted budget or size cap rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SizeCap(_))
    }
}
