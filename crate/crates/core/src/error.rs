use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("arity mismatch in {what}: expected {expected}, found {found}")]
    ArityMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unknown cell `{0}`")]
    UnknownCell(String),

    #[error("equation `{lhs}` = `{rhs}` relates arities {left} and {right}")]
    UnequalArities {
        lhs: String,
        rhs: String,
        left: usize,
        right: usize,
    },

    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },

    #[error("term `{0}` is not linear")]
    NonLinear(String),

    #[error("normalizing `{term}` exceeded {limit} rewrite steps")]
    NonTermination { term: String, limit: usize },

    #[error("completion failed: {0}")]
    Completion(String),

    #[error("step `{step}` does not apply to `{term}`")]
    StepMismatch { step: String, term: String },

    #[error("paths are not composable: `{0}` then `{1}`")]
    NotComposable(String, String),

    #[error("cell `{0}` is not invertible")]
    NotInvertible(String),

    #[error("paths are not parallel: {0}")]
    NotParallel(String),

    #[error("bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("no lift within bound: {0}")]
    NoLift(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("unknown stdlib key `{0}`")]
    UnknownKey(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
