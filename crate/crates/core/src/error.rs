use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("generator g{index} out of range for arity {arity}")]
    GeneratorOutOfRange { index: usize, arity: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("model-mode bound requested but no backend is attached")]
    NoBackend,
    #[error("search budget of {budget} candidates exhausted in {stage}")]
    BudgetExhausted { budget: u64, stage: String },
    #[error("precision budget exhausted at k = {k} in {stage}")]
    PrecisionExhausted { k: u32, stage: String },
    #[error("degenerate corner: trace {0} is below the floor")]
    DegenerateCorner(String),
    #[error("not an exactly certified projection: {0}")]
    NotProjection(String),
    #[error("trace {0} is not realizable here")]
    Unrealizable(String),
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),
    #[error("no conditional expectation available")]
    NoCondExp,
    #[error("index not available")]
    NoIndex,
    #[error("sub-basis is not linearly independent")]
    DependentBasis,
    #[error("basis has not been verified")]
    UnverifiedBasis,
    #[error("element is not in the span of the generator words up to degree {0}")]
    NotExpressible(usize),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
