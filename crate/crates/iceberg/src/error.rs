use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("inconsistent generator set: {0}")]
    InconsistentGenerators(String),
    #[error("code is not CSS")]
    NotCss,
    #[error("enumeration budget exceeded: needs 2^{needed}, budget 2^{budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("permutation is not an automorphism of the stabilizer group")]
    NotAnAutomorphism,
    #[error("unknown code `{0}`")]
    UnknownCode(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("non-Clifford or unsupported operation: {0}")]
    Unsupported(String),
    #[error("synthesis failed: {0}")]
    Synthesis(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
