use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("not invertible")]
    NotInvertible,
    #[error("modulus mismatch")]
    ModulusMismatch,
    #[error("not a valid hash output")]
    InvalidHashOutput,
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid hash parameters: {0}")]
    InvalidParams(String),
    #[error("value is not an H-image of any length-{length} string")]
    NotAnImage { length: usize },
    #[error("exponent split does not match target")]
    SplitMismatch,
    #[error("unsolvable instance")]
    Unsolvable,
    #[error("strategy unsuitable: {0}")]
    StrategyUnsuitable(String),
    #[error("solver gave up after {attempts} attempts")]
    SolverGaveUp { attempts: usize },
    #[error("no insertable preimage of length < {t}; choose larger t or different g")]
    NoInsertablePreimage { t: usize },
    #[error("inserted preimage of length {len} does not fit period t={t}")]
    InsertTooLong { len: usize, t: usize },
    #[error("not an H-collision")]
    NotACollision,
    #[error("input too short for solver regime")]
    InputTooShort,
    #[error("none found <= {max_length}")]
    NoneFound { max_length: usize },
    #[error("internal verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
