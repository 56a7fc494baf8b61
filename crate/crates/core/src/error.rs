use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 2^61)")]
    InvalidModulus(u64),
    #[error("operands belong to different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("value {value} is not canonical modulo {q}")]
    NonCanonical { value: u64, q: u64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nonce is {0} bytes, at most {1} allowed")]
    NonceTooLong(usize, usize),
    #[error("sampler gave up after {0} rejected draws")]
    StreamFault(u64),
    #[error("message coordinate {index} encodes to {encoded}, outside (-q/2, q/2)")]
    EncodingOverflow { index: usize, encoded: i128 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("simulation deadlocked at cycle {cycle}: {detail}")]
    Deadlock { cycle: u64, detail: String },
    #[error("trace diverges from golden model at cycle {cycle} ({unit}, lane {lane}, element {element}): expected {expected}, got {got}")]
    Divergence {
        cycle: u64,
        unit: String,
        lane: usize,
        element: usize,
        expected: u64,
        got: u64,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
