use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("rule {rule} references rule {target}, which is not smaller")]
    ForwardReference { rule: usize, target: usize },

    #[error("rule {rule} references index {target}, out of range 1..={n}")]
    IndexOutOfRange { rule: usize, target: usize, n: usize },

    #[error("rule {0} is not reachable from the root")]
    Unreachable(usize),

    #[error("terminal code must be at least 1 (rule {0})")]
    ZeroTerminal(usize),

    #[error("string length overflows 64 bits at rule {0}")]
    LengthOverflow(usize),

    #[error("empty grammar")]
    Empty,

    #[error("decoded length {len} exceeds cap {cap}")]
    CapExceeded { len: u64, cap: u64 },

    #[error("{what} {value} out of range {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        lo: u64,
        hi: u64,
    },

    #[error("variable X{0} is a terminal")]
    TerminalVariable(usize),

    #[error("exactness bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("pattern must not be empty")]
    EmptyPattern,

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("representation was built for a different grammar (expected {expected}, found {found})")]
    SlpMismatch { expected: String, found: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
