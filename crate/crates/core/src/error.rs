use thiserror::Error;

/// Everything that can go wrong while building or analysing a diagram.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level}: row {row} of the incidence matrix is zero")]
    ZeroRow { level: usize, row: usize },

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("level {level} is outside the range defined by the generator")]
    LevelOutOfRange { level: usize },

    #[error("entry bit size {bits} exceeds the configured cap of {cap} bits")]
    MemoryBudgetExceeded { bits: u64, cap: u64 },

    #[error("telescoping cannot be expressed with the available generator kinds: {0}")]
    UnboundedTail(String),

    #[error("invalid cut levels: {0}")]
    InvalidCuts(String),

    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("rank mismatch in {field}: rank is {rank}, found {found}")]
    RankMismatch {
        field: String,
        rank: usize,
        found: usize,
    },

    #[error("negative coefficient in expression {0:?}")]
    NegativeCoefficient(String),

    #[error("cannot parse expression {expr:?}: {message}")]
    Expression { expr: String, message: String },

    #[error("support pattern did not stabilize within {probe_depth} levels")]
    SupportUnstable { probe_depth: usize },

    #[error("vector has a non-positive entry")]
    NonPositiveEntry,

    #[error("diagram is not simple: {0}")]
    NotSimple(String),

    #[error("product column {0} is zero")]
    DegenerateColumn(usize),

    #[error("{count} ergodic measures found; select one explicitly")]
    MultipleMeasures { count: usize },

    #[error("subdiagram is not proper: {0}")]
    SpecNotProper(String),

    #[error("diagram is not two-block lower triangular with respect to the subdiagram: {0}")]
    NotTwoBlock(String),

    #[error("level {level}: vertex {vertex} of the subdiagram has no incoming edge inside it")]
    ZeroRowInduced { level: usize, vertex: usize },

    #[error("path is broken at level {level}: no edge from {from} to {to}")]
    BrokenPath {
        level: usize,
        from: usize,
        to: usize,
    },

    #[error("matrix is not primitive (no positive power up to {max_power})")]
    NotPrimitive { max_power: usize },

    #[error("alphabet is empty")]
    EmptyAlphabet,

    #[error("connecting blocks take infinitely many values")]
    ConnectorsUnbounded,

    #[error("level {level}, vertex {vertex}: ordering does not match the incidence row")]
    OrderMultisetMismatch { level: usize, vertex: usize },

    #[error("lag {q} exceeds half of the cap {cap}")]
    CapTooSmall { q: u64, cap: u64 },

    #[error("block {block} is missing the group element {symbol}")]
    BlockMissingSymbol { block: usize, symbol: usize },

    #[error("block {block} has length {len}, at least 2 is required")]
    BlockTooShort { block: usize, len: usize },

    #[error("block {block} must start with 0")]
    BlockStart { block: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
