use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("letter {letter} is out of range for rank {rank}")]
    LetterOutOfRange { letter: i64, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("invalid index {index} for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("generator indices must differ")]
    SameIndex,

    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("no such vertex: {0}")]
    NoSuchVertex(usize),
    #[error("no such edge: {0}")]
    NoSuchEdge(usize),
    #[error("subgraph contains a circuit")]
    NotAForest,
    #[error("graph has rank {0}, which is too small here")]
    RankTooSmall(usize),
    #[error("not a core graph")]
    NotCore,
    #[error("edge path is not composable at position {0}")]
    NotComposable(usize),

    #[error("malformed graph map: {0}")]
    MalformedMap(String),
    #[error("map is degenerate at vertex {0}")]
    Degenerate(usize),
    #[error("map is not foldable at vertex {0}")]
    NotFoldable(usize),
    #[error("map is not locally injective at vertex {0}")]
    NotLocallyInjective(usize),
    #[error("invalid fold event: {0}")]
    InvalidFold(String),

    #[error("the identity element is not allowed here")]
    IdentityWord,
    #[error("not a circuit: {0}")]
    NotACircuit(String),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("taken turn ({0}, {1}) is illegal for the map")]
    IllegalTurnTaken(usize, usize),

    #[error("invalid length structure: {0}")]
    InvalidLengths(String),
    #[error("length structure has no zero-length edge")]
    NoZeroEdges,
}

pub type Result<T> = std::result::Result<T, Error>;
