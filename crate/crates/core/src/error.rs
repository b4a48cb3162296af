use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game config: {0}")]
    InvalidConfig(String),

    #[error("board parse error on line {line}: {msg}")]
    BoardParse { line: usize, msg: String },

    #[error("board violates invariant: {0}")]
    InvalidBoard(String),

    #[error("placement {rotation}/{column} for piece {piece} does not fit a width-{width} board")]
    PlacementOutOfBounds {
        piece: char,
        rotation: usize,
        column: usize,
        width: usize,
    },

    #[error("placement is for piece {got} but the falling piece is {expected}")]
    WrongPiece { expected: char, got: char },

    #[error("episode is already finished")]
    EpisodeFinished,

    #[error("unknown feature set `{0}`")]
    UnknownFeatureSet(String),

    #[error("unknown piece `{0}`")]
    UnknownPiece(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite weight at index {0}")]
    NonFiniteWeight(usize),

    #[error("empty candidate list")]
    EmptyCandidates,

    #[error("importance order is not a permutation of 0..{0}")]
    InvalidOrder(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("policy file: {0}")]
    PolicyFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
