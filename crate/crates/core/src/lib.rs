//! Tetris decision-research workbench.
//!
//! The crate is organised bottom-up:
//!
//! - [`engine`]: board, pieces, placement enumeration, drops, episodes.
//! - [`features`]: feature primitives and the named feature sets.
//! - [`policy`]: linear afterstate evaluation and greedy selection.
//! - [`dominance`]: simple and cumulative dominance action filters.
//! - [`optimize`]: cross-entropy weight search.
//! - [`bench`]: seeded, parallel episode playouts and statistics.
//! - [`cli`]: the `tetrislab` command line front end.

pub mod bench;
pub mod cli;
pub mod dominance;
pub mod engine;
mod error;
pub mod features;
pub mod optimize;
pub mod policy;
pub mod seeds;

pub use error::{Error, Result};

pub use engine::{
    BoardState, EpisodeState, GameConfig, GameOverVariant, MoveOutcome, PieceKind, PieceRule,
    Placement,
};
pub use features::{FeatureContext, FeatureSetId, FeatureVector, GridFeatures};
pub use policy::LinearPolicy;
