use serde::{Deserialize, Serialize};

use super::board::{MAX_HEIGHT, MAX_WIDTH};
use crate::{Error, Result};

/// When the game ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GameOverVariant {
    /// Only a placement that would stick out of the top row ends the game.
    #[default]
    Overflow,
    /// The game also ends when the next piece cannot appear: its first
    /// rotation, centred horizontally (left-biased) in the top rows, overlaps
    /// a full cell.
    SpawnBlocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PieceRule {
    /// Each piece drawn uniformly and independently from the seven kinds.
    #[default]
    UniformIid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub width: usize,
    pub height: usize,
    /// Reward for clearing 1, 2, 3 and 4 lines at once.
    pub scoring: [f64; 4],
    pub game_over: GameOverVariant,
    pub piece_rule: PieceRule,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            width: 10,
            height: 20,
            scoring: [1.0, 2.0, 3.0, 4.0],
            game_over: GameOverVariant::Overflow,
            piece_rule: PieceRule::UniformIid,
        }
    }
}

impl GameConfig {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        let cfg = Self {
            width,
            height,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The standard 10 wide, 20 high grid.
    pub fn standard() -> Self {
        Self::default()
    }

    /// The shortened 10 × 10 grid used for quick benchmarks and training.
    pub fn small() -> Self {
        Self {
            height: 10,
            ..Self::default()
        }
    }

    pub fn with_game_over(mut self, variant: GameOverVariant) -> Self {
        self.game_over = variant;
        self
    }

    pub fn with_scoring(mut self, scoring: [f64; 4]) -> Self {
        self.scoring = scoring;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(4..=MAX_WIDTH).contains(&self.width) {
            return Err(Error::InvalidConfig(format!(
                "width {} outside 4..={MAX_WIDTH}",
                self.width
            )));
        }
        if !(4..=MAX_HEIGHT).contains(&self.height) {
            return Err(Error::InvalidConfig(format!(
                "height {} outside 4..={MAX_HEIGHT}",
                self.height
            )));
        }
        if let Some(bad) = self.scoring.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scoring entries must be finite and >= 0, got {bad}"
            )));
        }
        Ok(())
    }

    /// Reward for a move that cleared `lines` rows.
    #[inline]
    pub fn reward(&self, lines: u8) -> f64 {
        match lines {
            0 => 0.0,
            n => self.scoring[(n as usize).min(4) - 1],
        }
    }
}
