use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::board::{BoardState, MoveOutcome};
use super::config::{GameConfig, GameOverVariant, PieceRule};
use super::piece::{PieceKind, Placement};
use crate::{seeds, Error, Result};

/// Where the next piece comes from.
#[derive(Debug, Clone)]
pub enum PieceSource {
    Uniform(ChaCha8Rng),
    /// A fixed sequence, repeated forever.
    Cycle {
        pieces: Vec<PieceKind>,
        next: usize,
    },
}

impl PieceSource {
    pub fn uniform(seed: u64) -> Self {
        PieceSource::Uniform(seeds::rng(seed))
    }

    pub fn cycle(pieces: Vec<PieceKind>) -> Self {
        assert!(!pieces.is_empty(), "piece cycle must not be empty");
        PieceSource::Cycle { pieces, next: 0 }
    }

    #[inline]
    pub fn draw(&mut self) -> PieceKind {
        match self {
            PieceSource::Uniform(rng) => PieceKind::from_index(rng.gen_range(0..7)),
            PieceSource::Cycle { pieces, next } => {
                let p = pieces[*next];
                *next = (*next + 1) % pieces.len();
                p
            }
        }
    }
}

/// A game in progress: board, falling piece and the piece stream.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    config: GameConfig,
    board: BoardState,
    current: PieceKind,
    source: PieceSource,
    score: f64,
    lines: u64,
    pieces_placed: u64,
    finished: bool,
}

impl EpisodeState {
    /// A fresh game whose pieces follow the config's piece rule.
    pub fn new(config: GameConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let source = match config.piece_rule {
            PieceRule::UniformIid => PieceSource::uniform(seed),
        };
        Self::with_source(config, source)
    }

    pub fn with_source(config: GameConfig, mut source: PieceSource) -> Result<Self> {
        config.validate()?;
        let board = BoardState::empty(config.width, config.height)?;
        let current = source.draw();
        Ok(Self {
            config,
            board,
            current,
            source,
            score: 0.0,
            lines: 0,
            pieces_placed: 0,
            finished: false,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn board(&self) -> &BoardState {
        &self.board
    }

    pub fn current_piece(&self) -> PieceKind {
        self.current
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn lines_cleared(&self) -> u64 {
        self.lines
    }

    pub fn pieces_placed(&self) -> u64 {
        self.pieces_placed
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Commits `placement` for the falling piece and returns the reward.
    pub fn step(&mut self, placement: Placement) -> Result<f64> {
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        if placement.piece != self.current {
            return Err(Error::WrongPiece {
                expected: self.current.letter(),
                got: placement.piece.letter(),
            });
        }
        let outcome = self.board.drop(placement)?;
        Ok(self.apply(&outcome))
    }

    /// Commits an outcome already computed from the current board and piece.
    pub(crate) fn apply(&mut self, outcome: &MoveOutcome) -> f64 {
        debug_assert!(!self.finished);
        if outcome.terminal {
            self.finished = true;
            return 0.0;
        }
        let reward = self.config.reward(outcome.lines_cleared);
        self.board = outcome.post;
        self.score += reward;
        self.lines += outcome.lines_cleared as u64;
        self.pieces_placed += 1;
        self.current = self.source.draw();
        if self.config.game_over == GameOverVariant::SpawnBlocked && self.spawn_blocked() {
            self.finished = true;
        }
        reward
    }

    /// Whether the falling piece's first rotation overlaps the stack when
    /// placed at the top of the grid, horizontally centred (left-biased).
    pub fn spawn_blocked(&self) -> bool {
        let shape = &self.current.rotations()[0];
        let col = (self.config.width - shape.width as usize) / 2;
        let row = self.config.height - shape.height as usize;
        self.board
            .collides_at(Placement::new(self.current, 0, col), row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewards_follow_the_scoring_table() {
        let row = 0b11_1111_1110u16;
        let board = BoardState::from_rows(10, 20, &[row; 4]).unwrap();
        let mut ep = EpisodeState::with_source(
            GameConfig::default(),
            PieceSource::cycle(vec![PieceKind::I]),
        )
        .unwrap();
        ep.board = board;
        let r = ep.step(Placement::new(PieceKind::I, 1, 0)).unwrap();
        assert_eq!(r, 4.0);
        assert_eq!(ep.lines_cleared(), 4);
        assert!(ep.board().is_empty());

        let board = BoardState::from_rows(10, 20, &[0b11_1111_0000]).unwrap();
        ep.board = board;
        assert_eq!(ep.step(Placement::new(PieceKind::I, 0, 0)).unwrap(), 1.0);
        assert_eq!(ep.score(), 5.0);
        assert_eq!(ep.pieces_placed(), 2);
    }

    #[test]
    fn bonus_table() {
        let cfg = GameConfig::default().with_scoring([1.0, 3.0, 5.0, 8.0]);
        let row = 0b11_1111_1110u16;
        let mut ep =
            EpisodeState::with_source(cfg, PieceSource::cycle(vec![PieceKind::I])).unwrap();
        ep.board = BoardState::from_rows(10, 20, &[row; 4]).unwrap();
        assert_eq!(ep.step(Placement::new(PieceKind::I, 1, 0)).unwrap(), 8.0);
    }

    #[test]
    fn terminal_move_finishes_with_zero_reward() {
        let mut ep = EpisodeState::with_source(
            GameConfig::default(),
            PieceSource::cycle(vec![PieceKind::I]),
        )
        .unwrap();
        ep.board = BoardState::from_rows(10, 20, &[1u16; 19]).unwrap();
        let r = ep.step(Placement::new(PieceKind::I, 1, 0)).unwrap();
        assert_eq!(r, 0.0);
        assert!(ep.is_finished());
        assert_eq!(ep.pieces_placed(), 0);
        assert!(matches!(
            ep.step(Placement::new(PieceKind::I, 0, 0)),
            Err(Error::EpisodeFinished)
        ));
    }

    #[test]
    fn wrong_piece_is_rejected() {
        let mut ep = EpisodeState::with_source(
            GameConfig::default(),
            PieceSource::cycle(vec![PieceKind::O]),
        )
        .unwrap();
        assert!(matches!(
            ep.step(Placement::new(PieceKind::I, 0, 0)),
            Err(Error::WrongPiece { .. })
        ));
    }

    #[test]
    fn spawn_blocked_variant_ends_early() {
        let cfg = GameConfig::default().with_game_over(GameOverVariant::SpawnBlocked);
        let mut ep =
            EpisodeState::with_source(cfg, PieceSource::cycle(vec![PieceKind::O])).unwrap();
        // Column 4 filled up to row 17; the O spawns over columns 4-5, rows 18-19.
        ep.board = BoardState::from_rows(10, 20, &[1 << 4; 17]).unwrap();
        ep.step(Placement::new(PieceKind::O, 0, 4)).unwrap();
        assert!(ep.is_finished());
        assert_eq!(ep.pieces_placed(), 1);

        // Same move under Overflow keeps going.
        let mut ep = EpisodeState::with_source(
            GameConfig::default(),
            PieceSource::cycle(vec![PieceKind::O]),
        )
        .unwrap();
        ep.board = BoardState::from_rows(10, 20, &[1 << 4; 17]).unwrap();
        ep.step(Placement::new(PieceKind::O, 0, 4)).unwrap();
        assert!(!ep.is_finished());
    }

    #[test]
    fn seeded_piece_streams_repeat() {
        let a = EpisodeState::new(GameConfig::default(), 3).unwrap();
        let b = EpisodeState::new(GameConfig::default(), 3).unwrap();
        assert_eq!(a.current_piece(), b.current_piece());
        let mut sa = a.source.clone();
        let mut sb = b.source.clone();
        for _ in 0..100 {
            assert_eq!(sa.draw(), sb.draw());
        }
    }
}
