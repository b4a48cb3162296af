//! The Tetris decision process: pieces, boards, drops and episodes.
//!
//! Row 0 is the floor. Column heights are 1-based counts, so an empty column
//! has height 0. A drop whose piece would poke above the top row is a
//! terminal move: the board is left untouched and no reward is paid.

mod board;
mod config;
mod episode;
mod piece;

pub use board::{BoardState, MoveOutcome, MAX_HEIGHT, MAX_WIDTH};
pub use config::{GameConfig, GameOverVariant, PieceRule};
pub use episode::{EpisodeState, PieceSource};
pub use piece::{PieceKind, Placement, Shape};

/// Every horizontally legal placement of `piece`, ordered by rotation then
/// column. Overflowing placements are included.
pub fn legal_placements(board: &BoardState, piece: PieceKind) -> Vec<Placement> {
    let mut out = Vec::with_capacity(34);
    for_each_placement(board.width(), piece, |p| out.push(p));
    out
}

/// Visits placements in the same order as [`legal_placements`] without
/// allocating.
#[inline]
pub fn for_each_placement(width: usize, piece: PieceKind, mut f: impl FnMut(Placement)) {
    for (rotation, shape) in piece.rotations().iter().enumerate() {
        let w = shape.width as usize;
        if w > width {
            continue;
        }
        for column in 0..=(width - w) {
            f(Placement {
                piece,
                rotation: rotation as u8,
                column: column as u8,
            });
        }
    }
}

/// Number of legal placements without building the list.
pub fn placement_count(width: usize, piece: PieceKind) -> usize {
    piece
        .rotations()
        .iter()
        .filter(|s| s.width as usize <= width)
        .map(|s| width + 1 - s.width as usize)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_board_counts() {
        let b = BoardState::empty(10, 20).unwrap();
        let counts: Vec<usize> = PieceKind::ALL
            .iter()
            .map(|&p| legal_placements(&b, p).len())
            .collect();
        // I O T S Z J L
        assert_eq!(counts, vec![17, 9, 34, 17, 17, 34, 34]);
        for &p in &PieceKind::ALL {
            assert_eq!(placement_count(10, p), legal_placements(&b, p).len());
        }
    }

    #[test]
    fn order_is_rotation_then_column() {
        let b = BoardState::empty(10, 20).unwrap();
        let ps = legal_placements(&b, PieceKind::T);
        let keys: Vec<(u8, u8)> = ps.iter().map(|p| (p.rotation, p.column)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys[0], (0, 0));
    }
}
