use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// The seven tetriminos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum PieceKind {
    I,
    O,
    T,
    S,
    Z,
    J,
    L,
}

/// One rotation of a piece. Offsets are `(dx, dy)` with `dy` pointing up and
/// both minima at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub cells: [(u8, u8); 4],
    pub width: u8,
    pub height: u8,
    /// Lowest occupied `dy` per `dx` column.
    pub bottom: [u8; 4],
    /// Highest occupied `dy` per `dx` column.
    pub top: [u8; 4],
    /// Occupancy bitmask of each `dy` row, bit `dx` set for a cell.
    pub row_masks: [u16; 4],
}

impl Shape {
    const fn new(cells: [(u8, u8); 4]) -> Shape {
        let mut width = 0;
        let mut height = 0;
        let mut bottom = [u8::MAX; 4];
        let mut top = [0u8; 4];
        let mut row_masks = [0u16; 4];
        let mut i = 0;
        while i < 4 {
            let (dx, dy) = cells[i];
            if dx + 1 > width {
                width = dx + 1;
            }
            if dy + 1 > height {
                height = dy + 1;
            }
            if dy < bottom[dx as usize] {
                bottom[dx as usize] = dy;
            }
            if dy > top[dx as usize] {
                top[dx as usize] = dy;
            }
            row_masks[dy as usize] |= 1 << dx;
            i += 1;
        }
        Shape {
            cells,
            width,
            height,
            bottom,
            top,
            row_masks,
        }
    }
}

const I_ROT: [Shape; 2] = [
    Shape::new([(0, 0), (1, 0), (2, 0), (3, 0)]),
    Shape::new([(0, 0), (0, 1), (0, 2), (0, 3)]),
];
const O_ROT: [Shape; 1] = [Shape::new([(0, 0), (1, 0), (0, 1), (1, 1)])];
const T_ROT: [Shape; 4] = [
    Shape::new([(0, 0), (1, 0), (2, 0), (1, 1)]),
    Shape::new([(0, 0), (0, 1), (0, 2), (1, 1)]),
    Shape::new([(1, 0), (0, 1), (1, 1), (2, 1)]),
    Shape::new([(1, 0), (1, 1), (1, 2), (0, 1)]),
];
const S_ROT: [Shape; 2] = [
    Shape::new([(0, 0), (1, 0), (1, 1), (2, 1)]),
    Shape::new([(1, 0), (1, 1), (0, 1), (0, 2)]),
];
const Z_ROT: [Shape; 2] = [
    Shape::new([(1, 0), (2, 0), (0, 1), (1, 1)]),
    Shape::new([(0, 0), (0, 1), (1, 1), (1, 2)]),
];
const J_ROT: [Shape; 4] = [
    Shape::new([(0, 0), (1, 0), (2, 0), (0, 1)]),
    Shape::new([(0, 0), (0, 1), (0, 2), (1, 2)]),
    Shape::new([(2, 0), (0, 1), (1, 1), (2, 1)]),
    Shape::new([(0, 0), (1, 0), (1, 1), (1, 2)]),
];
const L_ROT: [Shape; 4] = [
    Shape::new([(0, 0), (1, 0), (2, 0), (2, 1)]),
    Shape::new([(0, 0), (1, 0), (0, 1), (0, 2)]),
    Shape::new([(0, 0), (0, 1), (1, 1), (2, 1)]),
    Shape::new([(1, 0), (1, 1), (1, 2), (0, 2)]),
];

impl PieceKind {
    pub const ALL: [PieceKind; 7] = [
        PieceKind::I,
        PieceKind::O,
        PieceKind::T,
        PieceKind::S,
        PieceKind::Z,
        PieceKind::J,
        PieceKind::L,
    ];

    #[inline]
    pub fn rotations(self) -> &'static [Shape] {
        match self {
            PieceKind::I => &I_ROT,
            PieceKind::O => &O_ROT,
            PieceKind::T => &T_ROT,
            PieceKind::S => &S_ROT,
            PieceKind::Z => &Z_ROT,
            PieceKind::J => &J_ROT,
            PieceKind::L => &L_ROT,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> PieceKind {
        Self::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            PieceKind::I => 'I',
            PieceKind::O => 'O',
            PieceKind::T => 'T',
            PieceKind::S => 'S',
            PieceKind::Z => 'Z',
            PieceKind::J => 'J',
            PieceKind::L => 'L',
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PieceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next().map(|c| c.to_ascii_uppercase()), chars.next()) {
            (Some(c), None) => PieceKind::ALL
                .iter()
                .copied()
                .find(|p| p.letter() == c)
                .ok_or_else(|| Error::UnknownPiece(s.to_string())),
            _ => Err(Error::UnknownPiece(s.to_string())),
        }
    }
}

/// A (rotation, column) action for a given piece. `column` is the leftmost
/// column covered by the rotated piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub piece: PieceKind,
    pub rotation: u8,
    pub column: u8,
}

impl Placement {
    pub fn new(piece: PieceKind, rotation: usize, column: usize) -> Self {
        Self {
            piece,
            rotation: rotation as u8,
            column: column as u8,
        }
    }

    /// The rotated shape, or `None` for a rotation index out of range.
    pub fn shape(&self) -> Option<&'static Shape> {
        self.piece.rotations().get(self.rotation as usize)
    }

    pub fn fits(&self, width: usize) -> bool {
        self.shape()
            .is_some_and(|s| self.column as usize + s.width as usize <= width)
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "piece={} rotation={} column={}",
            self.piece, self.rotation, self.column
        )
    }
}
