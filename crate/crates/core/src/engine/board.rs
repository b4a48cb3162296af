use std::fmt;

use super::piece::Placement;
use crate::{Error, Result};

pub const MAX_WIDTH: usize = 16;
pub const MAX_HEIGHT: usize = 64;

/// Grid occupancy, one bitmask per row with bit `c` set when column `c` is
/// full. Column heights are cached alongside. No exposed board ever holds a
/// full row.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardState {
    rows: [u16; MAX_HEIGHT],
    heights: [u8; MAX_WIDTH],
    width: u8,
    height: u8,
}

/// What happened when a piece was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveOutcome {
    pub post: BoardState,
    pub lines_cleared: u8,
    /// Centre row of the piece where it came to rest, before clearing.
    pub landing_height: f64,
    /// Lines cleared times piece cells removed by those lines.
    pub eroded_cells: u8,
    pub terminal: bool,
}

impl BoardState {
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        if !(4..=MAX_WIDTH).contains(&width) || !(4..=MAX_HEIGHT).contains(&height) {
            return Err(Error::InvalidBoard(format!(
                "dimensions {width}x{height} outside 4..={MAX_WIDTH} x 4..={MAX_HEIGHT}"
            )));
        }
        Ok(Self {
            rows: [0; MAX_HEIGHT],
            heights: [0; MAX_WIDTH],
            width: width as u8,
            height: height as u8,
        })
    }

    /// Builds a board from row masks, floor first.
    pub fn from_rows(width: usize, height: usize, rows: &[u16]) -> Result<Self> {
        let mut b = Self::empty(width, height)?;
        if rows.len() > height {
            return Err(Error::InvalidBoard(format!(
                "{} rows given for a height-{height} board",
                rows.len()
            )));
        }
        let full = b.full_mask();
        for (r, &mask) in rows.iter().enumerate() {
            if mask & !full != 0 {
                return Err(Error::InvalidBoard(format!(
                    "row {r} has bits outside width {width}"
                )));
            }
            if mask == full {
                return Err(Error::InvalidBoard(format!("row {r} is full")));
            }
            b.rows[r] = mask;
        }
        b.recompute_heights();
        Ok(b)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height as usize
    }

    #[inline]
    pub fn full_mask(&self) -> u16 {
        ((1u32 << self.width) - 1) as u16
    }

    /// Row masks, floor first.
    #[inline]
    pub fn rows(&self) -> &[u16] {
        &self.rows[..self.height as usize]
    }

    #[inline]
    pub fn heights(&self) -> &[u8] {
        &self.heights[..self.width as usize]
    }

    #[inline]
    pub fn is_full(&self, column: usize, row: usize) -> bool {
        self.rows[row] >> column & 1 == 1
    }

    /// Height of the tallest column.
    #[inline]
    pub fn pile_height(&self) -> usize {
        self.heights().iter().copied().max().unwrap_or(0) as usize
    }

    pub fn cell_count(&self) -> usize {
        self.rows().iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows().iter().all(|&r| r == 0)
    }

    fn recompute_heights(&mut self) {
        self.heights = [0; MAX_WIDTH];
        let mut remaining = self.full_mask();
        for r in (0..self.height as usize).rev() {
            let mut fresh = self.rows[r] & remaining;
            remaining &= !fresh;
            while fresh != 0 {
                let c = fresh.trailing_zeros() as usize;
                self.heights[c] = r as u8 + 1;
                fresh &= fresh - 1;
            }
            if remaining == 0 {
                break;
            }
        }
    }

    /// Drops a placement, validating the horizontal fit first.
    pub fn drop(&self, placement: Placement) -> Result<MoveOutcome> {
        if !placement.fits(self.width()) {
            return Err(Error::PlacementOutOfBounds {
                piece: placement.piece.letter(),
                rotation: placement.rotation as usize,
                column: placement.column as usize,
                width: self.width(),
            });
        }
        Ok(self.drop_unchecked(placement))
    }

    /// Drops a placement already known to fit horizontally.
    #[inline]
    pub fn drop_unchecked(&self, placement: Placement) -> MoveOutcome {
        let shape = &placement.piece.rotations()[placement.rotation as usize];
        let col = placement.column as usize;
        let w = shape.width as usize;

        let mut rest = 0usize;
        for dx in 0..w {
            let floor = self.heights[col + dx] as usize;
            let b = shape.bottom[dx] as usize;
            if floor > b && floor - b > rest {
                rest = floor - b;
            }
        }
        let ph = shape.height as usize;
        let landing_height = rest as f64 + (ph - 1) as f64 / 2.0;

        if rest + ph > self.height as usize {
            return MoveOutcome {
                post: *self,
                lines_cleared: 0,
                landing_height,
                eroded_cells: 0,
                terminal: true,
            };
        }

        let mut post = *self;
        let full = self.full_mask();
        let mut cleared = 0u8;
        let mut piece_cells_cleared = 0u8;
        let mut full_rows = 0u8; // bit dy set when row rest+dy became full
        for dy in 0..ph {
            let m = shape.row_masks[dy] << col;
            let r = &mut post.rows[rest + dy];
            *r |= m;
            if *r == full {
                cleared += 1;
                piece_cells_cleared += m.count_ones() as u8;
                full_rows |= 1 << dy;
            }
        }

        if cleared == 0 {
            for dx in 0..w {
                let top = (rest + shape.top[dx] as usize + 1) as u8;
                let h = &mut post.heights[col + dx];
                if top > *h {
                    *h = top;
                }
            }
        } else {
            let h = self.height as usize;
            let mut write = rest;
            for read in rest..h {
                let is_cleared = read < rest + ph && full_rows >> (read - rest) & 1 == 1;
                if !is_cleared {
                    post.rows[write] = post.rows[read];
                    write += 1;
                }
            }
            for r in write..h {
                post.rows[r] = 0;
            }
            post.recompute_heights();
        }

        MoveOutcome {
            post,
            lines_cleared: cleared,
            landing_height,
            eroded_cells: cleared * piece_cells_cleared,
            terminal: false,
        }
    }

    /// Whether `placement`'s cells overlap full cells when its bottom-left
    /// corner is at `row`. Cells above the grid count as free.
    pub fn collides_at(&self, placement: Placement, row: usize) -> bool {
        let Some(shape) = placement.shape() else {
            return true;
        };
        (0..shape.height as usize).any(|dy| {
            let r = row + dy;
            r < self.height() && self.rows[r] & (shape.row_masks[dy] << placement.column) != 0
        })
    }

    /// Parses the ASCII format: one line per row, top row first, `X` for a
    /// full cell and `.` for an empty one. Dimensions come from the text.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        let width = lines.first().map(|l| l.chars().count()).unwrap_or(0);
        Self::parse_lines(&lines, width, lines.len())
    }

    /// Parses the ASCII format, requiring the given dimensions.
    pub fn parse_with_dims(text: &str, width: usize, height: usize) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        Self::parse_lines(&lines, width, height)
    }

    fn parse_lines(lines: &[&str], width: usize, height: usize) -> Result<Self> {
        if lines.len() != height {
            return Err(Error::BoardParse {
                line: lines.len().min(height) + 1,
                msg: format!("expected {height} rows, found {}", lines.len()),
            });
        }
        let mut b = Self::empty(width, height).map_err(|e| Error::BoardParse {
            line: 1,
            msg: e.to_string(),
        })?;
        let full = b.full_mask();
        for (i, line) in lines.iter().enumerate() {
            let n = line.chars().count();
            if n != width {
                return Err(Error::BoardParse {
                    line: i + 1,
                    msg: format!("expected {width} cells, found {n}"),
                });
            }
            let mut mask = 0u16;
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    'X' => mask |= 1 << c,
                    '.' => {}
                    other => {
                        return Err(Error::BoardParse {
                            line: i + 1,
                            msg: format!("illegal character {other:?}"),
                        })
                    }
                }
            }
            if mask == full {
                return Err(Error::BoardParse {
                    line: i + 1,
                    msg: "row is full".into(),
                });
            }
            b.rows[height - 1 - i] = mask;
        }
        b.recompute_heights();
        Ok(b)
    }

    /// Renders the ASCII format, newline after every row.
    pub fn render(&self) -> String {
        let w = self.width();
        let mut s = String::with_capacity((w + 1) * self.height());
        for r in (0..self.height()).rev() {
            for c in 0..w {
                s.push(if self.is_full(c, r) { 'X' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BoardState {}x{} heights={:?}",
            self.width,
            self.height,
            self.heights()
        )?;
        f.write_str(&self.render())
    }
}

impl fmt::Display for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::PieceKind;

    fn empty() -> BoardState {
        BoardState::empty(10, 20).unwrap()
    }

    #[test]
    fn flat_i_on_empty_floor() {
        let o = empty().drop(Placement::new(PieceKind::I, 0, 0)).unwrap();
        assert!(!o.terminal);
        assert_eq!(o.lines_cleared, 0);
        assert_eq!(o.landing_height, 0.0);
        assert_eq!(o.post.heights(), &[1, 1, 1, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn vertical_i_landing_height() {
        let o = empty().drop(Placement::new(PieceKind::I, 1, 4)).unwrap();
        assert_eq!(o.landing_height, 1.5);
        assert_eq!(o.post.heights()[4], 4);
        for r in 0..4 {
            assert!(o.post.is_full(4, r));
        }
    }

    #[test]
    fn single_line_clear_shifts_rows_down() {
        // Bottom row full except columns 0..4, one extra cell on row 1.
        let b = BoardState::from_rows(10, 20, &[0b11_1111_0000, 0b10_0000_0000]).unwrap();
        let o = b.drop(Placement::new(PieceKind::I, 0, 0)).unwrap();
        assert_eq!(o.lines_cleared, 1);
        assert_eq!(o.eroded_cells, 4);
        assert_eq!(o.landing_height, 0.0);
        assert_eq!(o.post.rows()[0], 0b10_0000_0000);
        assert_eq!(o.post.rows()[1], 0);
        assert_eq!(o.post.heights(), &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn double_clear_with_one_piece_cell_per_line() {
        // Column 0 empty on rows 0 and 1, a vertical I fills both and sticks up.
        let row = 0b11_1111_1110;
        let b = BoardState::from_rows(10, 20, &[row, row]).unwrap();
        let o = b.drop(Placement::new(PieceKind::I, 1, 0)).unwrap();
        assert_eq!(o.lines_cleared, 2);
        assert_eq!(o.eroded_cells, 4);
        assert_eq!(o.post.heights()[0], 2);
        assert_eq!(o.post.cell_count(), 2);
    }

    #[test]
    fn overflow_is_terminal_and_leaves_board() {
        let mut rows = vec![0u16; 18];
        for r in rows.iter_mut() {
            *r = 0b1;
        }
        let b = BoardState::from_rows(10, 20, &rows).unwrap();
        let o = b.drop(Placement::new(PieceKind::I, 1, 0)).unwrap();
        assert!(o.terminal);
        assert_eq!(o.post, b);
        assert_eq!(o.lines_cleared, 0);
        // Horizontal still fits: rests on row 18.
        let o = b.drop(Placement::new(PieceKind::I, 0, 0)).unwrap();
        assert!(!o.terminal);
        assert_eq!(o.post.heights()[0], 19);
    }

    #[test]
    fn horizontal_fit_is_checked() {
        assert!(empty().drop(Placement::new(PieceKind::I, 0, 7)).is_err());
        assert!(empty().drop(Placement::new(PieceKind::O, 1, 0)).is_err());
    }

    #[test]
    fn parse_render() {
        let mut text = String::new();
        for _ in 0..19 {
            text.push_str("..........\n");
        }
        text.push_str("X.........\n");
        let b = BoardState::parse(&text).unwrap();
        assert_eq!(b.heights()[0], 1);
        assert_eq!(b.render(), text);

        let empty_text = "..........\n".repeat(20);
        assert!(BoardState::parse(&empty_text).unwrap().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(BoardState::parse_with_dims(&"..........\n".repeat(19), 10, 20).is_err());
        assert!(BoardState::parse(&format!("{}.........\n", "..........\n".repeat(3))).is_err());
        assert!(BoardState::parse(&format!("{}....o.....\n", "..........\n".repeat(3))).is_err());
        assert!(BoardState::parse(&format!("{}XXXXXXXXXX\n", "..........\n".repeat(3))).is_err());
    }

    #[test]
    fn from_rows_rejects_full_rows() {
        assert!(BoardState::from_rows(10, 20, &[0x3FF]).is_err());
        assert!(BoardState::from_rows(4, 4, &[0x10]).is_err());
    }
}
