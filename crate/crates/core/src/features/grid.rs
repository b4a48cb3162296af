//! Board-only feature primitives.
//!
//! Boundary convention: the side walls count as full for row transitions and
//! for well detection; the floor counts as full and the space above the top
//! row as empty for column transitions.

use crate::engine::BoardState;

/// Rows at or above this index are empty.
#[inline]
fn top_row(board: &BoardState) -> usize {
    board.pile_height()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HoleStats {
    /// Empty cells with at least one full cell above them in their column.
    pub holes: u32,
    /// Vertical runs of holes, each counted once.
    pub connected_holes: u32,
    /// Rows holding at least one hole.
    pub rows_with_holes: u32,
}

pub fn hole_stats(board: &BoardState) -> HoleStats {
    let rows = board.rows();
    let mut covered = 0u16;
    let mut above = 0u16;
    let mut s = HoleStats::default();
    for r in (0..top_row(board)).rev() {
        let row = rows[r];
        let holes = covered & !row;
        if holes != 0 {
            s.holes += holes.count_ones();
            s.rows_with_holes += 1;
            // A hole starts a new run when the cell above it is full.
            s.connected_holes += (holes & above).count_ones();
        }
        covered |= row;
        above = row;
    }
    s
}

#[inline]
pub fn holes(board: &BoardState) -> u32 {
    let rows = board.rows();
    let mut covered = 0u16;
    let mut n = 0;
    for r in (0..top_row(board)).rev() {
        n += (covered & !rows[r]).count_ones();
        covered |= rows[r];
    }
    n
}

/// Sum over holes of the number of full cells above each hole.
pub fn hole_depth(board: &BoardState) -> u32 {
    let rows = board.rows();
    let mut total = 0;
    // Full cells seen so far per column, scanning downward.
    let mut full_above = [0u32; crate::engine::MAX_WIDTH];
    for r in (0..top_row(board)).rev() {
        let row = rows[r];
        for (c, n) in full_above.iter_mut().enumerate().take(board.width()) {
            if row >> c & 1 == 1 {
                *n += 1;
            } else {
                total += *n;
            }
        }
    }
    total
}

/// Full/empty flips scanning each row from the left wall to the right wall.
#[inline]
pub fn row_transitions(board: &BoardState) -> u32 {
    let w = board.width();
    let top = top_row(board);
    let walls: u32 = 1 | 1 << (w + 1);
    let span: u32 = (1 << (w + 1)) - 1;
    let mut n = 0;
    for &row in &board.rows()[..top] {
        let x = (row as u32) << 1 | walls;
        n += ((x ^ (x >> 1)) & span).count_ones();
    }
    n + 2 * (board.height() - top) as u32
}

/// Full/empty flips scanning each column from the floor to above the top row.
#[inline]
pub fn column_transitions(board: &BoardState) -> u32 {
    let rows = board.rows();
    let top = top_row(board);
    let mut prev = board.full_mask();
    let mut n = 0;
    for &row in &rows[..top] {
        n += (prev ^ row).count_ones();
        prev = row;
    }
    // Row `top` (or the space above the grid) is empty.
    n + prev.count_ones()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WellStats {
    /// Sum over wells of 1 + 2 + ... + depth.
    pub cumulative: u32,
    pub max_depth: u32,
    /// Sum of well depths, i.e. the number of well cells.
    pub sum_depths: u32,
}

/// A well cell is empty, has nothing full above it in its column, and has
/// full cells (or walls) on both sides. A well is a vertical run of such
/// cells.
pub fn well_stats(board: &BoardState) -> WellStats {
    let w = board.width();
    let rows = board.rows();
    let full = board.full_mask();
    let left_wall: u16 = 1;
    let right_wall: u16 = 1 << (w - 1);
    let mut run = [0u32; crate::engine::MAX_WIDTH];
    let mut covered = 0u16;
    let mut prev_wells = 0u16;
    let mut s = WellStats::default();
    for r in (0..top_row(board)).rev() {
        let row = rows[r];
        let left_full = (row << 1 | left_wall) & full;
        let right_full = row >> 1 | right_wall;
        let wells = !(row | covered) & left_full & right_full & full;
        let mut ended = prev_wells & !wells;
        while ended != 0 {
            run[ended.trailing_zeros() as usize] = 0;
            ended &= ended - 1;
        }
        let mut m = wells;
        while m != 0 {
            let c = m.trailing_zeros() as usize;
            run[c] += 1;
            s.cumulative += run[c];
            s.sum_depths += 1;
            s.max_depth = s.max_depth.max(run[c]);
            m &= m - 1;
        }
        prev_wells = wells;
        covered |= row;
    }
    s
}

#[inline]
pub fn cumulative_wells(board: &BoardState) -> u32 {
    well_stats(board).cumulative
}

/// Distinct signed consecutive height differences `h[i] - h[i+1]` with
/// magnitude at most 2.
pub fn pattern_diversity(heights: &[u8]) -> u32 {
    let mut seen = 0u8;
    for pair in heights.windows(2) {
        let d = pair[0] as i32 - pair[1] as i32;
        if d.abs() <= 2 {
            seen |= 1 << (d + 2);
        }
    }
    seen.count_ones()
}

pub fn occupied_cells(board: &BoardState) -> u32 {
    board.rows().iter().map(|r| r.count_ones()).sum()
}

/// Each full cell on row `r` (floor = 0) counts `r + 1`.
pub fn weighted_occupied_cells(board: &BoardState) -> u32 {
    board
        .rows()
        .iter()
        .enumerate()
        .map(|(r, row)| (r as u32 + 1) * row.count_ones())
        .sum()
}

/// Absolute differences between neighbouring column heights.
pub fn height_diffs(heights: &[u8]) -> impl Iterator<Item = u32> + '_ {
    heights
        .windows(2)
        .map(|p| (p[0] as i32 - p[1] as i32).unsigned_abs())
}

pub fn mean_height(heights: &[u8]) -> f64 {
    heights.iter().map(|&h| h as f64).sum::<f64>() / heights.len() as f64
}

/// `exp(-|c - i h / 4|^2 / (2 (h / 5)^2))` for `i = 0..5`, with `c` the mean
/// column height and `h` the grid height.
pub fn rbf(mean: f64, grid_height: usize) -> [f64; 5] {
    let h = grid_height as f64;
    let sigma = h / 5.0;
    std::array::from_fn(|i| {
        let d = mean - i as f64 * h / 4.0;
        (-(d * d) / (2.0 * sigma * sigma)).exp()
    })
}

/// Every board-only primitive at once.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFeatures {
    pub holes: u32,
    pub connected_holes: u32,
    pub column_heights: Vec<u32>,
    pub height_diffs: Vec<u32>,
    pub sum_abs_height_diffs: u32,
    pub mean_height: f64,
    pub pile_height: u32,
    pub max_minus_min_height: u32,
    pub row_transitions: u32,
    pub column_transitions: u32,
    pub cumulative_wells: u32,
    pub max_well_depth: u32,
    pub sum_well_depths: u32,
    pub hole_depth: u32,
    pub rows_with_holes: u32,
    pub pattern_diversity: u32,
    pub occupied_cells: u32,
    pub weighted_occupied_cells: u32,
    pub rbf: [f64; 5],
}

impl GridFeatures {
    pub fn compute(board: &BoardState) -> Self {
        let heights = board.heights();
        let hs = hole_stats(board);
        let ws = well_stats(board);
        let diffs: Vec<u32> = height_diffs(heights).collect();
        let mean = mean_height(heights);
        let max = heights.iter().copied().max().unwrap_or(0) as u32;
        let min = heights.iter().copied().min().unwrap_or(0) as u32;
        Self {
            holes: hs.holes,
            connected_holes: hs.connected_holes,
            column_heights: heights.iter().map(|&h| h as u32).collect(),
            sum_abs_height_diffs: diffs.iter().sum(),
            height_diffs: diffs,
            mean_height: mean,
            pile_height: max,
            max_minus_min_height: max - min,
            row_transitions: row_transitions(board),
            column_transitions: column_transitions(board),
            cumulative_wells: ws.cumulative,
            max_well_depth: ws.max_depth,
            sum_well_depths: ws.sum_depths,
            hole_depth: hole_depth(board),
            rows_with_holes: hs.rows_with_holes,
            pattern_diversity: pattern_diversity(heights),
            occupied_cells: occupied_cells(board),
            weighted_occupied_cells: weighted_occupied_cells(board),
            rbf: rbf(mean, board.height()),
        }
    }

    /// `(name, value)` pairs with vector primitives expanded per index.
    pub fn named(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("holes".to_string(), self.holes as f64),
            ("connected_holes".to_string(), self.connected_holes as f64),
        ];
        for (i, h) in self.column_heights.iter().enumerate() {
            out.push((format!("column_height_{i}"), *h as f64));
        }
        for (i, d) in self.height_diffs.iter().enumerate() {
            out.push((format!("height_diff_{i}"), *d as f64));
        }
        let scalars = [
            ("sum_abs_height_diffs", self.sum_abs_height_diffs as f64),
            ("mean_height", self.mean_height),
            ("pile_height", self.pile_height as f64),
            ("max_minus_min_height", self.max_minus_min_height as f64),
            ("row_transitions", self.row_transitions as f64),
            ("column_transitions", self.column_transitions as f64),
            ("cumulative_wells", self.cumulative_wells as f64),
            ("max_well_depth", self.max_well_depth as f64),
            ("sum_well_depths", self.sum_well_depths as f64),
            ("hole_depth", self.hole_depth as f64),
            ("rows_with_holes", self.rows_with_holes as f64),
            ("pattern_diversity", self.pattern_diversity as f64),
            ("occupied_cells", self.occupied_cells as f64),
            (
                "weighted_occupied_cells",
                self.weighted_occupied_cells as f64,
            ),
        ];
        out.extend(scalars.iter().map(|(n, v)| (n.to_string(), *v)));
        for (i, v) in self.rbf.iter().enumerate() {
            out.push((format!("rbf_{i}"), *v));
        }
        out
    }
}
