//! Brute-force reference implementations used as test oracles. Everything
//! here works on a plain `Vec<Vec<bool>>` grid read cell by cell, with no
//! cached heights and no bit tricks.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tetrislab::engine::{BoardState, PieceKind, Placement};

/// `grid[r][c]`, row 0 is the floor.
pub type Grid = Vec<Vec<bool>>;

pub fn grid_of(board: &BoardState) -> Grid {
    // Read back through the ASCII rendering so nothing depends on row masks.
    let text = board.render();
    let lines: Vec<&str> = text.lines().collect();
    let h = lines.len();
    (0..h)
        .map(|r| lines[h - 1 - r].chars().map(|ch| ch == 'X').collect())
        .collect()
}

pub fn heights(g: &Grid) -> Vec<u32> {
    let h = g.len();
    let w = g[0].len();
    (0..w)
        .map(|c| {
            (0..h)
                .rev()
                .find(|&r| g[r][c])
                .map(|r| r as u32 + 1)
                .unwrap_or(0)
        })
        .collect()
}

fn full_above(g: &Grid, c: usize, r: usize) -> u32 {
    (r + 1..g.len()).filter(|&k| g[k][c]).count() as u32
}

fn is_hole(g: &Grid, c: usize, r: usize) -> bool {
    !g[r][c] && full_above(g, c, r) > 0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
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

impl Reference {
    /// Same names and order as the `grid` set printed by `features dump`.
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
        for (n, v) in [
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
        ] {
            out.push((n.to_string(), v));
        }
        for (i, v) in self.rbf.iter().enumerate() {
            out.push((format!("rbf_{i}"), *v));
        }
        out
    }
}

pub fn reference(g: &Grid) -> Reference {
    let h = g.len();
    let w = g[0].len();
    let hs = heights(g);

    let mut holes = 0;
    let mut hole_depth = 0;
    let mut rows_with_holes = 0;
    for r in 0..h {
        let mut any = false;
        for c in 0..w {
            if is_hole(g, c, r) {
                holes += 1;
                hole_depth += full_above(g, c, r);
                any = true;
            }
        }
        rows_with_holes += any as u32;
    }

    let mut connected_holes = 0;
    for c in 0..w {
        let mut in_run = false;
        for r in 0..h {
            let hole = is_hole(g, c, r);
            if hole && !in_run {
                connected_holes += 1;
            }
            in_run = hole;
        }
    }

    let mut row_transitions = 0;
    for row in g {
        let mut seq = vec![true];
        seq.extend(row.iter().copied());
        seq.push(true);
        row_transitions += seq.windows(2).filter(|p| p[0] != p[1]).count() as u32;
    }

    let mut column_transitions = 0;
    for c in 0..w {
        let mut seq = vec![true];
        seq.extend((0..h).map(|r| g[r][c]));
        seq.push(false);
        column_transitions += seq.windows(2).filter(|p| p[0] != p[1]).count() as u32;
    }

    let full = |c: isize, r: usize| c < 0 || c >= w as isize || g[r][c as usize];
    let is_well = |c: usize, r: usize| {
        !g[r][c] && full_above(g, c, r) == 0 && full(c as isize - 1, r) && full(c as isize + 1, r)
    };
    let (mut cumulative_wells, mut max_well_depth, mut sum_well_depths) = (0, 0, 0);
    for c in 0..w {
        let mut depth = 0u32;
        // One step past the floor (r = -1) closes a run that reaches it.
        for r in (-1..h as isize).rev() {
            let well = r >= 0 && is_well(c, r as usize);
            if well {
                depth += 1;
            } else if depth > 0 {
                cumulative_wells += (1..=depth).sum::<u32>();
                sum_well_depths += depth;
                max_well_depth = max_well_depth.max(depth);
                depth = 0;
            }
        }
    }

    let diffs_signed: Vec<i64> = hs.windows(2).map(|p| p[0] as i64 - p[1] as i64).collect();
    let height_diffs: Vec<u32> = diffs_signed
        .iter()
        .map(|d| d.unsigned_abs() as u32)
        .collect();
    let mut patterns: Vec<i64> = diffs_signed
        .iter()
        .copied()
        .filter(|d| d.abs() < 3)
        .collect();
    patterns.sort();
    patterns.dedup();

    let mut occupied_cells = 0;
    let mut weighted_occupied_cells = 0;
    for (r, row) in g.iter().enumerate() {
        for &cell in row {
            if cell {
                occupied_cells += 1;
                weighted_occupied_cells += r as u32 + 1;
            }
        }
    }

    let mean_height = hs.iter().map(|&x| x as f64).sum::<f64>() / w as f64;
    let hh = h as f64;
    let mut rbf = [0.0; 5];
    for (i, v) in rbf.iter_mut().enumerate() {
        let num = (mean_height - i as f64 * hh / 4.0).abs().powi(2);
        *v = (-num / (2.0 * (hh / 5.0).powi(2))).exp();
    }

    let pile = *hs.iter().max().unwrap();
    let low = *hs.iter().min().unwrap();
    Reference {
        holes,
        connected_holes,
        sum_abs_height_diffs: height_diffs.iter().sum(),
        height_diffs,
        mean_height,
        pile_height: pile,
        max_minus_min_height: pile - low,
        row_transitions,
        column_transitions,
        cumulative_wells,
        max_well_depth,
        sum_well_depths,
        hole_depth,
        rows_with_holes,
        pattern_diversity: patterns.len() as u32,
        occupied_cells,
        weighted_occupied_cells,
        rbf,
        column_heights: hs,
    }
}

/// Cells of a placement offset by a bottom-left corner at `row`.
fn cells(p: Placement, row: isize) -> Vec<(isize, isize)> {
    p.shape()
        .unwrap()
        .cells
        .iter()
        .map(|&(dx, dy)| (p.column as isize + dx as isize, row + dy as isize))
        .collect()
}

/// Result of a cell-by-cell gravity simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RefDrop {
    pub terminal: bool,
    pub grid: Grid,
    pub lines: u32,
    pub landing_height: f64,
    pub eroded: u32,
}

/// Lowers the piece one row at a time from above the grid until it would
/// hit the floor or a full cell, then places it and clears full rows.
pub fn simulate_drop(g: &Grid, p: Placement) -> RefDrop {
    let h = g.len() as isize;
    let blocked = |row: isize| {
        cells(p, row)
            .iter()
            .any(|&(c, r)| r < 0 || (r < h && g[r as usize][c as usize]))
    };
    let mut row = h;
    while !blocked(row - 1) {
        row -= 1;
    }
    let cs = cells(p, row);
    let top = cs.iter().map(|c| c.1).max().unwrap();
    let bottom = cs.iter().map(|c| c.1).min().unwrap();
    let landing_height = (top + bottom) as f64 / 2.0;
    if top >= h {
        return RefDrop {
            terminal: true,
            grid: g.clone(),
            lines: 0,
            landing_height,
            eroded: 0,
        };
    }
    let mut next = g.clone();
    for &(c, r) in &cs {
        next[r as usize][c as usize] = true;
    }
    let full_rows: Vec<usize> = (0..g.len())
        .filter(|&r| next[r].iter().all(|&x| x))
        .collect();
    let piece_cells_in_full = cs
        .iter()
        .filter(|&&(_, r)| full_rows.contains(&(r as usize)))
        .count() as u32;
    let w = g[0].len();
    let mut kept: Grid = next
        .into_iter()
        .enumerate()
        .filter(|(r, _)| !full_rows.contains(r))
        .map(|(_, row)| row)
        .collect();
    while kept.len() < g.len() {
        kept.push(vec![false; w]);
    }
    RefDrop {
        terminal: false,
        grid: kept,
        lines: full_rows.len() as u32,
        landing_height,
        eroded: full_rows.len() as u32 * piece_cells_in_full,
    }
}

/// Counts placements by trying every rotation index and every column in
/// the board, keeping those whose cells all lie inside the side walls.
pub fn brute_force_placement_count(width: usize, piece: PieceKind) -> usize {
    let mut n = 0;
    for rot in 0..piece.rotations().len() {
        for col in 0..width {
            let p = Placement::new(piece, rot, col);
            if cells(p, 0).iter().all(|&(c, _)| (c as usize) < width) {
                n += 1;
            }
        }
    }
    n
}

/// A random valid board: ragged columns with scattered holes and no full
/// rows.
pub fn random_board(rng: &mut ChaCha8Rng, width: usize, height: usize) -> BoardState {
    let max_h = rng.gen_range(0..=height);
    let mut rows = vec![0u16; height];
    for c in 0..width {
        let h = rng.gen_range(0..=max_h);
        let density = rng.gen_range(0.5..1.0);
        for (r, row) in rows.iter_mut().enumerate().take(h) {
            if r + 1 == h || rng.gen_bool(density) {
                *row |= 1 << c;
            }
        }
    }
    let full = ((1u32 << width) - 1) as u16;
    for row in rows.iter_mut() {
        if *row == full {
            *row &= !(1 << rng.gen_range(0..width));
        }
    }
    BoardState::from_rows(width, height, &rows).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
