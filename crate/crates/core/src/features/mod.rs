//! Feature primitives and the named feature sets.
//!
//! A feature vector describes one candidate move: board features are read
//! off the post-move board, move features (landing height, eroded cells,
//! cleared lines) off the [`MoveOutcome`], and the Lagoudakis deltas compare
//! the pre- and post-move boards.

pub mod grid;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{BoardState, MoveOutcome};
use crate::{Error, Result};

pub use grid::GridFeatures;

/// Largest feature dimension over all sets (Bertsekas on a width-16 board).
pub const MAX_DIM: usize = 2 * crate::engine::MAX_WIDTH + 1;

/// Which way a feature should move for a placement to be better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl Direction {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Direction::HigherIsBetter => 1.0,
            Direction::LowerIsBetter => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSetId {
    Bertsekas,
    Lagoudakis,
    Dellacherie,
    Bohm,
    Bcts,
    Dt,
    Rbf,
}

impl FeatureSetId {
    pub const ALL: [FeatureSetId; 7] = [
        FeatureSetId::Bertsekas,
        FeatureSetId::Lagoudakis,
        FeatureSetId::Dellacherie,
        FeatureSetId::Bohm,
        FeatureSetId::Bcts,
        FeatureSetId::Dt,
        FeatureSetId::Rbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSetId::Bertsekas => "bertsekas",
            FeatureSetId::Lagoudakis => "lagoudakis",
            FeatureSetId::Dellacherie => "dellacherie",
            FeatureSetId::Bohm => "bohm",
            FeatureSetId::Bcts => "bcts",
            FeatureSetId::Dt => "dt",
            FeatureSetId::Rbf => "rbf",
        }
    }

    /// Vector length on a board of the given width. Only Bertsekas depends
    /// on the width (one height and one difference per column); on the
    /// standard 10-wide board it has 21 features.
    pub fn dimension(self, width: usize) -> usize {
        match self {
            FeatureSetId::Bertsekas => 2 * width + 1,
            FeatureSetId::Lagoudakis => 9,
            FeatureSetId::Dellacherie => 6,
            FeatureSetId::Bohm => 11,
            FeatureSetId::Bcts => 8,
            FeatureSetId::Dt => 9,
            FeatureSetId::Rbf => 5,
        }
    }

    pub fn feature_names(self, width: usize) -> Vec<String> {
        let fixed: &[&str] = match self {
            FeatureSetId::Bertsekas => {
                let mut v: Vec<String> = (0..width).map(|i| format!("column_height_{i}")).collect();
                v.extend((0..width - 1).map(|i| format!("height_diff_{i}")));
                v.push("holes".into());
                v.push("pile_height".into());
                return v;
            }
            FeatureSetId::Lagoudakis => &[
                "holes",
                "pile_height",
                "sum_abs_height_diffs",
                "mean_height",
                "delta_holes",
                "delta_pile_height",
                "delta_sum_abs_height_diffs",
                "delta_mean_height",
                "cleared_lines",
            ],
            FeatureSetId::Dellacherie => &DELLACHERIE_NAMES,
            FeatureSetId::Bohm => &[
                "pile_height",
                "connected_holes",
                "cleared_lines",
                "max_minus_min_height",
                "max_well_depth",
                "sum_well_depths",
                "landing_height",
                "occupied_cells",
                "weighted_occupied_cells",
                "row_transitions",
                "column_transitions",
            ],
            FeatureSetId::Bcts => &[
                "holes",
                "landing_height",
                "row_transitions",
                "column_transitions",
                "cumulative_wells",
                "eroded_cells",
                "hole_depth",
                "rows_with_holes",
            ],
            FeatureSetId::Dt => &[
                "holes",
                "landing_height",
                "row_transitions",
                "column_transitions",
                "cumulative_wells",
                "eroded_cells",
                "hole_depth",
                "rows_with_holes",
                "pattern_diversity",
            ],
            FeatureSetId::Rbf => &["rbf_0", "rbf_1", "rbf_2", "rbf_3", "rbf_4"],
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    /// Preferred direction of each feature. Everything that grows with
    /// stack height, roughness or holes is worse when higher; eroded cells,
    /// cleared lines and the lowest RBF bump (near-empty board) are better
    /// when higher.
    pub fn orientation(self, width: usize) -> Vec<Direction> {
        use Direction::*;
        self.feature_names(width)
            .iter()
            .map(|n| match n.as_str() {
                "eroded_cells" | "cleared_lines" | "rbf_0" => HigherIsBetter,
                _ => LowerIsBetter,
            })
            .collect()
    }
}

const DELLACHERIE_NAMES: [&str; 6] = [
    "holes",
    "landing_height",
    "row_transitions",
    "column_transitions",
    "cumulative_wells",
    "eroded_cells",
];

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('ö', "o");
        FeatureSetId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::UnknownFeatureSet(s.to_string()))
    }
}

impl TryFrom<String> for FeatureSetId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureSetId> for String {
    fn from(id: FeatureSetId) -> String {
        id.name().to_string()
    }
}

/// A candidate move: the board it was made from and what it did.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub pre: &'a BoardState,
    pub outcome: &'a MoveOutcome,
}

impl<'a> FeatureContext<'a> {
    pub fn new(pre: &'a BoardState, outcome: &'a MoveOutcome) -> Self {
        Self { pre, outcome }
    }
}

impl MoveOutcome {
    /// The outcome of "no move": the board itself with all move features
    /// zero. Used to describe a resting board.
    pub fn noop(board: &BoardState) -> MoveOutcome {
        MoveOutcome {
            post: *board,
            lines_cleared: 0,
            landing_height: 0.0,
            eroded_cells: 0,
            terminal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub set: FeatureSetId,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn named(&self, width: usize) -> Vec<(String, f64)> {
        self.set
            .feature_names(width)
            .into_iter()
            .zip(self.values.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveFeatures {
    pub landing_height: f64,
    pub eroded_cells: u32,
    pub cleared_lines: u32,
}

pub fn move_features(outcome: &MoveOutcome) -> MoveFeatures {
    MoveFeatures {
        landing_height: outcome.landing_height,
        eroded_cells: outcome.eroded_cells as u32,
        cleared_lines: outcome.lines_cleared as u32,
    }
}

/// `post - pre` for the four Lagoudakis state features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaFeatures {
    pub holes: f64,
    pub pile_height: f64,
    pub sum_abs_height_diffs: f64,
    pub mean_height: f64,
}

struct Summary {
    holes: f64,
    pile: f64,
    bumpiness: f64,
    mean: f64,
}

fn summary(board: &BoardState) -> Summary {
    let h = board.heights();
    Summary {
        holes: grid::holes(board) as f64,
        pile: board.pile_height() as f64,
        bumpiness: grid::height_diffs(h).sum::<u32>() as f64,
        mean: grid::mean_height(h),
    }
}

pub fn delta_features(pre: &BoardState, post: &BoardState) -> DeltaFeatures {
    let a = summary(pre);
    let b = summary(post);
    DeltaFeatures {
        holes: b.holes - a.holes,
        pile_height: b.pile - a.pile,
        sum_abs_height_diffs: b.bumpiness - a.bumpiness,
        mean_height: b.mean - a.mean,
    }
}

/// Builds the ordered vector for `set`.
pub fn extract(set: FeatureSetId, ctx: FeatureContext<'_>) -> FeatureVector {
    let mut buf = [0.0; MAX_DIM];
    let n = extract_into(set, ctx, &mut buf);
    FeatureVector {
        set,
        values: buf[..n].to_vec(),
    }
}

/// Writes the ordered vector for `set` into `out` and returns its length.
/// Only the primitives the set needs are computed.
///
/// Panics if `out` is shorter than the set's dimension.
#[inline]
pub fn extract_into(set: FeatureSetId, ctx: FeatureContext<'_>, out: &mut [f64]) -> usize {
    let post = &ctx.outcome.post;
    let mv = move_features(ctx.outcome);
    match set {
        FeatureSetId::Bertsekas => {
            let h = post.heights();
            let w = h.len();
            for (o, &v) in out.iter_mut().zip(h) {
                *o = v as f64;
            }
            for (o, d) in out[w..].iter_mut().zip(grid::height_diffs(h)) {
                *o = d as f64;
            }
            out[2 * w - 1] = grid::holes(post) as f64;
            out[2 * w] = post.pile_height() as f64;
            2 * w + 1
        }
        FeatureSetId::Lagoudakis => {
            let a = summary(ctx.pre);
            let b = summary(post);
            out[..9].copy_from_slice(&[
                b.holes,
                b.pile,
                b.bumpiness,
                b.mean,
                b.holes - a.holes,
                b.pile - a.pile,
                b.bumpiness - a.bumpiness,
                b.mean - a.mean,
                mv.cleared_lines as f64,
            ]);
            9
        }
        FeatureSetId::Dellacherie => {
            dellacherie_into(post, &mv, out);
            6
        }
        FeatureSetId::Bcts | FeatureSetId::Dt => {
            let hs = grid::hole_stats(post);
            out[0] = hs.holes as f64;
            out[1] = mv.landing_height;
            out[2] = grid::row_transitions(post) as f64;
            out[3] = grid::column_transitions(post) as f64;
            out[4] = grid::cumulative_wells(post) as f64;
            out[5] = mv.eroded_cells as f64;
            out[6] = grid::hole_depth(post) as f64;
            out[7] = hs.rows_with_holes as f64;
            if set == FeatureSetId::Dt {
                out[8] = grid::pattern_diversity(post.heights()) as f64;
                9
            } else {
                8
            }
        }
        FeatureSetId::Bohm => {
            let h = post.heights();
            let max = h.iter().copied().max().unwrap_or(0);
            let min = h.iter().copied().min().unwrap_or(0);
            let ws = grid::well_stats(post);
            out[..11].copy_from_slice(&[
                max as f64,
                grid::hole_stats(post).connected_holes as f64,
                mv.cleared_lines as f64,
                (max - min) as f64,
                ws.max_depth as f64,
                ws.sum_depths as f64,
                mv.landing_height,
                grid::occupied_cells(post) as f64,
                grid::weighted_occupied_cells(post) as f64,
                grid::row_transitions(post) as f64,
                grid::column_transitions(post) as f64,
            ]);
            11
        }
        FeatureSetId::Rbf => {
            let r = grid::rbf(grid::mean_height(post.heights()), post.height());
            out[..5].copy_from_slice(&r);
            5
        }
    }
}

#[inline]
fn dellacherie_into(post: &BoardState, mv: &MoveFeatures, out: &mut [f64]) {
    out[0] = grid::holes(post) as f64;
    out[1] = mv.landing_height;
    out[2] = grid::row_transitions(post) as f64;
    out[3] = grid::column_transitions(post) as f64;
    out[4] = grid::cumulative_wells(post) as f64;
    out[5] = mv.eroded_cells as f64;
}
