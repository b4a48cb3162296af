//! Linear afterstate evaluation and greedy placement selection.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{for_each_placement, BoardState, MoveOutcome, PieceKind, Placement};
use crate::features::{self, FeatureContext, FeatureSetId, FeatureVector, MAX_DIM};
use crate::{Error, Result};

/// A feature set plus one weight per feature. The value of a candidate move
/// is the dot product of the weights with its feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    name: String,
    set: FeatureSetId,
    weights: Vec<f64>,
}

/// Dellacherie's hand-tuned weights over holes, landing height, row
/// transitions, column transitions, cumulative wells and eroded cells.
pub const DELLACHERIE_WEIGHTS: [f64; 6] = [-4.0, -1.0, -1.0, -1.0, -1.0, 1.0];

pub fn dellacherie_policy() -> LinearPolicy {
    LinearPolicy {
        name: "dellacherie".into(),
        set: FeatureSetId::Dellacherie,
        weights: DELLACHERIE_WEIGHTS.to_vec(),
    }
}

/// How the two-piece lookahead values a first move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lookahead {
    /// Best evaluation over the next piece's placements only.
    #[default]
    Pure,
    /// First-move evaluation plus the best second-move evaluation.
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub placement: Placement,
    pub features: FeatureVector,
    /// `-inf` for terminal (overflowing) moves.
    pub score: f64,
    pub terminal: bool,
}

/// Every candidate that was considered and which one was picked.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
}

/// The selected move together with its already-computed outcome.
#[derive(Debug, Clone, Copy)]
pub struct Choice {
    pub placement: Placement,
    pub outcome: MoveOutcome,
    pub score: f64,
}

fn valid_len(set: FeatureSetId, len: usize) -> bool {
    match set {
        FeatureSetId::Bertsekas => len % 2 == 1 && (9..=MAX_DIM).contains(&len),
        other => len == other.dimension(10),
    }
}

impl LinearPolicy {
    pub fn new(name: impl Into<String>, set: FeatureSetId, weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight(i));
        }
        if !valid_len(set, weights.len()) {
            return Err(Error::DimensionMismatch {
                expected: set.dimension(10),
                got: weights.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            set,
            weights,
        })
    }

    pub fn zeros(set: FeatureSetId, width: usize) -> Self {
        Self {
            name: "zero".into(),
            set,
            weights: vec![0.0; set.dimension(width)],
        }
    }

    /// A policy by built-in name. Only `dellacherie` exists.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "dellacherie" => Some(dellacherie_policy()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set(&self) -> FeatureSetId {
        self.set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The same policy with every weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            name: self.name.clone(),
            set: self.set,
            weights: self.weights.iter().map(|w| w * k).collect(),
        }
    }

    /// Checks that the weight vector matches the feature dimension on a
    /// board of this width.
    pub fn check_width(&self, width: usize) -> Result<()> {
        let expected = self.set.dimension(width);
        if expected != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.weights.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, ctx: FeatureContext<'_>) -> Result<f64> {
        self.check_width(ctx.pre.width())?;
        Ok(self.score(ctx))
    }

    /// Dot product without the dimension check.
    #[inline]
    pub fn score(&self, ctx: FeatureContext<'_>) -> f64 {
        self.scored(ctx).value
    }

    #[inline]
    fn scored(&self, ctx: FeatureContext<'_>) -> Score {
        let mut buf = [0.0; MAX_DIM];
        let n = features::extract_into(self.set, ctx, &mut buf);
        Score::dot(&self.weights, &buf[..n])
    }

    #[inline]
    fn score_outcome(&self, pre: &BoardState, outcome: &MoveOutcome) -> Score {
        if outcome.terminal {
            Score::TERMINAL
        } else {
            self.scored(FeatureContext::new(pre, outcome))
        }
    }

    /// Greedy choice over all placements. Terminal moves score `-inf`; ties
    /// go to the earliest placement in enumeration order. Scores that agree
    /// to within floating-point rounding of the dot product count as ties,
    /// so the choice does not change when every weight is multiplied by the
    /// same positive factor.
    #[inline]
    pub fn choose(&self, board: &BoardState, piece: PieceKind) -> Choice {
        self.choose_scored(board, piece).0
    }

    fn choose_scored(&self, board: &BoardState, piece: PieceKind) -> (Choice, Score) {
        let mut best: Option<(Choice, Score)> = None;
        let n = self.weights.len();
        for_each_placement(board.width(), piece, |placement| {
            let outcome = board.drop_unchecked(placement);
            let score = self.score_outcome(board, &outcome);
            if best.as_ref().map_or(true, |(_, b)| score.beats(b, n)) {
                best = Some((
                    Choice {
                        placement,
                        outcome,
                        score: score.value,
                    },
                    score,
                ));
            }
        });
        best.expect("every piece has at least one placement on a board of width >= 4")
    }

    /// Greedy choice with the full list of evaluated candidates.
    pub fn select_action(
        &self,
        board: &BoardState,
        piece: PieceKind,
    ) -> (Placement, DecisionTrace) {
        let mut candidates: Vec<Candidate> = Vec::with_capacity(34);
        let mut chosen = 0;
        let mut best = Score::TERMINAL;
        let n = self.weights.len();
        for_each_placement(board.width(), piece, |placement| {
            let outcome = board.drop_unchecked(placement);
            let ctx = FeatureContext::new(board, &outcome);
            let features = features::extract(self.set, ctx);
            let score = if outcome.terminal {
                Score::TERMINAL
            } else {
                Score::dot(&self.weights, &features.values)
            };
            if !candidates.is_empty() && score.beats(&best, n) {
                chosen = candidates.len();
            }
            if candidates.len() == chosen {
                best = score;
            }
            candidates.push(Candidate {
                placement,
                features,
                score: score.value,
                terminal: outcome.terminal,
            });
        });
        (
            candidates[chosen].placement,
            DecisionTrace { candidates, chosen },
        )
    }

    /// Chooses the current placement by looking one piece ahead: each
    /// non-terminal first move is valued by the best evaluation over the
    /// next piece's placements on the resulting board (plus the first
    /// move's own evaluation under [`Lookahead::Sum`]). Terminal first moves
    /// are never preferred; if no first move leaves any non-terminal
    /// second move, this falls back to the greedy choice.
    pub fn select_action_two_piece(
        &self,
        board: &BoardState,
        piece: PieceKind,
        next: PieceKind,
        mode: Lookahead,
    ) -> Placement {
        let mut best: Option<(Placement, Score)> = None;
        let n = self.weights.len();
        for_each_placement(board.width(), piece, |first| {
            let o1 = board.drop_unchecked(first);
            if o1.terminal {
                return;
            }
            let second = self.choose_scored(&o1.post, next).1;
            let value = match mode {
                Lookahead::Pure => second,
                Lookahead::Sum => second.plus(&self.score_outcome(board, &o1)),
            };
            if best.as_ref().map_or(true, |(_, b)| value.beats(b, n)) {
                best = Some((first, value));
            }
        });
        match best {
            Some((p, v)) if v.value > f64::NEG_INFINITY => p,
            _ => self.choose(board, piece).placement,
        }
    }

    pub fn to_file(&self) -> PolicyFile {
        PolicyFile {
            name: self.name.clone(),
            feature_set: self.set,
            weights: self.weights.clone(),
            created: String::new(),
            notes: String::new(),
            manifest: None,
        }
    }

    /// A built-in policy name or the path of a policy file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::builtin(spec) {
            Some(p) => Ok(p),
            None => PolicyFile::load(spec)?.into_policy(),
        }
    }
}

/// A dot product together with the sum of its absolute terms, which bounds
/// its rounding error.
#[derive(Debug, Clone, Copy)]
struct Score {
    value: f64,
    magnitude: f64,
}

impl Score {
    const TERMINAL: Score = Score {
        value: f64::NEG_INFINITY,
        magnitude: 0.0,
    };

    #[inline]
    fn dot(a: &[f64], b: &[f64]) -> Self {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for (x, y) in a.iter().zip(b) {
            let t = x * y;
            value += t;
            magnitude += t.abs();
        }
        Self { value, magnitude }
    }

    fn plus(&self, other: &Score) -> Self {
        Self {
            value: self.value + other.value,
            magnitude: self.magnitude + other.magnitude,
        }
    }

    /// Strictly greater by more than the accumulated rounding error of two
    /// `n`-term dot products whose weights were themselves rounded once.
    #[inline]
    fn beats(&self, other: &Score, n: usize) -> bool {
        let tol = (n as f64 + 2.0) * f64::EPSILON * (self.magnitude + other.magnitude);
        self.value - other.value > tol
    }
}

/// On-disk policy document (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub name: String,
    pub feature_set: FeatureSetId,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub created: String,
    #[serde(default)]
    pub notes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<toml::Table>,
}

impl PolicyFile {
    pub fn into_policy(self) -> Result<LinearPolicy> {
        LinearPolicy::new(self.name, self.feature_set, self.weights)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::PolicyFile(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("policy file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::PolicyFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}
