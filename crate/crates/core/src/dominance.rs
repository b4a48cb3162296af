//! Action filters that drop placements which cannot be best under any
//! weighting consistent with known feature directions (simple dominance) or
//! a known importance order as well (cumulative dominance).

use rayon::prelude::*;

use crate::engine::{for_each_placement, EpisodeState, GameConfig, PieceKind};
use crate::features::{self, FeatureContext, FeatureVector, MAX_DIM};
use crate::policy::LinearPolicy;
use crate::{seeds, Error, Result};

pub use crate::features::Direction;

/// One direction per feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationSpec(pub Vec<Direction>);

impl OrientationSpec {
    /// Directions from a policy's weight signs; zero weights fall back to
    /// the feature set's own orientation metadata.
    pub fn from_policy(policy: &LinearPolicy, width: usize) -> Self {
        let meta = policy.set().orientation(width);
        OrientationSpec(
            policy
                .weights()
                .iter()
                .zip(meta)
                .map(|(&w, m)| {
                    if w > 0.0 {
                        Direction::HigherIsBetter
                    } else if w < 0.0 {
                        Direction::LowerIsBetter
                    } else {
                        m
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Feature indices, most important first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceOrder(pub Vec<usize>);

impl ImportanceOrder {
    pub fn identity(d: usize) -> Self {
        ImportanceOrder((0..d).collect())
    }

    /// Descending `|weight|`, ties in index order.
    pub fn from_policy(policy: &LinearPolicy) -> Self {
        let w = policy.weights();
        let mut idx: Vec<usize> = (0..w.len()).collect();
        idx.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()));
        ImportanceOrder(idx)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let mut seen = vec![false; d];
        if self.0.len() != d {
            return Err(Error::InvalidOrder(d));
        }
        for &i in &self.0 {
            if i >= d || seen[i] {
                return Err(Error::InvalidOrder(d));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

fn check(candidates: &[FeatureVector], orient: &OrientationSpec) -> Result<usize> {
    let first = candidates.first().ok_or(Error::EmptyCandidates)?;
    let d = first.len();
    if orient.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: orient.len(),
        });
    }
    if let Some(bad) = candidates
        .iter()
        .find(|c| c.len() != d || c.set != first.set)
    {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    Ok(d)
}

/// `a` dominates `b` when it is at least as good everywhere and strictly
/// better somewhere.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices of rows that are neither dominated nor a later exact duplicate.
fn survivors(rows: &[Vec<f64>]) -> Vec<usize> {
    (0..rows.len())
        .filter(|&j| {
            !rows
                .iter()
                .enumerate()
                .any(|(i, r)| (i < j && *r == rows[j]) || dominates(r, &rows[j]))
        })
        .collect()
}

fn oriented(c: &FeatureVector, orient: &OrientationSpec) -> Vec<f64> {
    c.values
        .iter()
        .zip(&orient.0)
        .map(|(v, d)| v * d.sign())
        .collect()
}

/// Indices (in input order) of candidates that no other candidate simply
/// dominates. Of several identical candidates only the first is kept.
pub fn simple_dominance_filter(
    candidates: &[FeatureVector],
    orient: &OrientationSpec,
) -> Result<Vec<usize>> {
    check(candidates, orient)?;
    let rows: Vec<Vec<f64>> = candidates.iter().map(|c| oriented(c, orient)).collect();
    Ok(survivors(&rows))
}

/// Indices of candidates not cumulatively dominated: with features oriented
/// and sorted by importance, `a` beats `b` when every prefix sum of `a` is at
/// least `b`'s and one is strictly greater.
///
/// With `standardize`, each feature is first z-scored across the candidate
/// set (features with zero spread become 0).
pub fn cumulative_dominance_filter(
    candidates: &[FeatureVector],
    orient: &OrientationSpec,
    order: &ImportanceOrder,
    standardize: bool,
) -> Result<Vec<usize>> {
    let d = check(candidates, orient)?;
    order.validate(d)?;
    let mut rows: Vec<Vec<f64>> = candidates.iter().map(|c| oriented(c, orient)).collect();
    if standardize {
        zscore_columns(&mut rows, d);
    }
    let prefixes: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut acc = 0.0;
            order
                .0
                .iter()
                .map(|&i| {
                    acc += r[i];
                    acc
                })
                .collect()
        })
        .collect();
    Ok(survivors(&prefixes))
}

fn zscore_columns(rows: &mut [Vec<f64>], d: usize) {
    let n = rows.len() as f64;
    for k in 0..d {
        let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for r in rows.iter_mut() {
            r[k] = if sd > 0.0 { (r[k] - mean) / sd } else { 0.0 };
        }
    }
}

/// Counts for one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionRecord {
    pub game: usize,
    pub decision: usize,
    pub piece: PieceKind,
    pub raw: usize,
    pub simple: usize,
    pub cumulative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterReport {
    pub records: Vec<DecisionRecord>,
    pub median_raw: f64,
    pub median_simple: f64,
    pub median_cumulative: f64,
}

impl FilterReport {
    fn from_records(records: Vec<DecisionRecord>) -> Self {
        let med = |f: fn(&DecisionRecord) -> usize| median(records.iter().map(f).collect());
        Self {
            median_raw: med(|r| r.raw),
            median_simple: med(|r| r.simple),
            median_cumulative: med(|r| r.cumulative),
            records,
        }
    }

    /// One `key=value` line per decision, then a `[summary]` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&format!(
                "game={} decision={} piece={} raw={} simple={} cumulative={}\n",
                r.game, r.decision, r.piece, r.raw, r.simple, r.cumulative
            ));
        }
        s.push_str(&self.summary());
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "[summary]\ndecisions = {}\nmedian_raw = {}\nmedian_simple = {}\nmedian_cumulative = {}\n",
            self.records.len(),
            self.median_raw,
            self.median_simple,
            self.median_cumulative
        )
    }
}

fn median(mut v: Vec<usize>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Options for [`filter_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    /// Decisions recorded per game at most; the game is cut off there.
    pub piece_cap: u64,
    pub standardize: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            piece_cap: 2_000,
            standardize: false,
        }
    }
}

/// Survivor counts at one decision. Candidates whose drop overflows are
/// counted in `raw` but not filtered, unless every candidate overflows, in
/// which case all are kept as a single survivor.
pub fn filter_decision(
    policy: &LinearPolicy,
    orient: &OrientationSpec,
    order: &ImportanceOrder,
    board: &crate::engine::BoardState,
    piece: PieceKind,
    standardize: bool,
) -> Result<(usize, usize, usize)> {
    let mut raw = 0;
    let mut live = Vec::with_capacity(34);
    let mut buf = [0.0; MAX_DIM];
    for_each_placement(board.width(), piece, |p| {
        raw += 1;
        let o = board.drop_unchecked(p);
        if !o.terminal {
            let n = features::extract_into(policy.set(), FeatureContext::new(board, &o), &mut buf);
            live.push(FeatureVector {
                set: policy.set(),
                values: buf[..n].to_vec(),
            });
        }
    });
    if live.is_empty() {
        return Ok((raw, 1, 1));
    }
    let simple = simple_dominance_filter(&live, orient)?.len();
    let cumulative = cumulative_dominance_filter(&live, orient, order, standardize)?.len();
    Ok((raw, simple, cumulative))
}

/// Plays `n_games` seeded games with `policy` and records, at every
/// decision, how many placements exist and how many survive each filter.
/// Orientation and importance come from the policy's weights.
pub fn filter_stats(
    policy: &LinearPolicy,
    n_games: usize,
    seed: u64,
    config: &GameConfig,
    options: FilterOptions,
) -> Result<FilterReport> {
    if n_games == 0 {
        return Err(Error::InvalidArgument("n_games must be at least 1".into()));
    }
    config.validate()?;
    policy.check_width(config.width)?;
    let orient = OrientationSpec::from_policy(policy, config.width);
    let order = ImportanceOrder::from_policy(policy);
    let game_seeds = seeds::expand(seed, n_games);

    let per_game: Vec<Result<Vec<DecisionRecord>>> = game_seeds
        .par_iter()
        .enumerate()
        .map(|(game, &s)| {
            let mut ep = EpisodeState::new(*config, s)?;
            let mut out = Vec::new();
            while !ep.is_finished() && (ep.pieces_placed()) < options.piece_cap {
                let board = *ep.board();
                let piece = ep.current_piece();
                let (raw, simple, cumulative) =
                    filter_decision(policy, &orient, &order, &board, piece, options.standardize)?;
                out.push(DecisionRecord {
                    game,
                    decision: out.len(),
                    piece,
                    raw,
                    simple,
                    cumulative,
                });
                let choice = policy.choose(&board, piece);
                ep.apply(&choice.outcome);
            }
            Ok(out)
        })
        .collect();

    let mut records = Vec::new();
    for g in per_game {
        records.extend(g?);
    }
    Ok(FilterReport::from_records(records))
}
