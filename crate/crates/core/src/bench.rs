//! Seeded episode playouts and benchmark statistics.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{EpisodeState, GameConfig, PieceKind, PieceSource, Placement};
use crate::policy::LinearPolicy;
use crate::{Error, Result};

/// Default piece cap for a single episode.
pub const DEFAULT_PIECE_CAP: u64 = 200_000;

/// Bound for the alternating S/Z sequence.
pub const ADVERSARIAL_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub total_reward: f64,
    pub lines: u64,
    pub pieces: u64,
    /// Stopped at the piece cap rather than by a game over.
    pub truncated: bool,
    pub seed: u64,
    pub millis: u64,
}

/// One committed move, for replay comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrajectoryStep {
    pub piece: PieceKind,
    pub placement: Placement,
    pub lines_cleared: u8,
}

fn run(
    policy: &LinearPolicy,
    mut ep: EpisodeState,
    seed: u64,
    cap: u64,
    mut trace: Option<&mut Vec<TrajectoryStep>>,
) -> EpisodeResult {
    let start = Instant::now();
    while !ep.is_finished() && ep.pieces_placed() < cap {
        let piece = ep.current_piece();
        let choice = policy.choose(ep.board(), piece);
        if let Some(t) = trace.as_deref_mut() {
            t.push(TrajectoryStep {
                piece,
                placement: choice.placement,
                lines_cleared: choice.outcome.lines_cleared,
            });
        }
        ep.apply(&choice.outcome);
    }
    EpisodeResult {
        total_reward: ep.score(),
        lines: ep.lines_cleared(),
        pieces: ep.pieces_placed(),
        truncated: !ep.is_finished(),
        seed,
        millis: start.elapsed().as_millis() as u64,
    }
}

fn check(policy: &LinearPolicy, game: &GameConfig, cap: u64) -> Result<()> {
    if cap == 0 {
        return Err(Error::InvalidArgument(
            "piece cap must be at least 1".into(),
        ));
    }
    game.validate()?;
    policy.check_width(game.width)
}

/// Plays greedily with `policy` until game over or `cap` pieces.
pub fn play_episode(
    policy: &LinearPolicy,
    game: &GameConfig,
    seed: u64,
    cap: u64,
) -> Result<EpisodeResult> {
    check(policy, game, cap)?;
    Ok(run(
        policy,
        EpisodeState::new(*game, seed)?,
        seed,
        cap,
        None,
    ))
}

/// [`play_episode`] that also returns every committed move.
pub fn play_episode_traced(
    policy: &LinearPolicy,
    game: &GameConfig,
    seed: u64,
    cap: u64,
) -> Result<(EpisodeResult, Vec<TrajectoryStep>)> {
    check(policy, game, cap)?;
    let mut t = Vec::new();
    let r = run(
        policy,
        EpisodeState::new(*game, seed)?,
        seed,
        cap,
        Some(&mut t),
    );
    Ok((r, t))
}

/// Plays against the endless S, Z, S, Z, ... sequence, which no policy can
/// survive forever. Stops at [`ADVERSARIAL_CAP`] pieces.
pub fn adversarial_sz_episode(policy: &LinearPolicy, game: &GameConfig) -> Result<EpisodeResult> {
    check(policy, game, ADVERSARIAL_CAP)?;
    let ep =
        EpisodeState::with_source(*game, PieceSource::cycle(vec![PieceKind::S, PieceKind::Z]))?;
    Ok(run(policy, ep, 0, ADVERSARIAL_CAP, None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineStats {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (zero for a single episode).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Normal-approximation 95% interval for the mean.
    pub ci95: (f64, f64),
}

impl LineStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "statistics need at least one value");
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let half = 1.96 * std / nf.sqrt();
        Self {
            mean,
            median,
            std,
            min: sorted[0],
            max: sorted[n - 1],
            ci95: (mean - half, mean + half),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub episodes: Vec<EpisodeResult>,
    pub lines: LineStats,
    pub mean_reward: f64,
    pub total_pieces: u64,
    pub truncated: usize,
    /// Pieces placed per wall-clock second over the whole run.
    pub pieces_per_second: f64,
    pub wall_millis: u64,
}

impl BenchReport {
    /// Per-episode CSV: a header row, then one row per episode in seed-list
    /// order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["seed", "lines", "reward", "pieces", "truncated", "millis"])?;
        for e in &self.episodes {
            w.write_record([
                e.seed.to_string(),
                e.lines.to_string(),
                e.total_reward.to_string(),
                e.pieces.to_string(),
                e.truncated.to_string(),
                e.millis.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Plays one episode per seed on a pool of `jobs` threads. Results are kept
/// in seed order, so everything but the timing fields is independent of
/// `jobs`.
pub fn run_benchmark(
    policy: &LinearPolicy,
    game: &GameConfig,
    seeds: &[u64],
    cap: u64,
    jobs: usize,
) -> Result<BenchReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one game".into()));
    }
    check(policy, game, cap)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let start = Instant::now();
    let episodes: Vec<EpisodeResult> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let ep = EpisodeState::new(*game, s).expect("config validated");
                run(policy, ep, s, cap, None)
            })
            .collect()
    });
    let wall = start.elapsed();
    let lines: Vec<f64> = episodes.iter().map(|e| e.lines as f64).collect();
    let total_pieces = episodes.iter().map(|e| e.pieces).sum();
    Ok(BenchReport {
        lines: LineStats::from_values(&lines),
        mean_reward: episodes.iter().map(|e| e.total_reward).sum::<f64>() / episodes.len() as f64,
        truncated: episodes.iter().filter(|e| e.truncated).count(),
        total_pieces,
        pieces_per_second: total_pieces as f64 / wall.as_secs_f64().max(1e-9),
        wall_millis: wall.as_millis() as u64,
        episodes,
    })
}
