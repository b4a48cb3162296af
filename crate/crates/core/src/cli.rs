//! The `tetrislab` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
//! Option values resolve as command-line flag, then `--config` file, then
//! built-in default; the resolved values are written into a manifest that
//! accompanies every output file.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, DEFAULT_PIECE_CAP};
use crate::dominance::{self, FilterOptions};
use crate::engine::{
    legal_placements, BoardState, GameConfig, GameOverVariant, MoveOutcome, PieceKind, Placement,
};
use crate::features::{self, FeatureContext, FeatureSetId, GridFeatures};
use crate::optimize::{self, CeConfig};
use crate::policy::LinearPolicy;
use crate::{seeds, Error, Result};

pub const JOBS_ENV: &str = "TETRISLAB_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "tetrislab",
    version,
    about = "Tetris afterstate engine, linear policies and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one seeded game and print its result.
    Play(PlayArgs),
    /// Play many seeded games and report line statistics.
    Bench(BenchArgs),
    /// Search policy weights with the cross-entropy method.
    Train(TrainArgs),
    /// Count placements surviving simple and cumulative dominance.
    FilterStats(FilterArgs),
    /// List the legal placements of a piece on a board.
    Enumerate(EnumerateArgs),
    /// Feature utilities.
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCommand {
    /// Print `name=value` lines for one feature set (or `grid` for every
    /// board primitive).
    Dump(DumpArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Overflow,
    SpawnBlocked,
}

impl From<Variant> for GameOverVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Overflow => GameOverVariant::Overflow,
            Variant::SpawnBlocked => GameOverVariant::SpawnBlocked,
        }
    }
}

/// Options shared by every command that plays games.
#[derive(Debug, Clone, Args, Default)]
pub struct GameArgs {
    /// Grid as WIDTHxHEIGHT, e.g. 10x20 (standard) or 10x10.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// Game-over rule.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Rewards for 1,2,3,4 lines cleared at once, comma separated.
    #[arg(long, value_parser = parse_scoring)]
    pub scoring: Option<[f64; 4]>,
    /// TOML file with default values for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    /// Built-in policy name (`dellacherie`) or policy file.
    #[arg(long, default_value = "dellacherie")]
    pub policy: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop after this many pieces.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Print the final board.
    #[arg(long)]
    pub render: bool,
    /// Write every move as CSV to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "dellacherie")]
    pub policy: String,
    #[arg(long)]
    pub games: Option<usize>,
    /// Master seed; per-game seeds are expanded from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Worker threads (default from TETRISLAB_JOBS, else 1).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output prefix: writes PREFIX.csv and PREFIX.toml.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature set to learn weights for.
    #[arg(long, default_value = "dellacherie")]
    pub set: String,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub elite: Option<usize>,
    #[arg(long)]
    pub games_per_candidate: Option<usize>,
    #[arg(long)]
    pub initial_std: Option<f64>,
    #[arg(long)]
    pub noise_a: Option<f64>,
    #[arg(long)]
    pub noise_b: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Where to write the best policy.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the per-generation CSV log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, default_value = "dellacherie")]
    pub policy: String,
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decisions recorded per game at most.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Z-score features per decision before cumulative dominance.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report file; the summary alone goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub piece: String,
    /// Board file in the ASCII format.
    #[arg(long)]
    pub board: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Feature set name, or `grid`.
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub board: PathBuf,
    /// `none` to describe the board itself, or ROTATION,COLUMN to drop
    /// `--piece` first.
    #[arg(long = "move", default_value = "none")]
    pub mv: String,
    #[arg(long)]
    pub piece: Option<String>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<String>,
    pub variant: Option<Variant>,
    pub scoring: Option<[f64; 4]>,
    pub seed: Option<u64>,
    pub games: Option<usize>,
    pub cap: Option<u64>,
    pub jobs: Option<usize>,
    pub generations: Option<usize>,
    pub pop: Option<usize>,
    pub elite: Option<usize>,
    pub games_per_candidate: Option<usize>,
    pub initial_std: Option<f64>,
    pub noise_a: Option<f64>,
    pub noise_b: Option<f64>,
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub game: GameConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub piece_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trainer: Option<CeConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyRef {
    pub name: String,
    pub feature_set: FeatureSetId,
    pub weights: Vec<f64>,
}

impl From<&LinearPolicy> for PolicyRef {
    fn from(p: &LinearPolicy) -> Self {
        Self {
            name: p.name().to_string(),
            feature_set: p.set(),
            weights: p.weights().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRef {
    pub master: u64,
    pub count: usize,
}

impl RunManifest {
    fn new(command: &[String], game: GameConfig) -> Self {
        Self {
            tool: "tetrislab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.to_vec(),
            game,
            policy: None,
            seeds: None,
            piece_cap: None,
            trainer: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// The manifest as `# `-prefixed lines for the top of a CSV file.
    pub fn as_csv_comment(&self) -> String {
        let mut s = String::new();
        for line in self.to_toml().lines() {
            let _ = writeln!(s, "# {line}");
        }
        s
    }

    fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("manifest is a table")
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .to_ascii_lowercase()
        .split_once('x')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height in `{s}`"))?;
    GameConfig::new(w, h).map_err(|e| e.to_string())?;
    Ok((w, h))
}

fn parse_scoring(s: &str) -> std::result::Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "scoring needs exactly four comma-separated values".to_string())
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))
        }
    }
}

fn resolve_game(args: &GameArgs, file: &FileConfig, default: GameConfig) -> Result<GameConfig> {
    let (w, h) = match (args.grid, &file.grid) {
        (Some(g), _) => g,
        (None, Some(g)) => parse_grid(g).map_err(Error::InvalidArgument)?,
        (None, None) => (default.width, default.height),
    };
    let game = GameConfig {
        width: w,
        height: h,
        scoring: args.scoring.or(file.scoring).unwrap_or(default.scoring),
        game_over: args
            .variant
            .or(file.variant)
            .map(Into::into)
            .unwrap_or(default.game_over),
        piece_rule: default.piece_rule,
    };
    game.validate()?;
    Ok(game)
}

fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&j| j > 0)
        .unwrap_or(1)
}

fn read_board(path: &Path) -> Result<BoardState> {
    BoardState::parse(&fs::read_to_string(path)?)
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let command: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut out = std::io::stdout().lock();
    match run(cli, &command, &mut out) {
        Ok(()) => 0,
        Err(Error::InvalidArgument(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, command: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Play(a) => play(a, command, out),
        Command::Bench(a) => bench_cmd(a, command, out),
        Command::Train(a) => train(a, command, out),
        Command::FilterStats(a) => filter_stats(a, command, out),
        Command::Enumerate(a) => enumerate(a, out),
        Command::Features {
            command: FeaturesCommand::Dump(a),
        } => dump(a, out),
    }
}

fn resolve_policy(spec: &str, width: usize) -> Result<LinearPolicy> {
    let p = LinearPolicy::resolve(spec)?;
    p.check_width(width)?;
    Ok(p)
}

fn play(a: PlayArgs, command: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    let file = load_config(a.game.config.as_deref())?;
    let game = resolve_game(&a.game, &file, GameConfig::standard())?;
    let policy = resolve_policy(&a.policy, game.width)?;
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let cap = a.cap.or(file.cap).unwrap_or(DEFAULT_PIECE_CAP);

    let mut ep = crate::engine::EpisodeState::new(game, seed)?;
    let mut moves = Vec::new();
    while !ep.is_finished() && ep.pieces_placed() < cap {
        let piece = ep.current_piece();
        let choice = policy.choose(ep.board(), piece);
        moves.push((piece, choice.placement, choice.outcome.lines_cleared));
        ep.apply(&choice.outcome);
    }
    writeln!(out, "seed = {seed}")?;
    writeln!(out, "lines = {}", ep.lines_cleared())?;
    writeln!(out, "reward = {}", ep.score())?;
    writeln!(out, "pieces = {}", ep.pieces_placed())?;
    writeln!(out, "truncated = {}", !ep.is_finished())?;
    if a.render {
        write!(out, "{}", ep.board().render())?;
    }
    if let Some(path) = a.trace {
        let mut manifest = RunManifest::new(command, game);
        manifest.policy = Some((&policy).into());
        manifest.seeds = Some(SeedRef {
            master: seed,
            count: 1,
        });
        manifest.piece_cap = Some(cap);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "piece", "rotation", "column", "lines_cleared"])?;
        for (i, (p, pl, l)) in moves.iter().enumerate() {
            w.write_record([
                i.to_string(),
                p.to_string(),
                pl.rotation.to_string(),
                pl.column.to_string(),
                l.to_string(),
            ])?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("utf-8");
        fs::write(path, manifest.as_csv_comment() + &body)?;
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs, command: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    let file = load_config(a.game.config.as_deref())?;
    let game = resolve_game(&a.game, &file, GameConfig::small())?;
    let policy = resolve_policy(&a.policy, game.width)?;
    let games = a.games.or(file.games).unwrap_or(10);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let cap = a.cap.or(file.cap).unwrap_or(DEFAULT_PIECE_CAP);
    let jobs = a.jobs.or(file.jobs).unwrap_or_else(default_jobs);
    if games == 0 {
        return Err(Error::InvalidArgument("--games must be at least 1".into()));
    }

    let report = bench::run_benchmark(&policy, &game, &seeds::expand(seed, games), cap, jobs)?;
    let mut manifest = RunManifest::new(command, game);
    manifest.policy = Some((&policy).into());
    manifest.seeds = Some(SeedRef {
        master: seed,
        count: games,
    });
    manifest.piece_cap = Some(cap);

    let summary = bench_summary(&report, &manifest);
    match a.out {
        Some(prefix) => {
            fs::write(
                with_ext(&prefix, "csv"),
                manifest.as_csv_comment() + &report.to_csv()?,
            )?;
            fs::write(with_ext(&prefix, "toml"), &summary)?;
        }
        None => write!(out, "{summary}")?,
    }
    Ok(())
}

fn bench_summary(r: &bench::BenchReport, manifest: &RunManifest) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        games: usize,
        mean_lines: f64,
        median_lines: f64,
        std_lines: f64,
        min_lines: f64,
        max_lines: f64,
        ci95_low: f64,
        ci95_high: f64,
        mean_reward: f64,
        total_pieces: u64,
        truncated: usize,
        pieces_per_second: f64,
        wall_millis: u64,
        manifest: &'a toml::Table,
    }
    let table = manifest.to_table();
    toml::to_string(&Summary {
        games: r.episodes.len(),
        mean_lines: r.lines.mean,
        median_lines: r.lines.median,
        std_lines: r.lines.std,
        min_lines: r.lines.min,
        max_lines: r.lines.max,
        ci95_low: r.lines.ci95.0,
        ci95_high: r.lines.ci95.1,
        mean_reward: r.mean_reward,
        total_pieces: r.total_pieces,
        truncated: r.truncated,
        pieces_per_second: r.pieces_per_second,
        wall_millis: r.wall_millis,
        manifest: &table,
    })
    .expect("summary serializes")
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn train(a: TrainArgs, command: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    let file = load_config(a.game.config.as_deref())?;
    let game = resolve_game(&a.game, &file, GameConfig::small())?;
    let set: FeatureSetId = a
        .set
        .parse()
        .map_err(|e: Error| Error::InvalidArgument(e.to_string()))?;
    let base = CeConfig::for_game(&game);
    let cfg = CeConfig {
        population: a.pop.or(file.pop).unwrap_or(base.population),
        elite: a.elite.or(file.elite).unwrap_or(base.elite),
        generations: a
            .generations
            .or(file.generations)
            .unwrap_or(base.generations),
        games_per_candidate: a
            .games_per_candidate
            .or(file.games_per_candidate)
            .unwrap_or(base.games_per_candidate),
        initial_mean: None,
        initial_std: a
            .initial_std
            .or(file.initial_std)
            .unwrap_or(base.initial_std),
        noise_a: a.noise_a.or(file.noise_a).unwrap_or(base.noise_a),
        noise_b: a.noise_b.or(file.noise_b).unwrap_or(base.noise_b),
        seed: a.seed.or(file.seed).unwrap_or(0),
        piece_cap: a.cap.or(file.cap).unwrap_or(base.piece_cap),
        jobs: a.jobs.or(file.jobs).unwrap_or_else(default_jobs),
    };
    cfg.validate()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (policy, log) = optimize::ce_train(&cfg, &game, set)?;

    let mut manifest = RunManifest::new(command, game);
    manifest.trainer = Some(cfg);
    let mut pf = policy.to_file();
    pf.notes = format!(
        "cross-entropy search, best candidate score {}",
        log.records
            .last()
            .map(|r| r.running_best)
            .unwrap_or(f64::NAN)
    );
    pf.manifest = Some(manifest.to_table());

    for r in &log.records {
        writeln!(
            out,
            "generation {:>3}  elite mean {:>12.1}  best {:>12.1}  running best {:>12.1}",
            r.generation, r.mean_elite_score, r.best_score, r.running_best
        )?;
    }
    match a.out {
        Some(p) => pf.save(p)?,
        None => write!(out, "{}", pf.to_toml())?,
    }
    if let Some(p) = a.log {
        fs::write(p, manifest.as_csv_comment() + &log.to_csv()?)?;
    }
    Ok(())
}

fn filter_stats(a: FilterArgs, command: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    let file = load_config(a.game.config.as_deref())?;
    let game = resolve_game(&a.game, &file, GameConfig::standard())?;
    let policy = resolve_policy(&a.policy, game.width)?;
    let games = a.games.or(file.games).unwrap_or(10);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let cap = a
        .cap
        .or(file.cap)
        .unwrap_or(FilterOptions::default().piece_cap);
    let jobs = a.jobs.or(file.jobs).unwrap_or_else(default_jobs);
    if games == 0 {
        return Err(Error::InvalidArgument("--games must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let report = pool.install(|| {
        dominance::filter_stats(
            &policy,
            games,
            seed,
            &game,
            FilterOptions {
                piece_cap: cap,
                standardize: a.standardize,
            },
        )
    })?;
    let mut manifest = RunManifest::new(command, game);
    manifest.policy = Some((&policy).into());
    manifest.seeds = Some(SeedRef {
        master: seed,
        count: games,
    });
    manifest.piece_cap = Some(cap);
    match a.out {
        Some(p) => {
            fs::write(p, manifest.as_csv_comment() + &report.to_text())?;
            write!(out, "{}", report.summary())?;
        }
        None => write!(out, "{}", report.summary())?,
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let piece: PieceKind = a
        .piece
        .parse()
        .map_err(|e: Error| Error::InvalidArgument(e.to_string()))?;
    let board = read_board(&a.board)?;
    for p in legal_placements(&board, piece) {
        let o = board.drop_unchecked(p);
        writeln!(
            out,
            "rotation={} column={} lines={} terminal={}",
            p.rotation, p.column, o.lines_cleared, o.terminal
        )?;
    }
    Ok(())
}

fn dump(a: DumpArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let board = read_board(&a.board)?;
    let outcome = if a.mv.eq_ignore_ascii_case("none") {
        MoveOutcome::noop(&board)
    } else {
        let piece: PieceKind = a
            .piece
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--move needs --piece".into()))?
            .parse()
            .map_err(|e: Error| Error::InvalidArgument(e.to_string()))?;
        let (r, c) =
            a.mv.split_once(',')
                .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)))
                .ok_or_else(|| Error::InvalidArgument(format!("bad --move `{}`", a.mv)))?;
        board.drop(Placement::new(piece, r, c))?
    };
    let named = if a.set.eq_ignore_ascii_case("grid") {
        GridFeatures::compute(&outcome.post).named()
    } else {
        let set: FeatureSetId = a
            .set
            .parse()
            .map_err(|e: Error| Error::InvalidArgument(e.to_string()))?;
        features::extract(set, FeatureContext::new(&board, &outcome)).named(board.width())
    };
    for (n, v) in named {
        writeln!(out, "{n}={v}")?;
    }
    Ok(())
}
