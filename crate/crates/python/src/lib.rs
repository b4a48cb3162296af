//! Python bindings: boards, episodes, feature extraction, linear policies
//! and the benchmark, training and dominance-filter runners.

#![allow(clippy::useless_conversion)] // emitted by the pyo3 macros

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tetrislab::bench;
use tetrislab::dominance::{self, FilterOptions};
use tetrislab::engine::{
    legal_placements, BoardState, EpisodeState, GameConfig, GameOverVariant, MoveOutcome,
    PieceKind, Placement,
};
use tetrislab::features::{self, FeatureContext, FeatureSetId, GridFeatures};
use tetrislab::optimize::{self, CeConfig};
use tetrislab::policy::LinearPolicy;
use tetrislab::seeds;

fn err(e: tetrislab::Error) -> PyErr {
    match e {
        tetrislab::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn piece(name: &str) -> PyResult<PieceKind> {
    name.parse().map_err(err)
}

fn game(width: usize, height: usize, variant: &str) -> PyResult<GameConfig> {
    let v = match variant {
        "overflow" => GameOverVariant::Overflow,
        "spawn-blocked" => GameOverVariant::SpawnBlocked,
        other => return Err(PyValueError::new_err(format!("unknown variant `{other}`"))),
    };
    Ok(GameConfig::new(width, height)
        .map_err(err)?
        .with_game_over(v))
}

fn named_dict<'py>(py: Python<'py>, named: Vec<(String, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    for (k, v) in named {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Result of dropping a piece.
#[pyclass(name = "MoveOutcome", get_all)]
#[derive(Clone)]
struct PyMoveOutcome {
    board: PyBoard,
    lines_cleared: u8,
    landing_height: f64,
    eroded_cells: u8,
    terminal: bool,
}

impl From<&MoveOutcome> for PyMoveOutcome {
    fn from(o: &MoveOutcome) -> Self {
        Self {
            board: PyBoard { inner: o.post },
            lines_cleared: o.lines_cleared,
            landing_height: o.landing_height,
            eroded_cells: o.eroded_cells,
            terminal: o.terminal,
        }
    }
}

#[pyclass(name = "Board")]
#[derive(Clone)]
struct PyBoard {
    inner: BoardState,
}

#[pymethods]
impl PyBoard {
    #[new]
    #[pyo3(signature = (width = 10, height = 20))]
    fn new(width: usize, height: usize) -> PyResult<Self> {
        Ok(Self {
            inner: BoardState::empty(width, height).map_err(err)?,
        })
    }

    /// Parses the ASCII format: top row first, `X` full, `.` empty.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: BoardState::parse(text).map_err(err)?,
        })
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn heights(&self) -> Vec<u8> {
        self.inner.heights().to_vec()
    }

    /// Legal `(rotation, column)` pairs in enumeration order.
    fn placements(&self, piece_name: &str) -> PyResult<Vec<(u8, u8)>> {
        Ok(legal_placements(&self.inner, piece(piece_name)?)
            .into_iter()
            .map(|p| (p.rotation, p.column))
            .collect())
    }

    fn drop(&self, piece_name: &str, rotation: usize, column: usize) -> PyResult<PyMoveOutcome> {
        let o = self
            .inner
            .drop(Placement::new(piece(piece_name)?, rotation, column))
            .map_err(err)?;
        Ok((&o).into())
    }

    /// Named values of feature set `set` (or `"grid"` for every primitive).
    /// With a piece and placement, features describe that move; otherwise
    /// the board itself.
    #[pyo3(signature = (set, piece_name = None, rotation = 0, column = 0))]
    fn features<'py>(
        &self,
        py: Python<'py>,
        set: &str,
        piece_name: Option<&str>,
        rotation: usize,
        column: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let outcome = match piece_name {
            Some(p) => self
                .inner
                .drop(Placement::new(piece(p)?, rotation, column))
                .map_err(err)?,
            None => MoveOutcome::noop(&self.inner),
        };
        let named = if set.eq_ignore_ascii_case("grid") {
            GridFeatures::compute(&outcome.post).named()
        } else {
            let id: FeatureSetId = set.parse().map_err(err)?;
            features::extract(id, FeatureContext::new(&self.inner, &outcome))
                .named(self.inner.width())
        };
        named_dict(py, named)
    }

    fn __repr__(&self) -> String {
        format!("Board({}x{})", self.inner.width(), self.inner.height())
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }
}

#[pyclass(name = "Episode")]
struct PyEpisode {
    inner: EpisodeState,
}

#[pymethods]
impl PyEpisode {
    #[new]
    #[pyo3(signature = (seed = 0, width = 10, height = 20, variant = "overflow"))]
    fn new(seed: u64, width: usize, height: usize, variant: &str) -> PyResult<Self> {
        Ok(Self {
            inner: EpisodeState::new(game(width, height, variant)?, seed).map_err(err)?,
        })
    }

    #[getter]
    fn board(&self) -> PyBoard {
        PyBoard {
            inner: *self.inner.board(),
        }
    }

    #[getter]
    fn current_piece(&self) -> String {
        self.inner.current_piece().to_string()
    }

    #[getter]
    fn score(&self) -> f64 {
        self.inner.score()
    }

    #[getter]
    fn lines_cleared(&self) -> u64 {
        self.inner.lines_cleared()
    }

    #[getter]
    fn pieces_placed(&self) -> u64 {
        self.inner.pieces_placed()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.inner.is_finished()
    }

    /// Commits the current piece at `(rotation, column)`; returns the reward.
    fn step(&mut self, rotation: usize, column: usize) -> PyResult<f64> {
        let p = Placement::new(self.inner.current_piece(), rotation, column);
        self.inner.step(p).map_err(err)
    }
}

#[pyclass(name = "Policy")]
#[derive(Clone)]
struct PyPolicy {
    inner: LinearPolicy,
}

#[pymethods]
impl PyPolicy {
    #[new]
    fn new(set: &str, weights: Vec<f64>) -> PyResult<Self> {
        let id: FeatureSetId = set.parse().map_err(err)?;
        Ok(Self {
            inner: LinearPolicy::new("python", id, weights).map_err(err)?,
        })
    }

    #[staticmethod]
    fn dellacherie() -> Self {
        Self {
            inner: tetrislab::policy::dellacherie_policy(),
        }
    }

    /// A built-in name or a policy file path.
    #[staticmethod]
    fn load(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: LinearPolicy::resolve(spec).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.to_file().save(path).map_err(err)
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn feature_set(&self) -> String {
        self.inner.set().name().to_string()
    }

    /// Greedy `(rotation, column)` for `piece` on `board`.
    fn choose(&self, board: &PyBoard, piece_name: &str) -> PyResult<(u8, u8)> {
        self.inner.check_width(board.inner.width()).map_err(err)?;
        let c = self.inner.choose(&board.inner, piece(piece_name)?);
        Ok((c.placement.rotation, c.placement.column))
    }

    fn __repr__(&self) -> String {
        format!(
            "Policy({}, {:?})",
            self.inner.set().name(),
            self.inner.weights()
        )
    }
}

/// Plays seeded games and returns per-game rows plus line statistics.
#[pyfunction]
#[pyo3(signature = (policy, games = 10, seed = 0, cap = bench::DEFAULT_PIECE_CAP, jobs = 1, width = 10, height = 10, variant = "overflow"))]
#[allow(clippy::too_many_arguments)]
fn run_bench<'py>(
    py: Python<'py>,
    policy: &PyPolicy,
    games: usize,
    seed: u64,
    cap: u64,
    jobs: usize,
    width: usize,
    height: usize,
    variant: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let g = game(width, height, variant)?;
    let r = py
        .allow_threads(|| {
            bench::run_benchmark(&policy.inner, &g, &seeds::expand(seed, games), cap, jobs)
        })
        .map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item(
        "lines",
        r.episodes.iter().map(|e| e.lines).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "rewards",
        r.episodes
            .iter()
            .map(|e| e.total_reward)
            .collect::<Vec<_>>(),
    )?;
    d.set_item(
        "pieces",
        r.episodes.iter().map(|e| e.pieces).collect::<Vec<_>>(),
    )?;
    d.set_item("truncated", r.truncated)?;
    d.set_item("mean_lines", r.lines.mean)?;
    d.set_item("median_lines", r.lines.median)?;
    d.set_item("ci95", r.lines.ci95)?;
    d.set_item("pieces_per_second", r.pieces_per_second)?;
    Ok(d)
}

/// Cross-entropy search; returns the best policy and the running-best
/// score per generation.
#[pyfunction]
#[pyo3(signature = (set = "dellacherie", generations = 10, population = 100, elite = 10, seed = 0, cap = 10_000, jobs = 1, width = 10, height = 10))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    set: &str,
    generations: usize,
    population: usize,
    elite: usize,
    seed: u64,
    cap: u64,
    jobs: usize,
    width: usize,
    height: usize,
) -> PyResult<(PyPolicy, Vec<f64>)> {
    let id: FeatureSetId = set.parse().map_err(err)?;
    let g = game(width, height, "overflow")?;
    let cfg = CeConfig {
        generations,
        population,
        elite,
        seed,
        piece_cap: cap,
        jobs,
        ..CeConfig::for_game(&g)
    };
    let (p, log) = py
        .allow_threads(|| optimize::ce_train(&cfg, &g, id))
        .map_err(err)?;
    Ok((
        PyPolicy { inner: p },
        log.records.iter().map(|r| r.running_best).collect(),
    ))
}

/// Per-decision placement counts before and after dominance filtering.
#[pyfunction]
#[pyo3(signature = (policy, games = 10, seed = 0, cap = 2000, standardize = false, width = 10, height = 20))]
#[allow(clippy::too_many_arguments)]
fn filter_stats<'py>(
    py: Python<'py>,
    policy: &PyPolicy,
    games: usize,
    seed: u64,
    cap: u64,
    standardize: bool,
    width: usize,
    height: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let g = game(width, height, "overflow")?;
    let opts = FilterOptions {
        piece_cap: cap,
        standardize,
    };
    let r = py
        .allow_threads(|| dominance::filter_stats(&policy.inner, games, seed, &g, opts))
        .map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item("decisions", r.records.len())?;
    d.set_item("median_raw", r.median_raw)?;
    d.set_item("median_simple", r.median_simple)?;
    d.set_item("median_cumulative", r.median_cumulative)?;
    d.set_item("raw", r.records.iter().map(|x| x.raw).collect::<Vec<_>>())?;
    d.set_item(
        "simple",
        r.records.iter().map(|x| x.simple).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "cumulative",
        r.records.iter().map(|x| x.cumulative).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pymodule]
fn pytetrislab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBoard>()?;
    m.add_class::<PyMoveOutcome>()?;
    m.add_class::<PyEpisode>()?;
    m.add_class::<PyPolicy>()?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(filter_stats, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
