//! Python bindings: load catalog games or game files, evaluate quantum
//! payoffs, search best responses and verify equilibria.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qgame::catalog::{self, CatalogEntry};
use qgame::equilibrium::{self, SearchConfig, StrategyChoice};
use qgame::gamefile::{self, GameFile};
use qgame::quantumizer::{self, QuantumGame, QuantumPlay};
use qgame::strategy::{ParamPoint, StrategyFamily};

fn err(e: qgame::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// One player's strategy: a label of a finite operator set, a single angle,
/// or a list of parameters.
#[derive(FromPyObject)]
enum Coord {
    Label(String),
    Scalar(f64),
    Point(Vec<f64>),
}

fn point(family: &StrategyFamily, c: Coord) -> PyResult<ParamPoint> {
    match c {
        Coord::Label(l) => match family {
            StrategyFamily::FiniteSet { labels, .. } => labels
                .iter()
                .position(|x| *x == l)
                .map(|i| ParamPoint(vec![i as f64]))
                .ok_or_else(|| PyValueError::new_err(format!("unknown strategy label {l:?}"))),
            _ => Err(PyValueError::new_err(format!("family has no labels; got {l:?}"))),
        },
        Coord::Scalar(x) => Ok(ParamPoint(vec![x])),
        Coord::Point(v) => Ok(ParamPoint(v)),
    }
}

fn choice_to_py(py: Python<'_>, family: &StrategyFamily, c: &StrategyChoice) -> PyResult<Py<PyAny>> {
    Ok(match c {
        StrategyChoice::Point(p) => match family.label_of(p) {
            Some(l) => l.into_pyobject(py)?.into_any().unbind(),
            None => p.0.clone().into_pyobject(py)?.into_any().unbind(),
        },
        StrategyChoice::Mixture(w) => w.clone().into_pyobject(py)?.into_any().unbind(),
    })
}

fn config(grid: usize, epsilon: f64, seed: u64) -> SearchConfig {
    SearchConfig {
        grid_resolution: grid,
        epsilon,
        seed,
        ..SearchConfig::default()
    }
}

/// A classical game together with its quantum or sequential protocol.
#[pyclass(module = "qgame_py", frozen)]
struct Game {
    file: GameFile,
}

impl Game {
    fn quantum(&self) -> PyResult<&QuantumGame> {
        self.file
            .quantum_game()
            .ok_or_else(|| PyValueError::new_err("game has no parallel quantum section"))
    }

    fn family(&self, name: Option<&str>) -> PyResult<StrategyFamily> {
        match name {
            None | Some("game") => Ok(self.file.family().cloned().unwrap_or(StrategyFamily::TwoParam)),
            Some(n) => StrategyFamily::from_kind_name(n).map_err(err),
        }
    }

    fn points(&self, family: &StrategyFamily, coords: Vec<Coord>) -> PyResult<Vec<ParamPoint>> {
        coords.into_iter().map(|c| point(family, c)).collect()
    }
}

#[pymethods]
impl Game {
    /// Catalog game by name with optional parameter overrides.
    #[staticmethod]
    #[pyo3(signature = (name, params=None))]
    fn catalog(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let entry: CatalogEntry = catalog::load(name, &params.unwrap_or_default()).map_err(err)?;
        Ok(Self {
            file: gamefile::export(&entry).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Self {
            file: gamefile::parse_game_file(Path::new(path)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            file: gamefile::parse_game_str(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.file.to_json_string()
    }

    #[getter]
    fn players(&self) -> Vec<String> {
        self.file.classical.player_names().to_vec()
    }

    #[getter]
    fn strategies(&self) -> Vec<Vec<String>> {
        self.file.classical.strategy_sets().to_vec()
    }

    /// Classical payoff vector of a play label such as "CD".
    fn classical_payoffs(&self, play: &str) -> PyResult<Vec<f64>> {
        let g = &self.file.classical;
        let p = g.parse_play_label(play).map_err(err)?;
        g.payoff_vector(&p).map_err(err)
    }

    #[pyo3(signature = (strict=false))]
    fn pure_nash(&self, strict: bool) -> Vec<String> {
        let g = &self.file.classical;
        qgame::classical::pure_nash(g, strict)
            .iter()
            .map(|p| g.play_label(p))
            .collect()
    }

    /// Expected quantum payoffs of a pure profile drawn from `family`.
    #[pyo3(signature = (profile, family=None))]
    fn payoffs(&self, profile: Vec<Coord>, family: Option<&str>) -> PyResult<Vec<f64>> {
        let qg = self.quantum()?;
        let fam = self.family(family)?;
        let pts = self.points(&fam, profile)?;
        let ops = equilibrium::profile_unitaries(&fam, &pts).map_err(err)?;
        quantumizer::expected_payoffs_q(qg, &QuantumPlay::new(ops)).map_err(err)
    }

    /// Best response of `player` when everyone else plays `profile`; the
    /// player's own entry is ignored. Returns (strategy, payoff).
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (player, profile, family=None, grid=64, epsilon=1e-6, seed=0))]
    fn best_response(
        &self,
        py: Python<'_>,
        player: usize,
        profile: Vec<Coord>,
        family: Option<&str>,
        grid: usize,
        epsilon: f64,
        seed: u64,
    ) -> PyResult<(Py<PyAny>, f64)> {
        let qg = self.quantum()?;
        let fam = self.family(family)?;
        let pts = self.points(&fam, profile)?;
        let ops = equilibrium::profile_unitaries(&fam, &pts).map_err(err)?;
        let (p, v) =
            equilibrium::best_response(qg, player, &ops, &fam, &config(grid, epsilon, seed)).map_err(err)?;
        Ok((choice_to_py(py, &fam, &StrategyChoice::Point(p))?, v))
    }

    /// Equilibrium report for a pure profile, or for per-player mixtures
    /// over a finite operator set when `mixed` is true.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (profile, family=None, mixed=false, grid=64, epsilon=1e-6, seed=0))]
    fn verify_nash<'py>(
        &self,
        py: Python<'py>,
        profile: Bound<'py, PyAny>,
        family: Option<&str>,
        mixed: bool,
        grid: usize,
        epsilon: f64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let qg = self.quantum()?;
        let fam = self.family(family)?;
        let cfg = config(grid, epsilon, seed);
        let rep = if mixed {
            let mixtures: Vec<Vec<f64>> = profile.extract()?;
            equilibrium::verify_nash_mixed_finite(qg, &mixtures, &fam, &cfg)
        } else {
            let pts = self.points(&fam, profile.extract()?)?;
            equilibrium::verify_nash(qg, &pts, &fam, &cfg)
        }
        .map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("payoffs", &rep.payoffs)?;
        let best: Vec<Py<PyAny>> = rep
            .best_responses
            .iter()
            .map(|c| choice_to_py(py, &fam, c))
            .collect::<PyResult<_>>()?;
        out.set_item("best_responses", best)?;
        out.set_item("best_payoffs", &rep.best_payoffs)?;
        out.set_item("gains", &rep.gains)?;
        out.set_item("max_unilateral_gain", rep.max_unilateral_gain)?;
        out.set_item("epsilon", rep.epsilon)?;
        out.set_item("certified", rep.certified)?;
        out.set_item("refuted", rep.refuted)?;
        Ok(out)
    }

    /// Payoffs of a sequential game for named moves in schedule order.
    fn play_sequential(&self, moves: Vec<String>) -> PyResult<Vec<f64>> {
        let sg = self
            .file
            .sequential_game()
            .ok_or_else(|| PyValueError::new_err("game has no sequential section"))?;
        let ops = catalog::sequential_ops(sg, &moves).map_err(err)?;
        quantumizer::play_sequential(sg, &ops).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Game({})", self.file.name.as_deref().unwrap_or("unnamed"))
    }
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    catalog::NAMES.to_vec()
}

/// Runs the command-line interface in-process: returns (exit code, stdout, stderr).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let out = qgame::cli::run(std::iter::once("qgame".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn qgame_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
