//! The `qgame` command-line workbench.
//!
//! Exit codes: 0 success, 1 the analysis refuted the claim being checked
//! (for example `verify-nash` found a profitable deviation), 2 bad input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::catalog::{self, CatalogEntry, QuantumEntry, Solution};
use crate::classical::{
    dominant_strategies, expected_payoffs, mixed_nash_two_player, pareto_optimal_plays, pareto_relation_tol,
    pure_nash, ClassicalGame, ParetoRelation,
};
use crate::equilibrium::{
    best_response, mixed_play, pareto_report, profile_unitaries, verify_nash, verify_nash_mixed_finite,
    EquilibriumReport, SearchConfig, StrategyChoice,
};
use crate::error::{Error, Result};
use crate::gamefile::{export, parse_game_file, parse_real, GameFile};
use crate::quantum::{
    outcome_probabilities, sample_outcome, DensityMatrix, MeasurementBasis, UnitaryOperator,
};
use crate::quantumizer::{
    expected_payoffs_mixed, expected_payoffs_q, final_state, final_state_mixed, play_sequential,
    sequential_final_state, QuantumGame, QuantumPlay, SequentialQuantumGame,
};
use crate::report::{fmt_num, num, nums, Format, Report};
use crate::strategy::{named_operator, ParamPoint, StrategyFamily};

/// Largest allowed gap between sampled frequencies and Born probabilities
/// in `demo`.
pub const SAMPLING_TOL: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "qgame", version, about = "Quantum versions of finite classical games")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Tolerance for payoff comparisons (Pareto relations, ties).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Grid resolution per parameter for best-response search.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid: usize,
    /// Largest unilateral gain accepted when certifying an equilibrium.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Seed for measurement sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical solutions: dominant strategies, Nash equilibria, Pareto set.
    Analyze {
        #[arg(long)]
        game: PathBuf,
        /// Analyse the classical game (the default and only mode).
        #[arg(long)]
        classical: bool,
    },
    /// Summary of the quantum game: dimensions, basis, payoff-operator spectra.
    Quantumize {
        #[arg(long)]
        game: PathBuf,
    },
    /// Payoffs of one quantum play.
    Payoff {
        #[arg(long)]
        game: PathBuf,
        /// Comma-separated operator per player (names or family labels).
        #[arg(long, conflicts_with_all = ["profile", "mixed"])]
        ops: Option<String>,
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated parameters of every player, in player order.
        #[arg(long, conflicts_with = "mixed", allow_hyphen_values = true)]
        profile: Option<String>,
        /// Per-player mixtures over a finite family, e.g. "0.5,0.5;1,0".
        #[arg(long)]
        mixed: Option<String>,
        /// Number of seeded measurement samples to draw.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Best response of one player to fixed strategies of the others.
    BestResponse {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        family: Option<String>,
        /// Player index (0-based) or name.
        #[arg(long)]
        player: String,
        /// Parameters of the other players, in player order.
        #[arg(long, allow_hyphen_values = true)]
        others: String,
    },
    /// Certify or refute a profile as an epsilon-Nash equilibrium.
    VerifyNash {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, conflicts_with = "mixed", allow_hyphen_values = true)]
        profile: Option<String>,
        #[arg(long)]
        mixed: Option<String>,
    },
    /// Pareto relations among labelled payoff vectors.
    Pareto {
        /// Adds every classical play of this game as an entry.
        #[arg(long)]
        game: Option<PathBuf>,
        /// Entry as label=v1,v2,...
        #[arg(long = "entry", allow_hyphen_values = true)]
        entries: Vec<String>,
    },
    /// Run a sequential game with the given moves.
    PlaySequential {
        #[arg(long)]
        game: PathBuf,
        /// Comma-separated moves in schedule order.
        #[arg(long)]
        moves: String,
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Re-verify every documented solution of a catalog game.
    Demo {
        name: String,
        /// Parameter override, name=value.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Write a catalog game as a game file.
    Export {
        name: String,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: 2,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            };
        }
    };
    match execute(&cli) {
        Ok((out, refuted)) => Outcome {
            stdout: out,
            stderr: String::new(),
            code: i32::from(refuted),
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 2,
        },
    }
}

fn config(g: &GlobalOpts) -> Result<SearchConfig> {
    let cfg = SearchConfig {
        grid_resolution: g.grid,
        epsilon: g.epsilon,
        seed: g.seed,
        ..SearchConfig::default()
    };
    cfg.validate()?;
    if !(g.tol >= 0.0 && g.tol.is_finite()) {
        return Err(Error::Parameter(format!("tol must be >= 0, got {}", g.tol)));
    }
    Ok(cfg)
}

fn diagnostics(r: &mut Report, g: &GlobalOpts, cfg: &SearchConfig) {
    r.diag("tol", num(g.tol))
        .diag("grid_resolution", cfg.grid_resolution)
        .diag("refinement_iterations", cfg.refinement_iterations)
        .diag("epsilon", num(cfg.epsilon))
        .diag("seed", cfg.seed);
}

/// Returns the rendered report and whether the analysis refuted its claim.
fn execute(cli: &Cli) -> Result<(String, bool)> {
    let g = &cli.global;
    let cfg = config(g)?;
    let (mut report, refuted) = match &cli.command {
        Command::Analyze { game, .. } => (analyze(&load(game)?, game, g.tol)?, false),
        Command::Quantumize { game } => (quantumize(&load(game)?, game)?, false),
        Command::Payoff {
            game,
            ops,
            family,
            profile,
            mixed,
            samples,
        } => (
            payoff(
                &load(game)?,
                game,
                ops.as_deref(),
                family.as_deref(),
                profile.as_deref(),
                mixed.as_deref(),
                *samples,
                g.seed,
            )?,
            false,
        ),
        Command::BestResponse {
            game,
            family,
            player,
            others,
        } => (
            best_response_cmd(&load(game)?, game, family.as_deref(), player, others, &cfg)?,
            false,
        ),
        Command::VerifyNash {
            game,
            family,
            profile,
            mixed,
        } => verify_cmd(
            &load(game)?,
            game,
            family.as_deref(),
            profile.as_deref(),
            mixed.as_deref(),
            &cfg,
        )?,
        Command::Pareto { game, entries } => (pareto_cmd(game.as_deref(), entries, g.tol)?, false),
        Command::PlaySequential { game, moves, samples } => (
            sequential_cmd(&load(game)?, game, moves, *samples, g.seed)?,
            false,
        ),
        Command::Demo {
            name,
            params,
            samples,
        } => demo(name, &parse_params(params)?, *samples, &cfg)?,
        Command::Export { name, params, output } => {
            let entry = catalog::load_with(name, &parse_params(params)?, &cfg)?;
            let text = export(&entry)?.to_json_string();
            return match output {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| Error::GameFile {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    Ok((format!("wrote {}\n", path.display()), false))
                }
                None => Ok((text, false)),
            };
        }
    };
    diagnostics(&mut report, g, &cfg);
    Ok((report.render(g.format), refuted))
}

fn load(path: &Path) -> Result<GameFile> {
    parse_game_file(path)
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected name=value, got {s:?}")))?;
            Ok((k.trim().to_string(), parse_real(v)?))
        })
        .collect()
}

fn quantum_of(gf: &GameFile) -> Result<&QuantumGame> {
    gf.quantum_game()
        .ok_or_else(|| Error::Parameter("the game file has no quantum section".into()))
}

fn family_for(gf: &GameFile, name: Option<&str>) -> Result<StrategyFamily> {
    match name {
        None => Ok(gf.family().cloned().unwrap_or(StrategyFamily::TwoParam)),
        Some("game") => gf
            .family()
            .cloned()
            .ok_or_else(|| Error::Parameter("the game file declares no strategy family".into())),
        Some(other) => StrategyFamily::from_kind_name(other),
    }
}

fn tokens(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

/// One coordinate: a real (pi tokens allowed) or, for finite families, an
/// operator label.
fn coordinate(family: &StrategyFamily, tok: &str) -> Result<f64> {
    if let StrategyFamily::FiniteSet { labels, .. } = family {
        if let Some(k) = labels.iter().position(|l| l == tok) {
            return Ok(k as f64);
        }
    }
    parse_real(tok)
}

fn parse_points(family: &StrategyFamily, text: &str, count: usize) -> Result<Vec<ParamPoint>> {
    let vals = tokens(text)
        .iter()
        .map(|t| coordinate(family, t))
        .collect::<Result<Vec<f64>>>()?;
    let k = family.arity();
    if vals.len() != k * count {
        return Err(Error::Parameter(format!(
            "expected {} values ({count} strategies of {k} parameters), got {}",
            k * count,
            vals.len()
        )));
    }
    let points: Vec<ParamPoint> = vals.chunks(k).map(|c| ParamPoint(c.to_vec())).collect();
    for p in &points {
        family.check_point(p)?;
    }
    Ok(points)
}

fn parse_mixtures(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|part| tokens(part).iter().map(|t| parse_real(t)).collect())
        .collect()
}

fn point_json(family: &StrategyFamily, p: &ParamPoint) -> Value {
    match family.label_of(p) {
        Some(l) => json!(l),
        None => nums(&p.0),
    }
}

fn choice_json(family: &StrategyFamily, c: &StrategyChoice) -> Value {
    match c {
        StrategyChoice::Point(p) => point_json(family, p),
        StrategyChoice::Mixture(m) => nums(m),
    }
}

fn distribution_json(labels: &[String], probs: &[f64]) -> Value {
    Value::Array(
        labels
            .iter()
            .zip(probs)
            .map(|(l, p)| json!({"outcome": l, "probability": num(*p)}))
            .collect(),
    )
}

fn sample_counts(rho: &DensityMatrix, basis: &MeasurementBasis, n: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; basis.len()];
    for _ in 0..n {
        let label = sample_outcome(rho, basis, &mut rng)?;
        counts[basis.index_of(label).expect("sampled label exists")] += 1;
    }
    Ok(counts)
}

fn sampling_json(basis: &MeasurementBasis, counts: &[usize], probs: &[f64]) -> (Value, f64) {
    let n: usize = counts.iter().sum();
    let mut worst = 0.0f64;
    let rows = basis
        .labels()
        .iter()
        .zip(counts.iter().zip(probs))
        .map(|(l, (&c, &p))| {
            let f = c as f64 / n.max(1) as f64;
            worst = worst.max((f - p).abs());
            json!({"outcome": l, "count": c, "frequency": num(f), "probability": num(p)})
        })
        .collect();
    (Value::Array(rows), worst)
}

fn play_labels(g: &ClassicalGame, plays: &[crate::classical::Play]) -> Value {
    Value::Array(plays.iter().map(|p| json!(g.play_label(p))).collect())
}

fn analyze(gf: &GameFile, path: &Path, tol: f64) -> Result<Report> {
    let g = &gf.classical;
    let mut r = Report::new("analyze");
    r.arg("game", path.display().to_string());
    r.result("players", json!(g.player_names()))
        .result("strategy_sets", json!(g.strategy_sets()));
    let dom = |strict: bool| -> Value {
        Value::Array(
            dominant_strategies(g, strict)
                .iter()
                .enumerate()
                .map(|(i, d)| d.map_or(Value::Null, |k| json!(g.strategy_sets()[i][k])))
                .collect(),
        )
    };
    r.result("dominant_strict", dom(true))
        .result("dominant_weak", dom(false));
    let ne = pure_nash(g, false);
    r.result(
        "pure_nash",
        Value::Array(
            ne.iter()
                .map(|p| json!({"play": g.play_label(p), "payoffs": nums(&g.payoff_vector(p).unwrap())}))
                .collect(),
        ),
    );
    match mixed_nash_two_player(g) {
        Ok(profiles) => {
            let items = profiles
                .iter()
                .map(|m| {
                    Ok(json!({
                        "distributions": m.distributions().iter().map(|d| nums(d)).collect::<Vec<_>>(),
                        "payoffs": nums(&expected_payoffs(g, m)?),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            r.result("mixed_nash", Value::Array(items));
        }
        Err(Error::Unsupported(msg)) => {
            r.note(format!("mixed equilibria not enumerated: {msg}"));
        }
        Err(e) => return Err(e),
    }
    let optimal = if tol == crate::quantum::TOL {
        pareto_optimal_plays(g)
    } else {
        let vecs: Vec<Vec<f64>> = g.plays().map(|p| g.payoff_vector(&p).unwrap()).collect();
        g.plays()
            .enumerate()
            .filter(|(i, _)| {
                vecs.iter()
                    .all(|o| pareto_relation_tol(o, &vecs[*i], tol).unwrap() != ParetoRelation::ADominates)
            })
            .map(|(_, p)| p)
            .collect()
    };
    r.result("pareto_optimal", play_labels(g, &optimal));
    Ok(r)
}

fn matrix_rows(m: &crate::quantum::ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| {
                            let z = m.get(i, j);
                            Value::Array(vec![num(z.re), num(z.im)])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn quantumize(gf: &GameFile, path: &Path) -> Result<Report> {
    let mut r = Report::new("quantumize");
    r.arg("game", path.display().to_string());
    if gf.quantum_game().is_none() && gf.sequential_game().is_none() {
        return Err(Error::Parameter(
            "the game file has neither a quantum nor a sequential section".into(),
        ));
    }
    if let Some(qg) = gf.quantum_game() {
        r.result("dimension", qg.dim())
            .result("local_dimensions", json!(qg.local_dims()))
            .result("initial_state", matrix_rows(qg.initial_state().matrix()))
            .result("initial_state_purity", num(qg.initial_state().purity()))
            .result("basis_labels", json!(qg.basis().labels()));
        let spectra = qg.payoff_spectra()?;
        r.result(
            "payoff_operators",
            Value::Array(
                qg.base()
                    .player_names()
                    .iter()
                    .zip(&spectra)
                    .map(|(name, spec)| {
                        json!({
                            "player": name,
                            "spectrum": spec.iter().map(|(l, v)| json!({"outcome": l, "eigenvalue": num(*v)})).collect::<Vec<_>>(),
                        })
                    })
                    .collect(),
            ),
        )
        .result("max_commutator_norm", num(qg.max_commutator()));
        if let Some(f) = gf.family() {
            r.result("family", json!(f.kind()));
        }
    }
    if let Some(sg) = gf.sequential_game() {
        r.result(
            "sequential",
            json!({
                "players": sg.player_names(),
                "state_labels": sg.state_labels(),
                "schedule": sg.schedule().iter().map(|&i| sg.player_names()[i].clone()).collect::<Vec<_>>(),
                "moves": sg.classical_moves().iter().map(|(n, _)| {
                    json!({"name": n, "sends": (0..sg.dim()).map(|j| sg.state_labels()[sg.transition(n, j).unwrap()].clone()).collect::<Vec<_>>()})
                }).collect::<Vec<_>>(),
                "payoffs": sg.payoffs().iter().map(|v| nums(v)).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(r)
}

fn operator_named(family: Option<&StrategyFamily>, name: &str) -> Result<UnitaryOperator> {
    if let Some(StrategyFamily::FiniteSet { labels, operators }) = family {
        if let Some(k) = labels.iter().position(|l| l == name) {
            return Ok(operators[k].clone());
        }
    }
    named_operator(name)
}

#[allow(clippy::too_many_arguments)]
fn payoff(
    gf: &GameFile,
    path: &Path,
    ops: Option<&str>,
    family: Option<&str>,
    profile: Option<&str>,
    mixed: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    let qg = quantum_of(gf)?;
    let mut r = Report::new("payoff");
    r.arg("game", path.display().to_string());
    let n = qg.players();
    let (rho, payoffs) = if let Some(ops) = ops {
        r.arg("ops", ops);
        let locals = tokens(ops)
            .iter()
            .map(|t| operator_named(gf.family(), t))
            .collect::<Result<Vec<_>>>()?;
        let play = QuantumPlay::new(locals);
        (final_state(qg, &play)?, expected_payoffs_q(qg, &play)?)
    } else if let Some(m) = mixed {
        let fam = family_for(gf, family.or(Some("game")))?;
        r.arg("mixed", m);
        let mp = mixed_play(&fam, &parse_mixtures(m)?)?;
        (final_state_mixed(qg, &mp)?, expected_payoffs_mixed(qg, &mp)?)
    } else if let Some(p) = profile {
        let fam = family_for(gf, family)?;
        r.arg("family", json!(fam.kind())).arg("profile", p);
        let play = QuantumPlay::new(profile_unitaries(&fam, &parse_points(&fam, p, n)?)?);
        (final_state(qg, &play)?, expected_payoffs_q(qg, &play)?)
    } else {
        return Err(Error::Parameter("give one of --ops, --profile or --mixed".into()));
    };
    let probs = outcome_probabilities(&rho, qg.basis())?;
    r.result("payoffs", nums(&payoffs))
        .result("outcomes", distribution_json(qg.basis().labels(), &probs));
    if samples > 0 {
        let counts = sample_counts(&rho, qg.basis(), samples, seed)?;
        let (table, worst) = sampling_json(qg.basis(), &counts, &probs);
        r.result("samples", table)
            .result("max_frequency_error", num(worst));
    }
    Ok(r)
}

fn player_index(g: &ClassicalGame, text: &str) -> Result<usize> {
    if let Some(k) = g.player_names().iter().position(|p| p == text) {
        return Ok(k);
    }
    match text.parse::<usize>() {
        Ok(k) if k < g.players() => Ok(k),
        _ => Err(Error::Parameter(format!("unknown player {text:?}"))),
    }
}

fn counter_note(r: &mut Report, fam: &StrategyFamily, qg: &QuantumGame) {
    if matches!(fam, StrategyFamily::ThreeParam) && qg.local_dims() == [2, 2] {
        r.note("with three parameters the counter-strategy to U is U_D S conj(U) S^dagger, S = diag(1, i); the simpler U_D U^dagger does not reach the responder's best outcome");
    }
}

fn best_response_cmd(
    gf: &GameFile,
    path: &Path,
    family: Option<&str>,
    player: &str,
    others: &str,
    cfg: &SearchConfig,
) -> Result<Report> {
    let qg = quantum_of(gf)?;
    let fam = family_for(gf, family)?;
    let i = player_index(qg.base(), player)?;
    let other_points = parse_points(&fam, others, qg.players() - 1)?;
    let mut locals = profile_unitaries(&fam, &other_points)?;
    locals.insert(i, UnitaryOperator::identity(qg.local_dims()[i]));
    let (p, v) = best_response(qg, i, &locals, &fam, cfg)?;
    let mut r = Report::new("best-response");
    r.arg("game", path.display().to_string())
        .arg("family", json!(fam.kind()))
        .arg("player", qg.base().player_names()[i].clone())
        .arg("others", others);
    r.result("best_response", point_json(&fam, &p))
        .result("payoff", num(v));
    counter_note(&mut r, &fam, qg);
    Ok(r)
}

fn equilibrium_json(r: &mut Report, fam: &StrategyFamily, names: &[String], e: &EquilibriumReport) {
    r.result("certified", e.certified)
        .result("refuted", e.refuted)
        .result("payoffs", nums(&e.payoffs))
        .result("max_unilateral_gain", num(e.max_unilateral_gain))
        .result(
            "players",
            Value::Array(
                names
                    .iter()
                    .enumerate()
                    .map(|(i, n)| {
                        json!({
                            "player": n,
                            "strategy": choice_json(fam, &e.profile[i]),
                            "payoff": num(e.payoffs[i]),
                            "best_response": choice_json(fam, &e.best_responses[i]),
                            "best_payoff": num(e.best_payoffs[i]),
                            "gain": num(e.gains[i]),
                        })
                    })
                    .collect(),
            ),
        );
}

fn verify_cmd(
    gf: &GameFile,
    path: &Path,
    family: Option<&str>,
    profile: Option<&str>,
    mixed: Option<&str>,
    cfg: &SearchConfig,
) -> Result<(Report, bool)> {
    let qg = quantum_of(gf)?;
    let mut r = Report::new("verify-nash");
    r.arg("game", path.display().to_string());
    let (fam, e) = if let Some(m) = mixed {
        let fam = family_for(gf, family.or(Some("game")))?;
        r.arg("family", json!(fam.kind())).arg("mixed", m);
        let e = verify_nash_mixed_finite(qg, &parse_mixtures(m)?, &fam, cfg)?;
        (fam, e)
    } else if let Some(p) = profile {
        let fam = family_for(gf, family)?;
        r.arg("family", json!(fam.kind())).arg("profile", p);
        let e = verify_nash(qg, &parse_points(&fam, p, qg.players())?, &fam, cfg)?;
        (fam, e)
    } else {
        return Err(Error::Parameter("give --profile or --mixed".into()));
    };
    equilibrium_json(&mut r, &fam, qg.base().player_names(), &e);
    if !e.certified && !e.refuted {
        r.note("gain lies between epsilon and 10*epsilon: not certified, but too small to call a refutation");
    }
    counter_note(&mut r, &fam, qg);
    Ok((r, !e.certified))
}

fn pareto_cmd(game: Option<&Path>, entries: &[String], tol: f64) -> Result<Report> {
    let mut items: Vec<(String, Vec<f64>)> = Vec::new();
    let mut r = Report::new("pareto");
    if let Some(path) = game {
        r.arg("game", path.display().to_string());
        let g = load(path)?.classical;
        for p in g.plays() {
            items.push((g.play_label(&p), g.payoff_vector(&p)?));
        }
    }
    for e in entries {
        let (label, vals) = e
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("entry {e:?} is not label=v1,v2,...")))?;
        let v = tokens(vals)
            .iter()
            .map(|t| parse_real(t))
            .collect::<Result<Vec<f64>>>()?;
        items.push((label.trim().to_string(), v));
    }
    if items.is_empty() {
        return Err(Error::Parameter("no entries: give --game or --entry".into()));
    }
    r.arg("entries", json!(entries));
    let rep = pareto_report(&items)?;
    let relations = if tol == crate::quantum::TOL {
        rep.relations.clone()
    } else {
        items
            .iter()
            .map(|(_, a)| {
                items
                    .iter()
                    .map(|(_, b)| pareto_relation_tol(a, b, tol))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
    };
    let optimal: Vec<String> = (0..items.len())
        .filter(|&j| (0..items.len()).all(|i| relations[i][j] != ParetoRelation::ADominates))
        .map(|j| items[j].0.clone())
        .collect();
    r.result(
        "entries",
        Value::Array(
            items
                .iter()
                .map(|(l, v)| json!({"label": l, "payoffs": nums(v)}))
                .collect(),
        ),
    )
    .result(
        "relations",
        Value::Array(
            relations
                .iter()
                .map(|row| Value::Array(row.iter().map(|x| json!(x.to_string())).collect()))
                .collect(),
        ),
    )
    .result("optimal", json!(optimal));
    Ok(r)
}

fn sequential_of(gf: &GameFile) -> Result<&SequentialQuantumGame> {
    gf.sequential_game()
        .ok_or_else(|| Error::Parameter("the game file has no sequential section".into()))
}

fn sequential_cmd(gf: &GameFile, path: &Path, moves: &str, samples: usize, seed: u64) -> Result<Report> {
    let sg = sequential_of(gf)?;
    let names: Vec<String> = tokens(moves).iter().map(|s| s.to_string()).collect();
    let ops = catalog::sequential_ops(sg, &names)?;
    let payoffs = play_sequential(sg, &ops)?;
    let rho = sequential_final_state(sg, &ops)?;
    let basis = MeasurementBasis::computational(sg.dim(), sg.state_labels().to_vec())?;
    let probs = outcome_probabilities(&rho, &basis)?;
    let mut r = Report::new("play-sequential");
    r.arg("game", path.display().to_string()).arg("moves", moves);
    r.result(
        "turns",
        Value::Array(
            sg.schedule()
                .iter()
                .zip(&names)
                .map(|(&p, m)| json!({"player": sg.player_names()[p], "move": m}))
                .collect(),
        ),
    )
    .result(
        "payoffs",
        Value::Array(
            sg.player_names()
                .iter()
                .zip(&payoffs)
                .map(|(n, v)| json!({"player": n, "payoff": num(*v)}))
                .collect(),
        ),
    )
    .result("final_state", distribution_json(sg.state_labels(), &probs));
    if samples > 0 {
        let counts = sample_counts(&rho, &basis, samples, seed)?;
        let (table, worst) = sampling_json(&basis, &counts, &probs);
        r.result("samples", table)
            .result("max_frequency_error", num(worst));
    }
    Ok(r)
}

fn solution_json(entry: &CatalogEntry, s: &Solution) -> Value {
    match s {
        Solution::ClassicalPure(p) => json!({"classical_play": entry.classical.play_label(p)}),
        Solution::ClassicalMixed(m) => {
            json!({"classical_mixed": m.distributions().iter().map(|d| nums(d)).collect::<Vec<_>>()})
        }
        Solution::QuantumPure { family, profile } => json!({
            "family": family.kind(),
            "profile": profile.iter().map(|p| point_json(family, p)).collect::<Vec<_>>(),
        }),
        Solution::QuantumMixed { family, mixtures } => json!({
            "family": family.kind(),
            "mixtures": mixtures.iter().map(|m| nums(m)).collect::<Vec<_>>(),
        }),
        Solution::Sequential(moves) => json!({ "moves": moves }),
    }
}

fn demo(
    name: &str,
    params: &BTreeMap<String, f64>,
    samples: usize,
    cfg: &SearchConfig,
) -> Result<(Report, bool)> {
    let entry = catalog::load_and_check(name, params, cfg)?;
    let mut r = Report::new("demo");
    r.arg("name", name).arg(
        "params",
        Value::Object(params.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
    );
    r.result(
        "parameters",
        Value::Object(
            entry
                .parameters
                .iter()
                .map(|(k, v)| (k.clone(), num(*v)))
                .collect(),
        ),
    )
    .result(
        "protocol",
        match entry.quantum {
            QuantumEntry::Parallel(_) => "parallel",
            QuantumEntry::Sequential(_) => "sequential",
        },
    );
    let rows = entry
        .solutions
        .iter()
        .zip(&entry.checks)
        .map(|(s, c)| {
            let mut o = json!({
                "label": s.label,
                "strategy": solution_json(&entry, &s.solution),
                "expected_payoffs": nums(&c.expected_payoffs),
                "computed_payoffs": nums(&c.computed_payoffs),
                "payoff_error": num(c.payoff_error),
            });
            if let (Some(want), Some(gain)) = (c.equilibrium_expected, c.max_unilateral_gain) {
                o["claim"] = json!(if want { "equilibrium" } else { "not an equilibrium" });
                o["max_unilateral_gain"] = num(gain);
            }
            o["passed"] = json!(c.passed);
            o["note"] = json!(s.note);
            o
        })
        .collect();
    r.result("solutions", Value::Array(rows));
    let mut failed = !entry.all_checks_passed();
    if samples > 0 {
        let (rho, basis) = entry.equilibrium_state()?;
        let probs = outcome_probabilities(&rho, &basis)?;
        let counts = sample_counts(&rho, &basis, samples, cfg.seed)?;
        let (table, worst) = sampling_json(&basis, &counts, &probs);
        let ok = worst <= SAMPLING_TOL;
        failed |= !ok;
        r.result(
            "sampling",
            json!({
                "solution": entry.sampling_solution,
                "samples": samples,
                "outcomes": table,
                "max_frequency_error": num(worst),
                "tolerance": num(SAMPLING_TOL),
                "passed": ok,
            }),
        );
    }
    r.result("all_passed", !failed);
    for n in &entry.notes {
        r.note(n.clone());
    }
    Ok((r, failed))
}

/// Formats a payoff vector for human-facing messages.
pub fn format_payoffs(v: &[f64]) -> String {
    format!(
        "({})",
        v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")
    )
}
