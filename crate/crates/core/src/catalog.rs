//! Parameterized instances of the Penny-Flip game, the Prisoner's Dilemma
//! and the Battle of the Sexes, with their known classical and quantum
//! solutions. Every documented payoff is a formula in the parameters and is
//! re-verified against the engine when an entry is loaded.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::classical::{expected_payoffs, max_deviation_gain, pure_nash, ClassicalGame, MixedProfile, Play};
use crate::equilibrium::{
    mixed_play, profile_unitaries, verify_nash, verify_nash_mixed_finite, SearchConfig,
};
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, MeasurementBasis, PureState};
use crate::quantumizer::{
    build_ewl, build_sequential, computational_basis, ewl_entangled_state, ewl_eta_basis,
    expected_payoffs_mixed, expected_payoffs_q, final_state, final_state_mixed, phi_plus_state,
    play_sequential, sequential_final_state, QuantumGame, QuantumPlay, SequentialQuantumGame,
};
use crate::strategy::{named_operator, ParamPoint, StrategyFamily};

pub const NAMES: [&str; 3] = ["penny_flip", "prisoners_dilemma", "battle_of_sexes"];

/// Payoff agreement required of documented solutions.
pub const PAYOFF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumEntry {
    Parallel(QuantumGame),
    Sequential(SequentialQuantumGame),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    ClassicalPure(Play),
    ClassicalMixed(MixedProfile),
    QuantumPure {
        family: StrategyFamily,
        profile: Vec<ParamPoint>,
    },
    QuantumMixed {
        family: StrategyFamily,
        mixtures: Vec<Vec<f64>>,
    },
    /// Named operators in schedule order.
    Sequential(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentedSolution {
    pub label: String,
    pub solution: Solution,
    pub expected_payoffs: Vec<f64>,
    /// Some(true): must certify as an equilibrium; Some(false): must be
    /// refuted; None: payoffs only.
    pub equilibrium: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCheck {
    pub label: String,
    pub expected_payoffs: Vec<f64>,
    pub computed_payoffs: Vec<f64>,
    pub payoff_error: f64,
    pub equilibrium_expected: Option<bool>,
    pub max_unilateral_gain: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub classical: ClassicalGame,
    pub quantum: QuantumEntry,
    /// Strategy family used by default for quantum analyses.
    pub family: StrategyFamily,
    /// Names of the initial state and measurement basis, as used in game files.
    pub initial_state_name: String,
    pub basis_name: Option<String>,
    pub solutions: Vec<DocumentedSolution>,
    /// Label of the solution whose final state is used for sampling checks.
    pub sampling_solution: String,
    pub notes: Vec<String>,
    pub checks: Vec<SolutionCheck>,
}

/// Builds the named entry and re-verifies every documented solution with the
/// default search configuration. Parameters missing from `params` take their
/// defaults; unknown names and ordering violations are errors.
pub fn load(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    load_with(name, params, &SearchConfig::default())
}

pub fn load_with(name: &str, params: &BTreeMap<String, f64>, cfg: &SearchConfig) -> Result<CatalogEntry> {
    let entry = load_and_check(name, params, cfg)?;
    if let Some(bad) = entry.checks.iter().find(|c| !c.passed) {
        return Err(Error::InvalidGame(format!(
            "documented solution {} failed re-verification (payoff error {:.3e})",
            bad.label, bad.payoff_error
        )));
    }
    Ok(entry)
}

/// Like `load_with` but keeps failed checks in `entry.checks` instead of
/// returning an error.
pub fn load_and_check(
    name: &str,
    params: &BTreeMap<String, f64>,
    cfg: &SearchConfig,
) -> Result<CatalogEntry> {
    let mut entry = match name {
        "penny_flip" => penny_flip(params)?,
        "prisoners_dilemma" => prisoners_dilemma(params)?,
        "battle_of_sexes" => battle_of_sexes(params)?,
        other => {
            return Err(Error::UnknownName(format!(
                "catalog entry {other:?} (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    entry.checks = entry
        .solutions
        .iter()
        .map(|s| check_solution(&entry, s, cfg))
        .collect::<Result<_>>()?;
    Ok(entry)
}

fn resolve(params: &BTreeMap<String, f64>, defaults: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
    if let Some(k) = params.keys().find(|k| !defaults.iter().any(|(d, _)| d == k)) {
        let known: Vec<&str> = defaults.iter().map(|(d, _)| *d).collect();
        return Err(Error::Parameter(format!(
            "unknown parameter {k:?} (expected {})",
            if known.is_empty() {
                "none".to_string()
            } else {
                known.join(", ")
            }
        )));
    }
    let out: BTreeMap<String, f64> = defaults
        .iter()
        .map(|(k, v)| (k.to_string(), params.get(*k).copied().unwrap_or(*v)))
        .collect();
    if let Some((k, v)) = out.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Parameter(format!("parameter {k} = {v} is not finite")));
    }
    Ok(out)
}

fn abg(p: &BTreeMap<String, f64>) -> (f64, f64, f64) {
    (p["alpha"], p["beta"], p["gamma"])
}

fn sol(
    label: &str,
    solution: Solution,
    expected_payoffs: Vec<f64>,
    equilibrium: Option<bool>,
    note: &str,
) -> DocumentedSolution {
    DocumentedSolution {
        label: label.into(),
        solution,
        expected_payoffs,
        equilibrium,
        note: note.into(),
    }
}

fn op_set(names: &[&str]) -> Result<StrategyFamily> {
    StrategyFamily::finite_set(
        names.iter().map(|s| s.to_string()).collect(),
        names.iter().map(|s| named_operator(s)).collect::<Result<_>>()?,
    )
}

/// Player C's payoffs from the sequential dynamics: Q moves, C moves, Q
/// moves on a penny starting heads; C wins on tails.
fn penny_table(seq: &SequentialQuantumGame) -> Vec<Vec<f64>> {
    let moves = ["N", "F"];
    let mut pc = vec![vec![0.0; 4]; 2];
    for (ci, c) in moves.iter().enumerate() {
        for (qi, (q1, q2)) in [("N", "N"), ("N", "F"), ("F", "N"), ("F", "F")]
            .iter()
            .enumerate()
        {
            let mut state = 0;
            for m in [q1, c, q2] {
                state = seq.transition(m, state).expect("permutation move");
            }
            pc[ci][qi] = seq.payoffs()[1][state];
        }
    }
    pc
}

fn penny_flip(params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let parameters = resolve(params, &[])?;
    let n = named_operator("N")?;
    let f = named_operator("F")?;
    let seq = build_sequential(
        vec!["Q".into(), "C".into()],
        vec!["H".into(), "T".into()],
        PureState::basis(2, 0)?.to_density(),
        vec![0, 1, 0],
        vec![("N".into(), n), ("F".into(), f)],
        vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
    )?;
    let pc = penny_table(&seq);
    let neg = |m: &Vec<Vec<f64>>| -> Vec<f64> { m.iter().flatten().map(|x| -x).collect() };
    let classical = ClassicalGame::new(
        vec!["C".into(), "Q".into()],
        vec![
            vec!["N".into(), "F".into()],
            vec!["NN".into(), "NF".into(), "FN".into(), "FF".into()],
        ],
        vec![pc.iter().flatten().copied().collect(), neg(&pc)],
    )?;
    let uniform = MixedProfile::new(vec![vec![0.5; 2], vec![0.25; 4]])?;
    let solutions = vec![
        sol(
            "classical_mixed_uniform",
            Solution::ClassicalMixed(uniform),
            vec![0.0, 0.0],
            Some(true),
            "C mixes N/F evenly and Q mixes its four sequences evenly; value 0",
        ),
        sol(
            "quantum_hadamard_vs_flip",
            Solution::Sequential(vec!["UQstar".into(), "F".into(), "UQstar".into()]),
            vec![1.0, -1.0],
            None,
            "Q's Hadamard sandwich returns the penny to heads whatever C does",
        ),
        sol(
            "quantum_hadamard_vs_no_flip",
            Solution::Sequential(vec!["UQstar".into(), "N".into(), "UQstar".into()]),
            vec![1.0, -1.0],
            None,
            "same with C not flipping",
        ),
    ];
    Ok(CatalogEntry {
        name: "penny_flip".into(),
        parameters,
        classical,
        quantum: QuantumEntry::Sequential(seq),
        family: op_set(&["N", "F", "UQstar"])?,
        initial_state_name: "computational:H".into(),
        basis_name: None,
        solutions,
        sampling_solution: "quantum_hadamard_vs_flip".into(),
        notes: vec![
            "Q's strategies are ordered NN, NF, FN, FF (first move, then last move)".into(),
            "zero-sum: Q's payoff is the negative of C's in every play".into(),
        ],
        checks: Vec::new(),
    })
}

fn prisoners_dilemma(params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let parameters = resolve(params, &[("alpha", 5.0), ("beta", 3.0), ("gamma", 1.0)])?;
    let (a, b, g) = abg(&parameters);
    if !(0.0 <= g && g < b && b < a) {
        return Err(Error::Parameter(format!(
            "prisoners_dilemma needs 0 <= gamma < beta < alpha (sentences in years), got alpha={a}, beta={b}, gamma={g}"
        )));
    }
    let classical = ClassicalGame::bimatrix(
        ["A", "B"],
        &["C", "D"],
        &["C", "D"],
        &[vec![-g, -a], vec![0.0, -b]],
        &[vec![-g, 0.0], vec![-a, -b]],
    )?;
    let basis = ewl_eta_basis(&classical)?;
    let qg = build_ewl(classical.clone(), ewl_entangled_state(), basis)?;
    let pt = |v: &[f64]| ParamPoint(v.to_vec());
    let solutions = vec![
        sol(
            "classical_dominant_DD",
            Solution::ClassicalPure(Play(vec![1, 1])),
            vec![-b, -b],
            Some(true),
            "defection is dominant for both players",
        ),
        sol(
            "one_param_UD_UD",
            Solution::QuantumPure {
                family: StrategyFamily::OneParam,
                profile: vec![pt(&[PI]), pt(&[PI])],
            },
            vec![-b, -b],
            Some(true),
            "one-parameter strategies reproduce the classical mixed game",
        ),
        sol(
            "two_param_UD_UD",
            Solution::QuantumPure {
                family: StrategyFamily::TwoParam,
                profile: vec![pt(&[PI, 0.0]), pt(&[PI, 0.0])],
            },
            vec![-b, -b],
            Some(false),
            "U_Q beats U_D, so mutual defection stops being an equilibrium",
        ),
        sol(
            "two_param_UQ_UQ",
            Solution::QuantumPure {
                family: StrategyFamily::TwoParam,
                profile: vec![pt(&[0.0, FRAC_PI_2]), pt(&[0.0, FRAC_PI_2])],
            },
            vec![-g, -g],
            Some(true),
            "(U_Q, U_Q) is an equilibrium with the Pareto-optimal payoff",
        ),
        sol(
            "three_param_UQ_UQ",
            Solution::QuantumPure {
                family: StrategyFamily::ThreeParam,
                profile: vec![pt(&[0.0, FRAC_PI_2, 0.0]), pt(&[0.0, FRAC_PI_2, 0.0])],
            },
            vec![-g, -g],
            Some(g == 0.0),
            if g == 0.0 {
                "with gamma = 0 mutual cooperation already pays the maximum 0, so no deviation gains"
            } else {
                "with three parameters every profile has a profitable deviation; here the best one gains exactly gamma"
            },
        ),
    ];
    Ok(CatalogEntry {
        name: "prisoners_dilemma".into(),
        parameters,
        classical,
        quantum: QuantumEntry::Parallel(qg),
        family: StrategyFamily::TwoParam,
        initial_state_name: "ewl_entangled".into(),
        basis_name: Some("ewl_eta".into()),
        solutions,
        sampling_solution: "two_param_UQ_UQ".into(),
        notes: vec![
            "initial state (|00> + i|11>)/sqrt2, measured in the eta basis".into(),
            "the counter-strategy to U is U_D S conj(U) S^dagger with S = diag(1, i); U_D U^dagger does not reach the responder's best outcome".into(),
        ],
        checks: Vec::new(),
    })
}

fn battle_of_sexes(params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let parameters = resolve(params, &[("alpha", 3.0), ("beta", 2.0), ("gamma", 1.0)])?;
    let (a, b, g) = abg(&parameters);
    if !(a > b && b > g) {
        return Err(Error::Parameter(format!(
            "battle_of_sexes needs alpha > beta > gamma, got alpha={a}, beta={b}, gamma={g}"
        )));
    }
    let classical = ClassicalGame::bimatrix(
        ["A", "B"],
        &["O", "T"],
        &["O", "T"],
        &[vec![a, g], vec![g, b]],
        &[vec![b, g], vec![g, a]],
    )?;
    let basis = computational_basis(&classical)?;
    let qg = build_ewl(classical.clone(), phi_plus_state(), basis)?;
    let family = op_set(&["I", "X"])?;
    let den = a + b - 2.0 * g;
    let mixed = MixedProfile::new(vec![
        vec![(a - g) / den, (b - g) / den],
        vec![(b - g) / den, (a - g) / den],
    ])?;
    let v_mixed = (a * b - g * g) / den;
    let q_pure = (a + b) / 2.0;
    let q_mixed = (a + b + 2.0 * g) / 4.0;
    let point = |k: f64| ParamPoint(vec![k]);
    let solutions = vec![
        sol("classical_pure_OO", Solution::ClassicalPure(Play(vec![0, 0])), vec![a, b], Some(true), "both go to the opera"),
        sol("classical_pure_TT", Solution::ClassicalPure(Play(vec![1, 1])), vec![b, a], Some(true), "both watch television"),
        sol(
            "classical_mixed",
            Solution::ClassicalMixed(mixed),
            vec![v_mixed, v_mixed],
            Some(true),
            "indifference mix; probabilities (alpha-gamma)/(alpha+beta-2gamma) and (beta-gamma)/(alpha+beta-2gamma)",
        ),
        sol(
            "quantum_pure_I_I",
            Solution::QuantumPure { family: family.clone(), profile: vec![point(0.0), point(0.0)] },
            vec![q_pure, q_pure],
            Some(true),
            "from the maximally entangled state both players get (alpha+beta)/2",
        ),
        sol(
            "quantum_pure_X_X",
            Solution::QuantumPure { family: family.clone(), profile: vec![point(1.0), point(1.0)] },
            vec![q_pure, q_pure],
            Some(true),
            "X on both qubits leaves the entangled state unchanged",
        ),
        sol(
            "quantum_mixed_half",
            Solution::QuantumMixed { family: family.clone(), mixtures: vec![vec![0.5, 0.5], vec![0.5, 0.5]] },
            vec![q_mixed, q_mixed],
            Some(true),
            "each player mixes I and X evenly; payoff (alpha+beta+2gamma)/4",
        ),
    ];
    Ok(CatalogEntry {
        name: "battle_of_sexes".into(),
        parameters,
        classical,
        quantum: QuantumEntry::Parallel(qg),
        family,
        initial_state_name: "phi_plus".into(),
        basis_name: Some("computational".into()),
        solutions,
        sampling_solution: "quantum_mixed_half".into(),
        notes: vec![
            "initial state Phi+, measured in the computational basis; the Bell-basis measurement gives the classical corner payoffs instead of (alpha+beta)/2".into(),
            "mixed-equilibrium denominators are alpha+beta-2gamma (from indifference)".into(),
            "best response to p_A: choose I with certainty when p_A > 1/2, X when p_A < 1/2, anything at 1/2".into(),
        ],
        checks: Vec::new(),
    })
}

/// Computed payoffs of a documented solution.
pub fn solution_payoffs(entry: &CatalogEntry, s: &Solution) -> Result<Vec<f64>> {
    match (s, &entry.quantum) {
        (Solution::ClassicalPure(p), _) => entry.classical.payoff_vector(p),
        (Solution::ClassicalMixed(m), _) => expected_payoffs(&entry.classical, m),
        (Solution::QuantumPure { family, profile }, QuantumEntry::Parallel(qg)) => {
            expected_payoffs_q(qg, &QuantumPlay::new(profile_unitaries(family, profile)?))
        }
        (Solution::QuantumMixed { family, mixtures }, QuantumEntry::Parallel(qg)) => {
            expected_payoffs_mixed(qg, &mixed_play(family, mixtures)?)
        }
        (Solution::Sequential(moves), QuantumEntry::Sequential(sg)) => {
            play_sequential(sg, &sequential_ops(sg, moves)?)
        }
        _ => Err(Error::Unsupported(
            "solution kind does not match the entry's protocol".into(),
        )),
    }
}

/// Operators for named moves: the game's classical moves first, then the
/// built-in named operators.
pub fn sequential_ops(
    sg: &SequentialQuantumGame,
    moves: &[String],
) -> Result<Vec<crate::quantum::UnitaryOperator>> {
    moves
        .iter()
        .map(|m| match sg.classical_move(m) {
            Some(u) => Ok(u.clone()),
            None => named_operator(m),
        })
        .collect()
}

pub fn check_solution(
    entry: &CatalogEntry,
    s: &DocumentedSolution,
    cfg: &SearchConfig,
) -> Result<SolutionCheck> {
    let computed = solution_payoffs(entry, &s.solution)?;
    let payoff_error = computed
        .iter()
        .zip(&s.expected_payoffs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let gain = match (&s.solution, s.equilibrium, &entry.quantum) {
        (_, None, _) => None,
        (Solution::ClassicalPure(p), Some(_), _) => {
            let gain = if pure_nash(&entry.classical, false).contains(p) {
                0.0
            } else {
                max_deviation_gain(&entry.classical, &MixedProfile::pure(&entry.classical, p)?)?
            };
            Some(gain)
        }
        (Solution::ClassicalMixed(m), Some(_), _) => Some(max_deviation_gain(&entry.classical, m)?),
        (Solution::QuantumPure { family, profile }, Some(_), QuantumEntry::Parallel(qg)) => {
            Some(verify_nash(qg, profile, family, cfg)?.max_unilateral_gain)
        }
        (Solution::QuantumMixed { family, mixtures }, Some(_), QuantumEntry::Parallel(qg)) => {
            Some(verify_nash_mixed_finite(qg, mixtures, family, cfg)?.max_unilateral_gain)
        }
        _ => return Err(Error::Unsupported(format!("cannot certify solution {}", s.label))),
    };
    let eq_ok = match (s.equilibrium, gain) {
        (Some(true), Some(g)) => g <= cfg.epsilon,
        (Some(false), Some(g)) => g > 10.0 * cfg.epsilon,
        _ => true,
    };
    Ok(SolutionCheck {
        label: s.label.clone(),
        expected_payoffs: s.expected_payoffs.clone(),
        computed_payoffs: computed.clone(),
        payoff_error,
        equilibrium_expected: s.equilibrium,
        max_unilateral_gain: gain,
        passed: computed.len() == s.expected_payoffs.len() && payoff_error <= PAYOFF_TOL && eq_ok,
    })
}

impl CatalogEntry {
    pub fn solution(&self, label: &str) -> Option<&DocumentedSolution> {
        self.solutions.iter().find(|s| s.label == label)
    }

    /// Final state of the sampling solution and the basis the judge measures
    /// it in.
    pub fn equilibrium_state(&self) -> Result<(DensityMatrix, MeasurementBasis)> {
        let s = self
            .solution(&self.sampling_solution)
            .ok_or_else(|| Error::UnknownName(self.sampling_solution.clone()))?;
        match (&s.solution, &self.quantum) {
            (Solution::QuantumPure { family, profile }, QuantumEntry::Parallel(qg)) => Ok((
                final_state(qg, &QuantumPlay::new(profile_unitaries(family, profile)?))?,
                qg.basis().clone(),
            )),
            (Solution::QuantumMixed { family, mixtures }, QuantumEntry::Parallel(qg)) => Ok((
                final_state_mixed(qg, &mixed_play(family, mixtures)?)?,
                qg.basis().clone(),
            )),
            (Solution::Sequential(moves), QuantumEntry::Sequential(sg)) => Ok((
                sequential_final_state(sg, &sequential_ops(sg, moves)?)?,
                MeasurementBasis::computational(sg.dim(), sg.state_labels().to_vec())?,
            )),
            _ => Err(Error::Unsupported("sampling solution is not quantum".into())),
        }
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
