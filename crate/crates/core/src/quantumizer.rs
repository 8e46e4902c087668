//! The two quantumization protocols.
//!
//! Parallel protocol: a judge prepares a state on ⊗_i C^{|S_i|}, each player
//! applies a local unitary (or a probabilistic mixture of unitaries), and the
//! judge measures in a basis whose outcomes are the classical plays. Player
//! i's payoff operator is π̂_i = Σ_P π_i(P) Π_P, so π̄_i = Tr[𝒰ρ𝒰† π̂_i].
//!
//! Sequential protocol: players take turns applying unitaries to one shared
//! k-level system whose basis states are the classical states of the game.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::classical::{ClassicalGame, Play};
use crate::error::{shape, Error, Result};
use crate::quantum::{
    apply_channel, c, check_probabilities, commutator_norm, evolve_density, outcome_probabilities,
    tensor_unitaries, ComplexMatrix, DensityMatrix, KrausChannel, MeasurementBasis, PureState,
    UnitaryOperator, C64, TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGame {
    base: ClassicalGame,
    initial_state: DensityMatrix,
    basis: MeasurementBasis,
    outcome_plays: Vec<Play>,
    payoff_operators: Vec<ComplexMatrix>,
}

/// Parallel-protocol game: validates dimensions and the label/play bijection,
/// then builds one payoff operator per player from the basis projectors.
pub fn build_ewl(
    base: ClassicalGame,
    initial_state: DensityMatrix,
    basis: MeasurementBasis,
) -> Result<QuantumGame> {
    let dim = base.num_plays();
    if initial_state.dim() != dim {
        return Err(shape(format!(
            "initial state has dim {} but the game has {dim} plays",
            initial_state.dim()
        )));
    }
    if basis.dim() != dim || basis.len() != dim {
        return Err(shape(format!(
            "basis has {} projectors of dim {}, expected {dim} of dim {dim}",
            basis.len(),
            basis.dim()
        )));
    }
    let mut outcome_plays = Vec::with_capacity(dim);
    let mut seen = vec![false; dim];
    for label in basis.labels() {
        let play = base
            .parse_play_label(label)
            .map_err(|_| Error::InvalidBasis(format!("basis label {label:?} is not a play of the game")))?;
        let idx = base.play_index(&play)?;
        if seen[idx] {
            return Err(Error::InvalidBasis(format!("play {label:?} labelled twice")));
        }
        seen[idx] = true;
        outcome_plays.push(play);
    }

    let payoff_operators: Vec<ComplexMatrix> = (0..base.players())
        .map(|i| {
            let mut op = ComplexMatrix::zeros(dim, dim);
            for (proj, play) in basis.projectors().iter().zip(&outcome_plays) {
                op = op.add(&proj.scale(c(base.payoff(i, play)?, 0.0)))?;
            }
            Ok(op)
        })
        .collect::<Result<_>>()?;

    for (i, op) in payoff_operators.iter().enumerate() {
        if !op.is_hermitian(TOL) {
            return Err(Error::InvalidGame(format!(
                "payoff operator {i} is not Hermitian"
            )));
        }
    }
    let game = QuantumGame {
        base,
        initial_state,
        basis,
        outcome_plays,
        payoff_operators,
    };
    let comm = game.max_commutator();
    if comm > TOL {
        return Err(Error::InvalidGame(format!(
            "payoff operators fail to commute ({comm:.3e})"
        )));
    }
    Ok(game)
}

impl QuantumGame {
    pub fn base(&self) -> &ClassicalGame {
        &self.base
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    pub fn basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    /// Play attached to each basis outcome, in basis order.
    pub fn outcome_plays(&self) -> &[Play] {
        &self.outcome_plays
    }

    pub fn payoff_operators(&self) -> &[ComplexMatrix] {
        &self.payoff_operators
    }

    pub fn players(&self) -> usize {
        self.base.players()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.base.shape()
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    /// Largest pairwise commutator norm among the payoff operators.
    pub fn max_commutator(&self) -> f64 {
        let ops = &self.payoff_operators;
        let mut worst = 0.0f64;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                worst = worst.max(commutator_norm(&ops[i], &ops[j]).unwrap_or(f64::INFINITY));
            }
        }
        worst
    }

    /// Spectrum of each payoff operator as (basis label, eigenvalue) pairs.
    pub fn payoff_spectra(&self) -> Result<Vec<Vec<(String, f64)>>> {
        (0..self.players())
            .map(|i| {
                self.basis
                    .labels()
                    .iter()
                    .zip(&self.outcome_plays)
                    .map(|(l, p)| Ok((l.clone(), self.base.payoff(i, p)?)))
                    .collect()
            })
            .collect()
    }

    fn check_locals(&self, dims: impl ExactSizeIterator<Item = usize>) -> Result<()> {
        let expected = self.local_dims();
        if dims.len() != expected.len() {
            return Err(shape(format!(
                "{} local strategies for {} players",
                dims.len(),
                expected.len()
            )));
        }
        for (i, (d, e)) in dims.zip(expected).enumerate() {
            if d != e {
                return Err(shape(format!("player {i} operator has dim {d}, expected {e}")));
            }
        }
        Ok(())
    }
}

/// One unitary per player.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumPlay {
    pub locals: Vec<UnitaryOperator>,
}

impl QuantumPlay {
    pub fn new(locals: Vec<UnitaryOperator>) -> Self {
        Self { locals }
    }
}

/// Per player, a finite probabilistic mixture of unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedQuantumPlay {
    locals: Vec<Vec<(f64, UnitaryOperator)>>,
}

impl MixedQuantumPlay {
    pub fn new(locals: Vec<Vec<(f64, UnitaryOperator)>>) -> Result<Self> {
        for (i, mix) in locals.iter().enumerate() {
            check_probabilities(mix.iter().map(|(p, _)| *p))
                .map_err(|e| Error::InvalidMixture(format!("player {i}: {e}")))?;
            if let Some((_, u0)) = mix.first() {
                if mix.iter().any(|(_, u)| u.dim() != u0.dim()) {
                    return Err(Error::InvalidMixture(format!(
                        "player {i} mixes operators of different dimension"
                    )));
                }
            }
        }
        Ok(Self { locals })
    }

    /// Degenerate mixture: probability one on each player's operator.
    pub fn from_pure(play: &QuantumPlay) -> Self {
        Self {
            locals: play.locals.iter().map(|u| vec![(1.0, u.clone())]).collect(),
        }
    }

    pub fn locals(&self) -> &[Vec<(f64, UnitaryOperator)>] {
        &self.locals
    }

    /// Product Kraus channel: one operator ⊗_i √p_i U_i per combination.
    pub fn channel(&self) -> Result<KrausChannel> {
        let mut ops: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(1)];
        for mix in &self.locals {
            let mut next = Vec::with_capacity(ops.len() * mix.len());
            for acc in &ops {
                for (p, u) in mix.iter().filter(|(p, _)| *p > 0.0) {
                    let e = u.matrix().scale(c(p.sqrt(), 0.0));
                    next.push(crate::quantum::tensor_product(acc, &e)?);
                }
            }
            ops = next;
        }
        KrausChannel::new(ops)
    }
}

/// ρ_f = 𝒰 ρ_in 𝒰† with 𝒰 = ⊗_i U_i.
pub fn final_state(qg: &QuantumGame, play: &QuantumPlay) -> Result<DensityMatrix> {
    qg.check_locals(play.locals.iter().map(UnitaryOperator::dim))?;
    let u = tensor_unitaries(&play.locals)?;
    evolve_density(&qg.initial_state, &u)
}

/// π̄_i = Tr[𝒰ρ𝒰† π̂_i].
pub fn expected_payoffs_q(qg: &QuantumGame, play: &QuantumPlay) -> Result<Vec<f64>> {
    payoffs_of_state(qg, &final_state(qg, play)?)
}

/// Σ_P p(P) π_i(P) with p from the judge's measurement of the final state.
pub fn expected_payoffs_by_measurement(qg: &QuantumGame, play: &QuantumPlay) -> Result<Vec<f64>> {
    let probs = outcome_probabilities(&final_state(qg, play)?, &qg.basis)?;
    let mut out = vec![0.0; qg.players()];
    for (p, outcome) in probs.iter().zip(&qg.outcome_plays) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += p * qg.base.payoff(i, outcome)?;
        }
    }
    Ok(out)
}

/// Outcome distribution over plays, in basis order.
pub fn outcome_distribution(qg: &QuantumGame, rho: &DensityMatrix) -> Result<Vec<(Play, f64)>> {
    let probs = outcome_probabilities(rho, &qg.basis)?;
    Ok(qg.outcome_plays.iter().cloned().zip(probs).collect())
}

pub fn payoffs_of_state(qg: &QuantumGame, rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.dim() != qg.dim() {
        return Err(shape("state dimension does not match the game"));
    }
    qg.payoff_operators
        .iter()
        .map(|op| Ok(rho.matrix().trace_of_product(op)?.re))
        .collect()
}

pub fn final_state_mixed(qg: &QuantumGame, play: &MixedQuantumPlay) -> Result<DensityMatrix> {
    qg.check_locals(play.locals.iter().map(|m| m.first().map_or(0, |(_, u)| u.dim())))?;
    apply_channel(&qg.initial_state, &play.channel()?)
}

/// Applies the product channel of the players' mixtures, then Tr[ρ_f π̂_i].
pub fn expected_payoffs_mixed(qg: &QuantumGame, play: &MixedQuantumPlay) -> Result<Vec<f64>> {
    payoffs_of_state(qg, &final_state_mixed(qg, play)?)
}

/// Player `player`'s payoff as a quadratic form in their own unitary with the
/// other players' strategies already applied:
/// π̄(U) = Re Σ U[k,k'] conj(U[l,l']) T[k',l',l,k].
#[derive(Debug, Clone)]
pub struct LocalPayoffForm {
    d: usize,
    coeffs: Vec<C64>,
}

impl LocalPayoffForm {
    /// `others[player]` is ignored; every other entry is that player's unitary.
    pub fn new(qg: &QuantumGame, player: usize, others: &[UnitaryOperator]) -> Result<Self> {
        let mut locals = others.to_vec();
        if player >= locals.len() {
            return Err(shape(format!("no player {player}")));
        }
        locals[player] = UnitaryOperator::identity(qg.local_dims()[player]);
        let sigma = final_state(qg, &QuantumPlay::new(locals))?;
        Self::from_state(qg, player, &sigma)
    }

    /// Form for a state in which the other players' (possibly mixed)
    /// strategies have already acted.
    pub fn from_state(qg: &QuantumGame, player: usize, sigma: &DensityMatrix) -> Result<Self> {
        let dims = qg.local_dims();
        let d = dims[player];
        let left: usize = dims[..player].iter().product();
        let right: usize = dims[player + 1..].iter().product();
        let rho = sigma.matrix();
        let pi = &qg.payoff_operators[player];
        let at = |x: usize, k: usize, y: usize| (x * d + k) * right + y;
        let mut coeffs = vec![C64::default(); d * d * d * d];
        for kp in 0..d {
            for lp in 0..d {
                for l in 0..d {
                    for k in 0..d {
                        let mut acc = C64::default();
                        for x in 0..left {
                            for y in 0..right {
                                for x2 in 0..left {
                                    for y2 in 0..right {
                                        acc += rho.get(at(x, kp, y), at(x2, lp, y2))
                                            * pi.get(at(x2, l, y2), at(x, k, y));
                                    }
                                }
                            }
                        }
                        coeffs[(k * d + kp) * d * d + l * d + lp] = acc;
                    }
                }
            }
        }
        Ok(Self { d, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn evaluate(&self, u: &ComplexMatrix) -> f64 {
        self.evaluate_with(|r, col| u.get(r, col))
    }

    /// Same as `evaluate` with the unitary given entrywise.
    pub fn evaluate_with(&self, u: impl Fn(usize, usize) -> C64) -> f64 {
        let d = self.d;
        let entries: Vec<C64> = (0..d * d).map(|a| u(a / d, a % d)).collect();
        self.evaluate_entries(&entries)
    }

    /// Row-major entries of U: Re Σ_ab u_a conj(u_b) M_ab, with the form
    /// folded into a d²×d² matrix M.
    pub fn evaluate_entries(&self, u: &[C64]) -> f64 {
        let n = self.d * self.d;
        let mut acc = C64::default();
        for (a, &ua) in u.iter().enumerate().take(n) {
            let row = &self.coeffs[a * n..(a + 1) * n];
            let mut inner = C64::default();
            for (ub, m) in u.iter().zip(row) {
                inner += ub.conj() * m;
            }
            acc += ua * inner;
        }
        acc.re
    }
}

/// (|00⟩ + i|11⟩)/√2.
pub fn ewl_entangled_state() -> DensityMatrix {
    let s = FRAC_1_SQRT_2;
    DensityMatrix::from_amplitudes(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, s)]).expect("normalised")
}

/// (|00⟩ + |11⟩)/√2.
pub fn phi_plus_state() -> DensityMatrix {
    let s = FRAC_1_SQRT_2;
    DensityMatrix::from_amplitudes(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).expect("normalised")
}

/// |P⟩ in the computational basis.
pub fn computational_state(game: &ClassicalGame, play: &Play) -> Result<DensityMatrix> {
    Ok(PureState::basis(game.num_plays(), game.play_index(play)?)?.to_density())
}

/// {|P⟩⟨P|} labelled by the game's plays in lexicographic order.
pub fn computational_basis(game: &ClassicalGame) -> Result<MeasurementBasis> {
    let labels = game.plays().map(|p| game.play_label(&p)).collect();
    MeasurementBasis::computational(game.num_plays(), labels)
}

fn two_by_two_labels(game: &ClassicalGame) -> Result<Vec<String>> {
    if game.shape() != [2, 2] {
        return Err(Error::Unsupported(
            "this named basis needs a 2-player game with two strategies each".into(),
        ));
    }
    Ok(game.plays().map(|p| game.play_label(&p)).collect())
}

/// η basis: (|00⟩+i|11⟩, |01⟩−i|10⟩, |01⟩+i|10⟩, |00⟩−i|11⟩)/√2 attached to
/// plays 00, 01, 10, 11 (CC, CD, DC, DD for the Prisoner's Dilemma).
pub fn ewl_eta_basis(game: &ClassicalGame) -> Result<MeasurementBasis> {
    let s = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let kets = vec![
        vec![c(s, 0.0), z, z, c(0.0, s)],
        vec![z, c(s, 0.0), c(0.0, -s), z],
        vec![z, c(s, 0.0), c(0.0, s), z],
        vec![c(s, 0.0), z, z, c(0.0, -s)],
    ];
    MeasurementBasis::from_kets(&kets, two_by_two_labels(game)?)
}

/// Bell basis (Φ⁺, Ψ⁺, Ψ⁻, Φ⁻) attached to plays 00, 01, 10, 11.
pub fn bell_basis(game: &ClassicalGame) -> Result<MeasurementBasis> {
    let s = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let kets = vec![
        vec![c(s, 0.0), z, z, c(s, 0.0)],
        vec![z, c(s, 0.0), c(s, 0.0), z],
        vec![z, c(s, 0.0), c(-s, 0.0), z],
        vec![c(s, 0.0), z, z, c(-s, 0.0)],
    ];
    MeasurementBasis::from_kets(&kets, two_by_two_labels(game)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialQuantumGame {
    player_names: Vec<String>,
    state_labels: Vec<String>,
    initial_state: DensityMatrix,
    schedule: Vec<usize>,
    classical_moves: Vec<(String, UnitaryOperator)>,
    payoffs: Vec<Vec<f64>>,
    payoff_operators: Vec<ComplexMatrix>,
}

/// Sequential-protocol game. `payoffs[i][j]` is player i's payoff when the
/// shared system ends in classical state j; the payoff operators are the
/// corresponding diagonal matrices. Classical moves must be permutations.
pub fn build_sequential(
    player_names: Vec<String>,
    state_labels: Vec<String>,
    initial_state: DensityMatrix,
    schedule: Vec<usize>,
    classical_moves: Vec<(String, UnitaryOperator)>,
    payoffs: Vec<Vec<f64>>,
) -> Result<SequentialQuantumGame> {
    let k = state_labels.len();
    if k == 0 {
        return Err(Error::InvalidGame("no classical states".into()));
    }
    if initial_state.dim() != k {
        return Err(shape(format!(
            "initial state has dim {} for {k} classical states",
            initial_state.dim()
        )));
    }
    if schedule.is_empty() {
        return Err(Error::InvalidGame("empty move schedule".into()));
    }
    if payoffs.len() != player_names.len() || payoffs.is_empty() {
        return Err(Error::InvalidGame(format!(
            "{} payoff vectors for {} players",
            payoffs.len(),
            player_names.len()
        )));
    }
    if let Some(&bad) = schedule.iter().find(|&&p| p >= player_names.len()) {
        return Err(Error::InvalidGame(format!("schedule names unknown player {bad}")));
    }
    for (i, v) in payoffs.iter().enumerate() {
        if v.len() != k || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGame(format!(
                "payoff vector of player {i} must have {k} finite entries"
            )));
        }
    }
    for (name, u) in &classical_moves {
        if u.dim() != k {
            return Err(shape(format!("move {name} has dim {}, expected {k}", u.dim())));
        }
        if !u.is_permutation(TOL) {
            return Err(Error::InvalidGame(format!(
                "classical move {name} is not a permutation of the classical states"
            )));
        }
    }
    let payoff_operators = payoffs.iter().map(|v| ComplexMatrix::diag_real(v)).collect();
    Ok(SequentialQuantumGame {
        player_names,
        state_labels,
        initial_state,
        schedule,
        classical_moves,
        payoffs,
        payoff_operators,
    })
}

impl SequentialQuantumGame {
    pub fn player_names(&self) -> &[String] {
        &self.player_names
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn classical_moves(&self) -> &[(String, UnitaryOperator)] {
        &self.classical_moves
    }

    pub fn payoffs(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    pub fn payoff_operators(&self) -> &[ComplexMatrix] {
        &self.payoff_operators
    }

    pub fn dim(&self) -> usize {
        self.state_labels.len()
    }

    pub fn classical_move(&self, name: &str) -> Option<&UnitaryOperator> {
        self.classical_moves
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, u)| u)
    }

    /// Index of the classical state `move` sends state `from` to.
    pub fn transition(&self, name: &str, from: usize) -> Option<usize> {
        let u = self.classical_move(name)?;
        (0..self.dim()).find(|&i| (u.matrix().get(i, from) - c(1.0, 0.0)).norm() <= TOL)
    }
}

/// 𝒰ρ𝒰† with 𝒰 = U_m ⋯ U_2 U_1 (first move acts first).
pub fn sequential_final_state(
    sg: &SequentialQuantumGame,
    moves: &[UnitaryOperator],
) -> Result<DensityMatrix> {
    if moves.len() != sg.schedule.len() {
        return Err(shape(format!(
            "{} moves for a schedule of length {}",
            moves.len(),
            sg.schedule.len()
        )));
    }
    let mut total = UnitaryOperator::identity(sg.dim());
    for (step, u) in moves.iter().enumerate() {
        if u.dim() != sg.dim() {
            return Err(shape(format!(
                "move {step} has dim {}, expected {}",
                u.dim(),
                sg.dim()
            )));
        }
        total = u.compose(&total)?;
    }
    evolve_density(&sg.initial_state, &total)
}

/// Tr[𝒰ρ𝒰† π̂_i] for each player.
pub fn play_sequential(sg: &SequentialQuantumGame, moves: &[UnitaryOperator]) -> Result<Vec<f64>> {
    let rho = sequential_final_state(sg, moves)?;
    sg.payoff_operators
        .iter()
        .map(|op| Ok(rho.matrix().trace_of_product(op)?.re))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::named_operator;

    fn pd() -> ClassicalGame {
        let (a, b, g) = (5.0, 3.0, 1.0);
        ClassicalGame::bimatrix(
            ["A", "B"],
            &["C", "D"],
            &["C", "D"],
            &[vec![-g, -a], vec![0.0, -b]],
            &[vec![-g, 0.0], vec![-a, -b]],
        )
        .unwrap()
    }

    fn ewl_pd() -> QuantumGame {
        let g = pd();
        let basis = ewl_eta_basis(&g).unwrap();
        build_ewl(g, ewl_entangled_state(), basis).unwrap()
    }

    fn op(name: &str) -> UnitaryOperator {
        named_operator(name).unwrap()
    }

    fn approx(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn ewl_payoff_operator_spectrum() {
        let qg = ewl_pd();
        let spec = qg.payoff_spectra().unwrap();
        let a: Vec<(String, f64)> = spec[0].clone();
        assert_eq!(
            a,
            vec![
                ("CC".to_string(), -1.0),
                ("CD".to_string(), -5.0),
                ("DC".to_string(), 0.0),
                ("DD".to_string(), -3.0)
            ]
        );
        let mut ev = qg.payoff_operators()[0].hermitian_eigenvalues().unwrap();
        ev.iter_mut().for_each(|x| *x = (*x * 1e9).round() / 1e9);
        assert_eq!(ev, vec![-5.0, -3.0, -1.0, 0.0]);
        assert!(qg.max_commutator() < 1e-12);
    }

    #[test]
    fn ewl_landmark_plays() {
        let qg = ewl_pd();
        let dd = QuantumPlay::new(vec![op("UD"), op("UD")]);
        assert!(approx(&expected_payoffs_q(&qg, &dd).unwrap(), &[-3.0, -3.0]));
        let probs = outcome_distribution(&qg, &final_state(&qg, &dd).unwrap()).unwrap();
        assert!((probs[3].1 - 1.0).abs() < 1e-12);

        let qq = QuantumPlay::new(vec![op("UQ"), op("UQ")]);
        assert!(approx(&expected_payoffs_q(&qg, &qq).unwrap(), &[-1.0, -1.0]));

        let id = QuantumPlay::new(vec![op("I"), op("UD")]);
        let eta_cd = DensityMatrix::from_amplitudes(vec![
            c(0.0, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, -FRAC_1_SQRT_2),
            c(0.0, 0.0),
        ])
        .unwrap();
        assert!(final_state(&qg, &id).unwrap().distance(&eta_cd).unwrap() < 1e-12);
        assert!(approx(&expected_payoffs_q(&qg, &id).unwrap(), &[-5.0, 0.0]));
    }

    #[test]
    fn measurement_route_agrees() {
        let qg = ewl_pd();
        let play = QuantumPlay::new(vec![op("UQstar"), op("UQ")]);
        let a = expected_payoffs_q(&qg, &play).unwrap();
        let b = expected_payoffs_by_measurement(&qg, &play).unwrap();
        assert!(approx(&a, &b));
    }

    #[test]
    fn classical_embedding_for_diagonal_start() {
        let g = pd();
        let start = Play(vec![0, 1]);
        let qg = build_ewl(
            g.clone(),
            computational_state(&g, &start).unwrap(),
            computational_basis(&g).unwrap(),
        )
        .unwrap();
        let v = expected_payoffs_q(&qg, &QuantumPlay::new(vec![op("I"), op("I")])).unwrap();
        assert_eq!(v, g.payoff_vector(&start).unwrap());
        // flipping A's qubit moves the play from CD to DD
        let v = expected_payoffs_q(&qg, &QuantumPlay::new(vec![op("X"), op("I")])).unwrap();
        assert_eq!(v, g.payoff_vector(&Play(vec![1, 1])).unwrap());
    }

    #[test]
    fn build_ewl_errors() {
        let g = pd();
        let three = DensityMatrix::from_amplitudes(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(build_ewl(g.clone(), three, computational_basis(&g).unwrap()).is_err());
        let wrong_labels =
            MeasurementBasis::computational(4, vec!["CC".into(), "CD".into(), "DC".into(), "XX".into()])
                .unwrap();
        assert!(matches!(
            build_ewl(g.clone(), ewl_entangled_state(), wrong_labels),
            Err(Error::InvalidBasis(_))
        ));
        let dup =
            MeasurementBasis::computational(4, vec!["CC".into(), "CD".into(), "DC".into(), "C,C".into()])
                .unwrap();
        assert!(build_ewl(g, ewl_entangled_state(), dup).is_err());
    }

    fn mw() -> QuantumGame {
        let g = ClassicalGame::bimatrix(
            ["A", "B"],
            &["O", "T"],
            &["O", "T"],
            &[vec![3.0, 1.0], vec![1.0, 2.0]],
            &[vec![2.0, 1.0], vec![1.0, 3.0]],
        )
        .unwrap();
        let basis = computational_basis(&g).unwrap();
        build_ewl(g, phi_plus_state(), basis).unwrap()
    }

    #[test]
    fn mw_mixed_payoffs() {
        let qg = mw();
        let half = vec![(0.5, op("I")), (0.5, op("X"))];
        let m = MixedQuantumPlay::new(vec![half.clone(), half]).unwrap();
        assert!(approx(&expected_payoffs_mixed(&qg, &m).unwrap(), &[1.75, 1.75]));

        let m = MixedQuantumPlay::new(vec![
            vec![(1.0, op("I")), (0.0, op("X"))],
            vec![(0.0, op("I")), (1.0, op("X"))],
        ])
        .unwrap();
        assert!(approx(&expected_payoffs_mixed(&qg, &m).unwrap(), &[1.0, 1.0]));

        let pure = QuantumPlay::new(vec![op("X"), op("X")]);
        let a = expected_payoffs_mixed(&qg, &MixedQuantumPlay::from_pure(&pure)).unwrap();
        assert!(approx(&a, &expected_payoffs_q(&qg, &pure).unwrap()));
        assert!(approx(&a, &[2.5, 2.5]));
    }

    #[test]
    fn bell_basis_variant_gives_classical_corner() {
        let base = mw().base().clone();
        let basis = bell_basis(&base).unwrap();
        let qg = build_ewl(base, phi_plus_state(), basis).unwrap();
        let v = expected_payoffs_q(&qg, &QuantumPlay::new(vec![op("I"), op("I")])).unwrap();
        assert!(approx(&v, &[3.0, 2.0]));
    }

    #[test]
    fn invalid_mixture() {
        assert!(MixedQuantumPlay::new(vec![vec![(0.5, op("I"))]]).is_err());
        assert!(MixedQuantumPlay::new(vec![vec![(-0.5, op("I")), (1.5, op("X"))]]).is_err());
    }

    #[test]
    fn local_form_matches_full_route() {
        let qg = ewl_pd();
        let other = op("UQstar");
        let form = LocalPayoffForm::new(&qg, 0, &[op("I"), other.clone()]).unwrap();
        for name in ["I", "X", "UD", "UQ", "UQstar"] {
            let full = expected_payoffs_q(&qg, &QuantumPlay::new(vec![op(name), other.clone()])).unwrap()[0];
            assert!((form.evaluate(op(name).matrix()) - full).abs() < 1e-12);
        }
        let form_b = LocalPayoffForm::new(&qg, 1, &[op("UQ"), op("I")]).unwrap();
        let full = expected_payoffs_q(&qg, &QuantumPlay::new(vec![op("UQ"), op("UD")])).unwrap()[1];
        assert!((form_b.evaluate(op("UD").matrix()) - full).abs() < 1e-12);
    }

    fn penny() -> SequentialQuantumGame {
        build_sequential(
            vec!["Q".into(), "C".into()],
            vec!["H".into(), "T".into()],
            PureState::basis(2, 0).unwrap().to_density(),
            vec![0, 1, 0],
            vec![("N".into(), op("N")), ("F".into(), op("F"))],
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn quantum_penny_always_wins() {
        let g = penny();
        for reply in ["F", "N"] {
            let v = play_sequential(&g, &[op("UQstar"), op(reply), op("UQstar")]).unwrap();
            assert!(approx(&v, &[1.0, -1.0]));
        }
        let v = play_sequential(&g, &[op("N"), op("F"), op("N")]).unwrap();
        assert!(approx(&v, &[-1.0, 1.0]));
        assert!(play_sequential(&g, &[op("N")]).is_err());
    }

    #[test]
    fn sequential_validation() {
        let rho = PureState::basis(2, 0).unwrap().to_density();
        let h = op("H");
        let err = build_sequential(
            vec!["Q".into()],
            vec!["H".into(), "T".into()],
            rho.clone(),
            vec![0],
            vec![("bad".into(), h)],
            vec![vec![1.0, -1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
        assert!(build_sequential(
            vec!["Q".into()],
            vec!["H".into(), "T".into()],
            rho.clone(),
            vec![0, 1],
            vec![],
            vec![vec![1.0, -1.0]],
        )
        .is_err());
        assert!(build_sequential(
            vec!["Q".into()],
            vec!["H".into(), "T".into()],
            rho,
            vec![],
            vec![],
            vec![vec![1.0, -1.0]],
        )
        .is_err());
    }

    #[test]
    fn one_state_system_admits_only_identity() {
        let rho = PureState::basis(1, 0).unwrap().to_density();
        let phase = UnitaryOperator::new(ComplexMatrix::from_rows(&[vec![c(0.0, 1.0)]]).unwrap()).unwrap();
        let mk = |u: UnitaryOperator| {
            build_sequential(
                vec!["P".into()],
                vec!["S".into()],
                rho.clone(),
                vec![0],
                vec![("M".into(), u)],
                vec![vec![1.0]],
            )
        };
        assert!(mk(UnitaryOperator::identity(1)).is_ok());
        assert!(mk(phase).is_err());
    }

    #[test]
    fn cyclic_shift_has_order_three() {
        let r = |x: f64| c(x, 0.0);
        let shift = UnitaryOperator::from_rows(&[
            vec![r(0.0), r(0.0), r(1.0)],
            vec![r(1.0), r(0.0), r(0.0)],
            vec![r(0.0), r(1.0), r(0.0)],
        ])
        .unwrap();
        let g = build_sequential(
            vec!["P".into()],
            vec!["a".into(), "b".into(), "c".into()],
            PureState::basis(3, 0).unwrap().to_density(),
            vec![0, 0, 0],
            vec![("F".into(), shift.clone())],
            vec![vec![1.0, 0.0, 0.0]],
        )
        .unwrap();
        let cube = shift.compose(&shift).unwrap().compose(&shift).unwrap();
        assert!(cube.matrix().max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-15);
        assert_eq!(g.transition("F", 0), Some(1));
        let v = play_sequential(&g, &[shift.clone(), shift.clone(), shift]).unwrap();
        assert_eq!(v, vec![1.0]);
    }
}
