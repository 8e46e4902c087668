//! Best-response search, ε-Nash certification and Pareto analysis of
//! quantum plays.
//!
//! Search over a parameterized family is a full grid scan followed by
//! coordinatewise golden-section refinement of the best few grid points.
//! The objective is the player's payoff as a quadratic form in their own
//! unitary with the other players' operators already applied, which makes
//! each evaluation a handful of complex multiplies.

use rayon::prelude::*;

use crate::classical::{pareto_relation, ParetoRelation};
use crate::error::{shape, Error, Result};
use crate::quantum::{c, ComplexMatrix, UnitaryOperator, C64, TOL};
use crate::quantumizer::{
    expected_payoffs_mixed, expected_payoffs_q, final_state_mixed, LocalPayoffForm, MixedQuantumPlay,
    QuantumGame, QuantumPlay,
};
use crate::strategy::{param_unitary, u3_entries, ParamPoint, StrategyFamily};

/// Ties within this margin go to the earlier (lower) grid point.
const TIE: f64 = 1e-12;
/// Number of best grid points handed to the refinement stage.
const REFINE_STARTS: usize = 3;
/// Coordinate sweeps stop once a full sweep gains no more than `TIE`, or
/// after this many.
const MAX_SWEEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub grid_resolution: usize,
    pub refinement_iterations: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 64,
            refinement_iterations: 40,
            epsilon: 1e-6,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Parameter(format!(
                "grid resolution must be at least 2, got {}",
                self.grid_resolution
            )));
        }
        Ok(())
    }
}

/// A player's strategy in a report: a family point or a mixture over a
/// finite operator set.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyChoice {
    Point(ParamPoint),
    Mixture(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub profile: Vec<StrategyChoice>,
    pub payoffs: Vec<f64>,
    /// Best deviation found for each player and its payoff.
    pub best_responses: Vec<StrategyChoice>,
    pub best_payoffs: Vec<f64>,
    pub gains: Vec<f64>,
    pub max_unilateral_gain: f64,
    pub epsilon: f64,
    /// max_unilateral_gain ≤ epsilon.
    pub certified: bool,
    /// A deviation gaining more than 10·epsilon was found.
    pub refuted: bool,
    pub pareto_flags: Vec<(String, ParetoRelation)>,
}

impl EquilibriumReport {
    fn assemble(
        profile: Vec<StrategyChoice>,
        payoffs: Vec<f64>,
        best: Vec<(StrategyChoice, f64)>,
        epsilon: f64,
    ) -> Self {
        let gains: Vec<f64> = best
            .iter()
            .zip(&payoffs)
            .map(|((_, b), p)| (b - p).max(0.0))
            .collect();
        let max_unilateral_gain = gains.iter().copied().fold(0.0, f64::max);
        let (best_responses, best_payoffs) = best.into_iter().unzip();
        Self {
            profile,
            payoffs,
            best_responses,
            best_payoffs,
            gains,
            max_unilateral_gain,
            epsilon,
            certified: max_unilateral_gain <= epsilon,
            refuted: max_unilateral_gain > 10.0 * epsilon,
            pareto_flags: Vec::new(),
        }
    }

    /// Relation of this profile's payoffs to each labelled reference vector.
    pub fn with_reference(mut self, reference: &[(String, Vec<f64>)]) -> Result<Self> {
        self.pareto_flags = reference
            .iter()
            .map(|(l, v)| Ok((l.clone(), pareto_relation(&self.payoffs, v)?)))
            .collect::<Result<_>>()?;
        Ok(self)
    }
}

fn check_player(qg: &QuantumGame, player: usize, family: &StrategyFamily) -> Result<()> {
    let dims = qg.local_dims();
    let d = *dims
        .get(player)
        .ok_or_else(|| shape(format!("no player {player} in a {}-player game", dims.len())))?;
    if family.dim() != d {
        return Err(shape(format!(
            "family acts on dim {} but player {player} holds dim {d}",
            family.dim()
        )));
    }
    Ok(())
}

/// Payoff of the form at an arbitrary (unchecked) coordinate vector.
fn objective<'a>(
    form: &'a LocalPayoffForm,
    family: &'a StrategyFamily,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |v: &[f64]| match family {
        StrategyFamily::FiniteSet { operators, .. } => {
            form.evaluate(operators[v[0].round() as usize].matrix())
        }
        _ => {
            let e = match v.len() {
                1 => u3_entries(v[0], 0.0, 0.0),
                2 => u3_entries(v[0], v[1], 0.0),
                _ => u3_entries(v[0], v[1], v[2]),
            };
            form.evaluate_with(|r, col| e[2 * r + col])
        }
    }
}

/// Player `player`'s best response to fixed operators of the others
/// (`others[player]` is ignored). Returns the point and its payoff, which is
/// never below the best grid payoff.
pub fn best_response(
    qg: &QuantumGame,
    player: usize,
    others: &[UnitaryOperator],
    family: &StrategyFamily,
    cfg: &SearchConfig,
) -> Result<(ParamPoint, f64)> {
    cfg.validate()?;
    check_player(qg, player, family)?;
    let form = LocalPayoffForm::new(qg, player, others)?;
    search(&form, family, cfg)
}

fn search(form: &LocalPayoffForm, family: &StrategyFamily, cfg: &SearchConfig) -> Result<(ParamPoint, f64)> {
    let (values, point_at) = grid_values(form, family, cfg.grid_resolution)?;
    if values.is_empty() {
        return Err(Error::Parameter("empty strategy family".into()));
    }
    let f = objective(form, family);

    let order = top_indices(&values, REFINE_STARTS);
    let best_idx = order[0];
    let mut best = (point_at(best_idx), values[best_idx]);
    if family.is_finite() || cfg.refinement_iterations == 0 {
        return Ok((ParamPoint(best.0), best.1));
    }

    let ranges = family.ranges();
    let steps: Vec<f64> = ranges
        .iter()
        .map(|r| {
            let n = if r.closed {
                cfg.grid_resolution - 1
            } else {
                cfg.grid_resolution
            };
            (r.hi - r.lo) / n as f64
        })
        .collect();
    for &start in &order {
        let (x, v) = refine(&f, &ranges, point_at(start), values[start], &steps, cfg);
        if v > best.1 + TIE {
            best = (x, v);
        }
    }
    for (x, r) in best.0.iter_mut().zip(&ranges) {
        if !r.closed {
            *x = x.rem_euclid(r.hi - r.lo) + r.lo;
            if *x >= r.hi {
                *x = r.lo;
            }
        }
    }
    let value = f(&best.0);
    Ok((ParamPoint(best.0), value))
}

/// Indices of the `k` best values, best first; among values within `TIE`
/// of each other the earliest index wins.
fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k.min(values.len()) {
        let max = values
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked.contains(i))
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = (0..values.len())
            .find(|i| !picked.contains(i) && values[*i] >= max - TIE)
            .expect("a remaining value attains the maximum");
        picked.push(first);
    }
    picked
}

/// Payoff at every point of `parameter_grid(family, resolution)`, in the
/// same order, plus a decoder from flat index to point. Parametric families
/// are scanned axis by axis with the trigonometry tabulated per axis.
/// Maps a flat grid index back to its parameter point.
type PointAt<'a> = Box<dyn Fn(usize) -> Vec<f64> + 'a>;

fn grid_values<'a>(
    form: &'a LocalPayoffForm,
    family: &'a StrategyFamily,
    resolution: usize,
) -> Result<(Vec<f64>, PointAt<'a>)> {
    if let StrategyFamily::FiniteSet { operators, .. } = family {
        let values = operators.iter().map(|u| form.evaluate(u.matrix())).collect();
        return Ok((values, Box::new(|k| vec![k as f64])));
    }
    if resolution < 2 {
        return Err(Error::Parameter(format!("grid resolution {resolution} < 2")));
    }
    let axes: Vec<Vec<f64>> = family
        .ranges()
        .iter()
        .map(|r| {
            let steps = if r.closed { resolution - 1 } else { resolution };
            let h = (r.hi - r.lo) / steps as f64;
            (0..resolution).map(|k| r.lo + h * k as f64).collect()
        })
        .collect();
    let half_angles: Vec<(f64, f64)> = axes[0].iter().map(|t| (t / 2.0).sin_cos()).collect();
    let phase = |d: usize| -> Vec<C64> {
        axes.get(d).map_or(vec![C64::new(1.0, 0.0)], |a| {
            a.iter().map(|&x| C64::from_polar(1.0, x)).collect()
        })
    };
    let (phis, lambdas) = (phase(1), phase(2));
    let values: Vec<f64> = half_angles
        .par_iter()
        .flat_map_iter(|&(s, co)| {
            let lambdas = &lambdas;
            phis.iter().flat_map(move |&ep| {
                lambdas.iter().map(move |&el| {
                    let u = [ep * co, el.conj() * s, -el * s, ep.conj() * co];
                    form.evaluate_entries(&u)
                })
            })
        })
        .collect();
    let decode = move |mut idx: usize| {
        let mut v = vec![0.0; axes.len()];
        for (d, axis) in axes.iter().enumerate().rev() {
            v[d] = axis[idx % resolution];
            idx /= resolution;
        }
        v
    };
    Ok((values, Box::new(decode)))
}

fn refine(
    f: &impl Fn(&[f64]) -> f64,
    ranges: &[crate::strategy::ParamRange],
    mut x: Vec<f64>,
    mut fx: f64,
    steps: &[f64],
    cfg: &SearchConfig,
) -> (Vec<f64>, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for _ in 0..MAX_SWEEPS {
        let start = fx;
        for d in 0..x.len() {
            let (mut a, mut b) = (x[d] - steps[d], x[d] + steps[d]);
            if ranges[d].closed {
                a = a.max(ranges[d].lo);
                b = b.min(ranges[d].hi);
            }
            let mut probe = x.clone();
            let mut g = |t: f64| {
                probe[d] = t;
                f(&probe)
            };
            let mut x1 = b - INV_PHI * (b - a);
            let mut x2 = a + INV_PHI * (b - a);
            let (mut g1, mut g2) = (g(x1), g(x2));
            for _ in 0..cfg.refinement_iterations {
                if g1 >= g2 {
                    b = x2;
                    x2 = x1;
                    g2 = g1;
                    x1 = b - INV_PHI * (b - a);
                    g1 = g(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    g1 = g2;
                    x2 = a + INV_PHI * (b - a);
                    g2 = g(x2);
                }
            }
            let (t, gt) = if g1 >= g2 { (x1, g1) } else { (x2, g2) };
            if gt > fx + TIE {
                x[d] = t;
                fx = gt;
            }
        }
        if fx <= start + TIE {
            break;
        }
    }
    (x, fx)
}

/// Unitaries of a pure profile.
pub fn profile_unitaries(family: &StrategyFamily, profile: &[ParamPoint]) -> Result<Vec<UnitaryOperator>> {
    profile.iter().map(|p| param_unitary(family, p)).collect()
}

/// Runs a best-response search for every player with the others fixed at
/// `profile`; certified iff no player gains more than `cfg.epsilon`.
pub fn verify_nash(
    qg: &QuantumGame,
    profile: &[ParamPoint],
    family: &StrategyFamily,
    cfg: &SearchConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    if profile.len() != qg.players() {
        return Err(shape(format!(
            "profile has {} entries for {} players",
            profile.len(),
            qg.players()
        )));
    }
    let locals = profile_unitaries(family, profile)?;
    let payoffs = expected_payoffs_q(qg, &QuantumPlay::new(locals.clone()))?;
    let best = (0..qg.players())
        .map(|i| {
            let (p, v) = best_response(qg, i, &locals, family, cfg)?;
            Ok((StrategyChoice::Point(p), v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumReport::assemble(
        profile.iter().cloned().map(StrategyChoice::Point).collect(),
        payoffs,
        best,
        cfg.epsilon,
    ))
}

fn finite_ops(family: &StrategyFamily) -> Result<&[UnitaryOperator]> {
    match family {
        StrategyFamily::FiniteSet { operators, .. } => Ok(operators),
        _ => Err(Error::Unsupported(
            "mixed strategies need a finite operator set".into(),
        )),
    }
}

/// Mixture over the finite set as a play component.
fn mixture(ops: &[UnitaryOperator], probs: &[f64]) -> Result<Vec<(f64, UnitaryOperator)>> {
    if probs.len() != ops.len() {
        return Err(Error::InvalidMixture(format!(
            "{} probabilities for {} operators",
            probs.len(),
            ops.len()
        )));
    }
    Ok(probs.iter().copied().zip(ops.iter().cloned()).collect())
}

pub fn mixed_play(family: &StrategyFamily, mixtures: &[Vec<f64>]) -> Result<MixedQuantumPlay> {
    let ops = finite_ops(family)?;
    MixedQuantumPlay::new(mixtures.iter().map(|m| mixture(ops, m)).collect::<Result<_>>()?)
}

/// Payoff of each pure operator for `player` against the others' mixtures.
pub fn vertex_payoffs(
    qg: &QuantumGame,
    player: usize,
    others: &[Vec<f64>],
    family: &StrategyFamily,
) -> Result<Vec<f64>> {
    let ops = finite_ops(family)?;
    check_player(qg, player, family)?;
    if others.len() != qg.players() {
        return Err(shape(format!(
            "{} mixtures for {} players",
            others.len(),
            qg.players()
        )));
    }
    let mut locals = others
        .iter()
        .map(|m| mixture(ops, m))
        .collect::<Result<Vec<_>>>()?;
    locals[player] = vec![(1.0, UnitaryOperator::identity(family.dim()))];
    let sigma = final_state_mixed(qg, &MixedQuantumPlay::new(locals)?)?;
    let form = LocalPayoffForm::from_state(qg, player, &sigma)?;
    Ok(ops.iter().map(|u| form.evaluate(u.matrix())).collect())
}

/// The payoff is linear in the player's own mixture, so some vertex is
/// optimal; ties within TOL return the uniform mixture over tied vertices.
pub fn best_response_mixed_finite(
    qg: &QuantumGame,
    player: usize,
    others: &[Vec<f64>],
    family: &StrategyFamily,
) -> Result<Vec<f64>> {
    let v = vertex_payoffs(qg, player, others, family)?;
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<bool> = v.iter().map(|x| *x >= top - TOL).collect();
    let n = winners.iter().filter(|w| **w).count() as f64;
    Ok(winners.iter().map(|&w| if w { 1.0 / n } else { 0.0 }).collect())
}

/// Exact certification of a mixed profile over a finite operator set: each
/// player's best deviation is the best vertex.
pub fn verify_nash_mixed_finite(
    qg: &QuantumGame,
    mixtures: &[Vec<f64>],
    family: &StrategyFamily,
    cfg: &SearchConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    let payoffs = expected_payoffs_mixed(qg, &mixed_play(family, mixtures)?)?;
    let best = (0..qg.players())
        .map(|i| {
            let v = vertex_payoffs(qg, i, mixtures, family)?;
            let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let br = best_response_mixed_finite(qg, i, mixtures, family)?;
            Ok((StrategyChoice::Mixture(br), top))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumReport::assemble(
        mixtures.iter().cloned().map(StrategyChoice::Mixture).collect(),
        payoffs,
        best,
        cfg.epsilon,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoReport {
    pub labels: Vec<String>,
    pub payoffs: Vec<Vec<f64>>,
    /// relations[i][j] compares entry i (as "a") with entry j.
    pub relations: Vec<Vec<ParetoRelation>>,
    /// Labels of entries no other entry dominates, in input order.
    pub optimal: Vec<String>,
}

pub fn pareto_report(entries: &[(String, Vec<f64>)]) -> Result<ParetoReport> {
    if let Some((_, first)) = entries.first() {
        if let Some((l, _)) = entries.iter().find(|(_, v)| v.len() != first.len()) {
            return Err(shape(format!(
                "entry {l:?} has a payoff vector of different length"
            )));
        }
    }
    let relations: Vec<Vec<ParetoRelation>> = entries
        .iter()
        .map(|(_, a)| {
            entries
                .iter()
                .map(|(_, b)| pareto_relation(a, b))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let optimal = (0..entries.len())
        .filter(|&j| (0..entries.len()).all(|i| relations[i][j] != ParetoRelation::ADominates))
        .map(|j| entries[j].0.clone())
        .collect();
    Ok(ParetoReport {
        labels: entries.iter().map(|(l, _)| l.clone()).collect(),
        payoffs: entries.iter().map(|(_, v)| v.clone()).collect(),
        relations,
        optimal,
    })
}

/// Counter-strategy to an opponent's U in the two-qubit protocol with
/// initial state (|00⟩ + i|11⟩)/√2: V = U_D S conj(U) S†, S = diag(1, i).
/// Whichever qubit the responder holds, the final state is the η-basis
/// vector of the responder's best outcome (DC for the first player, CD for
/// the second), up to a global phase.
pub fn ewl_counter_response(opponent: &UnitaryOperator) -> Result<UnitaryOperator> {
    if opponent.dim() != 2 {
        return Err(shape("counter-response is defined for qubit strategies"));
    }
    let z = c(0.0, 0.0);
    let s = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), z], vec![z, c(0.0, 1.0)]])?;
    let ud = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])?;
    let m = ud
        .matmul(&s)?
        .matmul(&opponent.matrix().conjugate())?
        .matmul(&s.adjoint())?;
    UnitaryOperator::new(m)
}

/// Largest absolute central-difference partial derivative of `player`'s
/// payoff at `point`, holding the others fixed. Zero at interior optima.
pub fn stationarity_residual(
    qg: &QuantumGame,
    player: usize,
    others: &[UnitaryOperator],
    family: &StrategyFamily,
    point: &ParamPoint,
    h: f64,
) -> Result<f64> {
    if family.is_finite() {
        return Err(Error::Unsupported("no derivatives over a finite set".into()));
    }
    let payoff = |v: &[f64]| -> Result<f64> {
        let e = match v.len() {
            1 => u3_entries(v[0], 0.0, 0.0),
            2 => u3_entries(v[0], v[1], 0.0),
            _ => u3_entries(v[0], v[1], v[2]),
        };
        let u = UnitaryOperator::from_rows(&[vec![e[0], e[1]], vec![e[2], e[3]]])?;
        let mut locals = others.to_vec();
        locals[player] = u;
        Ok(expected_payoffs_q(qg, &QuantumPlay::new(locals))?[player])
    };
    let mut worst = 0.0f64;
    for d in 0..point.0.len() {
        let mut hi = point.0.clone();
        let mut lo = point.0.clone();
        hi[d] += h;
        lo[d] -= h;
        worst = worst.max(((payoff(&hi)? - payoff(&lo)?) / (2.0 * h)).abs());
    }
    Ok(worst)
}
