//! Finite n-player games in normal form.
//!
//! Payoffs are stored as one flat tensor per player, indexed by the play's
//! composite index Σ_k α_k · Π_{j>k} |S_j| (player 1 most significant). The
//! same index addresses the computational basis of the quantumized game.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::quantum::TOL;

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Play(pub Vec<usize>);

impl Play {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    fn with(&self, player: usize, strategy: usize) -> Play {
        let mut v = self.0.clone();
        v[player] = strategy;
        Play(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGame {
    player_names: Vec<String>,
    strategy_sets: Vec<Vec<String>>,
    payoffs: Vec<Vec<f64>>,
}

impl ClassicalGame {
    /// `payoffs[i]` is player i's tensor flattened with player 1 as the slowest index.
    pub fn new(
        player_names: Vec<String>,
        strategy_sets: Vec<Vec<String>>,
        payoffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = strategy_sets.len();
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 players, got {n}")));
        }
        if player_names.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} player names for {n} strategy sets",
                player_names.len()
            )));
        }
        if payoffs.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} payoff tensors for {n} players",
                payoffs.len()
            )));
        }
        for (i, set) in strategy_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidGame(format!("player {i} has no strategies")));
            }
            let mut sorted = set.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != set.len() {
                return Err(Error::InvalidGame(format!(
                    "player {i} has duplicate strategy labels"
                )));
            }
        }
        let plays: usize = strategy_sets.iter().map(Vec::len).product();
        for (i, t) in payoffs.iter().enumerate() {
            if t.len() != plays {
                return Err(Error::InvalidGame(format!(
                    "payoff tensor of player {i} has {} entries, expected {plays}",
                    t.len()
                )));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGame(format!(
                    "payoff tensor of player {i} has non-finite entries"
                )));
            }
        }
        Ok(Self {
            player_names,
            strategy_sets,
            payoffs,
        })
    }

    /// Two-player game from A's and B's payoff matrices (rows: player 1).
    pub fn bimatrix(
        names: [&str; 2],
        rows: &[&str],
        cols: &[&str],
        a: &[Vec<f64>],
        b: &[Vec<f64>],
    ) -> Result<Self> {
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        Self::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![
                rows.iter().map(|s| s.to_string()).collect(),
                cols.iter().map(|s| s.to_string()).collect(),
            ],
            vec![flat(a), flat(b)],
        )
    }

    pub fn players(&self) -> usize {
        self.strategy_sets.len()
    }

    pub fn player_names(&self) -> &[String] {
        &self.player_names
    }

    pub fn strategy_sets(&self) -> &[Vec<String>] {
        &self.strategy_sets
    }

    pub fn payoff_tensors(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    pub fn shape(&self) -> Vec<usize> {
        self.strategy_sets.iter().map(Vec::len).collect()
    }

    pub fn num_plays(&self) -> usize {
        self.strategy_sets.iter().map(Vec::len).product()
    }

    pub fn play_index(&self, play: &Play) -> Result<usize> {
        if play.0.len() != self.players() {
            return Err(shape(format!(
                "play has {} entries for {} players",
                play.0.len(),
                self.players()
            )));
        }
        let mut idx = 0;
        for (k, (&a, set)) in play.0.iter().zip(&self.strategy_sets).enumerate() {
            if a >= set.len() {
                return Err(shape(format!("strategy index {a} out of range for player {k}")));
            }
            idx = idx * set.len() + a;
        }
        Ok(idx)
    }

    pub fn play_at(&self, mut index: usize) -> Play {
        let mut v = vec![0; self.players()];
        for (k, set) in self.strategy_sets.iter().enumerate().rev() {
            v[k] = index % set.len();
            index /= set.len();
        }
        Play(v)
    }

    /// All plays in lexicographic order.
    pub fn plays(&self) -> impl Iterator<Item = Play> + '_ {
        (0..self.num_plays()).map(|i| self.play_at(i))
    }

    pub fn payoff(&self, player: usize, play: &Play) -> Result<f64> {
        Ok(self.payoffs[player][self.play_index(play)?])
    }

    pub fn payoff_vector(&self, play: &Play) -> Result<Vec<f64>> {
        let idx = self.play_index(play)?;
        Ok(self.payoffs.iter().map(|t| t[idx]).collect())
    }

    /// Strategy labels concatenated, or comma-joined when any label is longer
    /// than one character.
    pub fn play_label(&self, play: &Play) -> String {
        let labels: Vec<&str> = play
            .0
            .iter()
            .zip(&self.strategy_sets)
            .map(|(&a, s)| s[a].as_str())
            .collect();
        if self.single_char_labels() {
            labels.concat()
        } else {
            labels.join(",")
        }
    }

    pub fn parse_play_label(&self, label: &str) -> Result<Play> {
        let parts: Vec<String> = if label.contains(',') {
            label.split(',').map(|s| s.trim().to_string()).collect()
        } else if self.single_char_labels() {
            label.chars().map(String::from).collect()
        } else {
            vec![label.to_string()]
        };
        if parts.len() != self.players() {
            return Err(Error::UnknownName(format!("play label {label:?}")));
        }
        let idx = parts
            .iter()
            .zip(&self.strategy_sets)
            .map(|(p, set)| {
                set.iter()
                    .position(|s| s == p)
                    .ok_or_else(|| Error::UnknownName(format!("strategy {p:?} in play {label:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Play(idx))
    }

    fn single_char_labels(&self) -> bool {
        self.strategy_sets
            .iter()
            .flatten()
            .all(|s| s.chars().count() == 1)
    }
}

impl fmt::Display for ClassicalGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.plays() {
            let v = self.payoff_vector(&p).map_err(|_| fmt::Error)?;
            writeln!(f, "{:>8}  {:?}", self.play_label(&p), v)?;
        }
        Ok(())
    }
}

/// Independent per-player distributions over strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    distributions: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(distributions: Vec<Vec<f64>>) -> Result<Self> {
        for (i, d) in distributions.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::InvalidMixture(format!(
                    "player {i} has an empty distribution"
                )));
            }
            if d.iter().any(|p| !p.is_finite() || *p < -TOL) {
                return Err(Error::InvalidMixture(format!(
                    "player {i} has a negative or non-finite probability"
                )));
            }
            let s: f64 = d.iter().sum();
            if (s - 1.0).abs() > TOL {
                return Err(Error::InvalidMixture(format!(
                    "player {i} probabilities sum to {s}"
                )));
            }
        }
        Ok(Self { distributions })
    }

    /// Point masses at `play`.
    pub fn pure(game: &ClassicalGame, play: &Play) -> Result<Self> {
        game.play_index(play)?;
        let d = play
            .0
            .iter()
            .zip(game.shape())
            .map(|(&a, n)| (0..n).map(|k| if k == a { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(d)
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.distributions
    }

    fn check_shape(&self, game: &ClassicalGame) -> Result<()> {
        if self.distributions.len() != game.players()
            || self
                .distributions
                .iter()
                .zip(game.shape())
                .any(|(d, n)| d.len() != n)
        {
            return Err(shape("mixed profile does not match the game's strategy sets"));
        }
        Ok(())
    }

    fn with_pure(&self, player: usize, strategy: usize) -> Self {
        let mut d = self.distributions.clone();
        let n = d[player].len();
        d[player] = (0..n).map(|k| if k == strategy { 1.0 } else { 0.0 }).collect();
        Self { distributions: d }
    }
}

/// π̄_i = Σ over plays of Π_k p_k(α_k) · π_i(play).
pub fn expected_payoffs(game: &ClassicalGame, profile: &MixedProfile) -> Result<Vec<f64>> {
    profile.check_shape(game)?;
    let mut out = vec![0.0; game.players()];
    for (idx, play) in game.plays().enumerate() {
        let w: f64 = play
            .0
            .iter()
            .zip(&profile.distributions)
            .map(|(&a, d)| d[a])
            .product();
        if w == 0.0 {
            continue;
        }
        for (o, t) in out.iter_mut().zip(&game.payoffs) {
            *o += w * t[idx];
        }
    }
    Ok(out)
}

/// Largest improvement any single player gets from switching to a pure strategy.
pub fn max_deviation_gain(game: &ClassicalGame, profile: &MixedProfile) -> Result<f64> {
    let base = expected_payoffs(game, profile)?;
    let mut gain = f64::NEG_INFINITY;
    for (i, n) in game.shape().into_iter().enumerate() {
        for s in 0..n {
            let dev = expected_payoffs(game, &profile.with_pure(i, s))?;
            gain = gain.max(dev[i] - base[i]);
        }
    }
    Ok(gain.max(0.0))
}

/// Per player, a (strictly) dominant strategy if one exists. Weak mode returns
/// the lowest-index dominant strategy.
pub fn dominant_strategies(game: &ClassicalGame, strict: bool) -> Vec<Option<usize>> {
    let shape = game.shape();
    (0..game.players())
        .map(|i| {
            (0..shape[i]).find(|&s| {
                game.plays().filter(|p| p.0[i] == s).all(|p| {
                    let mine = game.payoffs[i][game.play_index(&p).unwrap()];
                    (0..shape[i]).filter(|&t| t != s).all(|t| {
                        let other = game.payoffs[i][game.play_index(&p.with(i, t)).unwrap()];
                        if strict {
                            mine > other + TOL
                        } else {
                            mine >= other - TOL
                        }
                    })
                })
            })
        })
        .collect()
}

/// Every pure play from which no unilateral deviation pays (strictly: every
/// deviation loses), in lexicographic order.
pub fn pure_nash(game: &ClassicalGame, strict: bool) -> Vec<Play> {
    let shape = game.shape();
    game.plays()
        .filter(|p| {
            let idx = game.play_index(p).unwrap();
            (0..game.players()).all(|i| {
                let here = game.payoffs[i][idx];
                (0..shape[i]).filter(|&t| t != p.0[i]).all(|t| {
                    let there = game.payoffs[i][game.play_index(&p.with(i, t)).unwrap()];
                    if strict {
                        here > there + TOL
                    } else {
                        here >= there - TOL
                    }
                })
            })
        })
        .collect()
}

const MAX_SUPPORT_STRATEGIES: usize = 4;

/// Support enumeration for two-player games with at most four strategies per
/// player. Each candidate solves the opponent-indifference system on a support
/// pair (minimum-norm least squares, so degenerate games still yield a point)
/// and is kept only if no pure deviation gains more than `TOL`.
pub fn mixed_nash_two_player(game: &ClassicalGame) -> Result<Vec<MixedProfile>> {
    if game.players() != 2 {
        return Err(Error::Unsupported(format!(
            "mixed equilibrium search needs 2 players, got {}",
            game.players()
        )));
    }
    let (m, n) = (game.shape()[0], game.shape()[1]);
    if m > MAX_SUPPORT_STRATEGIES || n > MAX_SUPPORT_STRATEGIES {
        return Err(Error::Unsupported(format!(
            "support enumeration limited to {MAX_SUPPORT_STRATEGIES} strategies per player"
        )));
    }
    let a = DMatrix::from_row_slice(m, n, &game.payoffs[0]);
    let b = DMatrix::from_row_slice(m, n, &game.payoffs[1]);
    let bt = b.transpose();

    let mut found: Vec<MixedProfile> = Vec::new();
    for row_mask in 1u32..(1 << m) {
        let rows = mask_indices(row_mask, m);
        for col_mask in 1u32..(1 << n) {
            let cols = mask_indices(col_mask, n);
            // column player's mix makes the row player indifferent over `rows`
            let Some(q) = indifferent_mix(&a, &rows, &cols) else {
                continue;
            };
            let Some(p) = indifferent_mix(&bt, &cols, &rows) else {
                continue;
            };
            let profile = MixedProfile {
                distributions: vec![p, q],
            };
            if max_deviation_gain(game, &profile)? > TOL {
                continue;
            }
            let dup = found.iter().any(|f| {
                f.distributions
                    .iter()
                    .flatten()
                    .zip(profile.distributions.iter().flatten())
                    .all(|(x, y)| (x - y).abs() <= TOL)
            });
            if !dup {
                found.push(profile);
            }
        }
    }
    Ok(found)
}

fn mask_indices(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|k| mask & (1 << k) != 0).collect()
}

/// Distribution over `support` (embedded in the full strategy set) such that
/// every strategy in `opponent_support` earns the same payoff under `payoff`
/// (rows: opponent strategies, cols: own strategies).
fn indifferent_mix(payoff: &DMatrix<f64>, opponent_support: &[usize], support: &[usize]) -> Option<Vec<f64>> {
    let r = opponent_support.len();
    let k = support.len();
    // unknowns: x_j for j in support, then the common value v
    let mut m = DMatrix::<f64>::zeros(r + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(r + 1);
    for (ri, &i) in opponent_support.iter().enumerate() {
        for (ci, &j) in support.iter().enumerate() {
            m[(ri, ci)] = payoff[(i, j)];
        }
        m[(ri, k)] = -1.0;
    }
    for ci in 0..k {
        m[(r, ci)] = 1.0;
    }
    rhs[r] = 1.0;

    let scale = 1.0 + payoff.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let svd = m.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-12 * scale).ok()?;
    let residual = (&m * &sol - &rhs).amax();
    if residual > 1e-9 * scale {
        return None;
    }
    let mut full = vec![0.0; payoff.ncols()];
    for (ci, &j) in support.iter().enumerate() {
        let x = sol[ci];
        if x < -TOL {
            return None;
        }
        full[j] = x.max(0.0);
    }
    let total: f64 = full.iter().sum();
    if total <= 0.0 {
        return None;
    }
    full.iter_mut().for_each(|x| *x /= total);
    Some(full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParetoRelation {
    ADominates,
    BDominates,
    Equal,
    Incomparable,
}

impl ParetoRelation {
    pub fn reversed(self) -> Self {
        match self {
            Self::ADominates => Self::BDominates,
            Self::BDominates => Self::ADominates,
            other => other,
        }
    }
}

impl fmt::Display for ParetoRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ADominates => "a_dominates",
            Self::BDominates => "b_dominates",
            Self::Equal => "equal",
            Self::Incomparable => "incomparable",
        })
    }
}

pub fn pareto_relation(a: &[f64], b: &[f64]) -> Result<ParetoRelation> {
    pareto_relation_tol(a, b, TOL)
}

/// Componentwise comparison; "dominates" means at least as good everywhere
/// and not equal within `tol`.
pub fn pareto_relation_tol(a: &[f64], b: &[f64], tol: f64) -> Result<ParetoRelation> {
    if a.len() != b.len() {
        return Err(shape(format!(
            "payoff vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ge = a.iter().zip(b).all(|(x, y)| *x >= y - tol);
    let le = a.iter().zip(b).all(|(x, y)| *x <= y + tol);
    Ok(match (ge, le) {
        (true, true) => ParetoRelation::Equal,
        (true, false) => ParetoRelation::ADominates,
        (false, true) => ParetoRelation::BDominates,
        (false, false) => ParetoRelation::Incomparable,
    })
}

/// Plays whose payoff vector no other play dominates.
pub fn pareto_optimal_plays(game: &ClassicalGame) -> Vec<Play> {
    let vectors: Vec<Vec<f64>> = game.plays().map(|p| game.payoff_vector(&p).unwrap()).collect();
    game.plays()
        .enumerate()
        .filter(|(i, _)| {
            vectors
                .iter()
                .all(|other| pareto_relation(other, &vectors[*i]).unwrap() != ParetoRelation::ADominates)
        })
        .map(|(_, p)| p)
        .collect()
}
