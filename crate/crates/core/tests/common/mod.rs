//! Helpers shared by the integration tests: random instances and oracles
//! that recompute results without going through the library's own routes.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qgame::classical::ClassicalGame;
use qgame::quantum::{ComplexMatrix, DensityMatrix, MeasurementBasis, UnitaryOperator};
use qgame::quantumizer::{build_ewl, QuantumGame};
use rand::Rng;

pub type Cm = DMatrix<Complex64>;

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Cm {
    Cm::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Unitary Q factor of a random complex matrix.
pub fn random_unitary_matrix<R: Rng>(rng: &mut R, n: usize) -> Cm {
    random_complex(rng, n).qr().q()
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> UnitaryOperator {
    UnitaryOperator::new(ComplexMatrix::from_dmatrix(random_unitary_matrix(rng, n)).unwrap()).unwrap()
}

/// G G† / Tr, a full-rank random density matrix.
pub fn random_density_matrix<R: Rng>(rng: &mut R, n: usize) -> Cm {
    let g = random_complex(rng, n);
    let m = &g * g.adjoint();
    let t = m.trace();
    let m = m / t;
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::from_dmatrix(random_density_matrix(rng, n)).unwrap()).unwrap()
}

const LETTERS: [&str; 3] = ["a", "b", "c"];

/// Random game with 2..=max_players players and 1..=3 strategies each.
/// Integer payoffs make ties (and weak equilibria) common.
pub fn random_game<R: Rng>(rng: &mut R, max_players: usize, integer: bool) -> ClassicalGame {
    let n = rng.gen_range(2..=max_players);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let plays: usize = sizes.iter().product();
    let payoffs = (0..n)
        .map(|_| {
            (0..plays)
                .map(|_| {
                    if integer {
                        rng.gen_range(-3..=3) as f64
                    } else {
                        rng.gen_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect();
    ClassicalGame::new(
        (0..n).map(|i| format!("P{i}")).collect(),
        sizes
            .iter()
            .map(|&k| LETTERS[..k].iter().map(|s| s.to_string()).collect())
            .collect(),
        payoffs,
    )
    .unwrap()
}

/// Decode a flat play index, first player slowest.
pub fn decode(mut index: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        out[k] = index % sizes[k];
        index /= sizes[k];
    }
    out
}

pub fn encode(play: &[usize], sizes: &[usize]) -> usize {
    play.iter().zip(sizes).fold(0, |acc, (&a, &s)| acc * s + a)
}

/// Brute-force weak pure equilibria straight from the payoff tensors.
pub fn brute_force_pure_nash(g: &ClassicalGame) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = g.strategy_sets().iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let pay = g.payoff_tensors();
    let mut out = Vec::new();
    'plays: for idx in 0..total {
        let play = decode(idx, &sizes);
        for (i, &size) in sizes.iter().enumerate() {
            for alt in 0..size {
                let mut dev = play.clone();
                dev[i] = alt;
                if pay[i][encode(&dev, &sizes)] > pay[i][idx] + 1e-9 {
                    continue 'plays;
                }
            }
        }
        out.push(play);
    }
    out
}

/// Random quantum game: random base game, random orthonormal measurement
/// basis (QR columns) and random mixed initial state.
pub fn random_quantum_game<R: Rng>(rng: &mut R) -> (QuantumGame, Vec<Vec<Complex64>>) {
    let g = random_game(rng, 3, false);
    let dim = g.num_plays();
    let q = random_unitary_matrix(rng, dim);
    let kets: Vec<Vec<Complex64>> = (0..dim).map(|k| q.column(k).iter().copied().collect()).collect();
    let labels: Vec<String> = g.plays().map(|p| g.play_label(&p)).collect();
    let basis = MeasurementBasis::from_kets(&kets, labels).unwrap();
    let rho = random_density(rng, dim);
    (build_ewl(g, rho, basis).unwrap(), kets)
}

pub fn kron_all(ms: &[Cm]) -> Cm {
    ms[1..].iter().fold(ms[0].clone(), |acc, m| acc.kronecker(m))
}

/// Expected payoffs as Σ_k ⟨b_k|UρU†|b_k⟩ π(play_k), computed with raw
/// nalgebra from the basis kets.
pub fn payoff_oracle(qg: &QuantumGame, kets: &[Vec<Complex64>], locals: &[Cm]) -> Vec<f64> {
    let u = kron_all(locals);
    let rho = qg.initial_state().matrix().inner();
    let out = &u * rho * u.adjoint();
    let g = qg.base();
    let mut pay = vec![0.0; g.players()];
    for (k, ket) in kets.iter().enumerate() {
        let v = Cm::from_column_slice(ket.len(), 1, ket);
        let p = (v.adjoint() * &out * &v)[(0, 0)].re;
        let play = g.play_at(k);
        for (i, slot) in pay.iter_mut().enumerate() {
            *slot += p * g.payoff(i, &play).unwrap();
        }
    }
    pay
}

pub fn commutator(a: &Cm, b: &Cm) -> f64 {
    (a * b - b * a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// EWL Prisoner's Dilemma payoffs for player A in the order CC, CD, DC, DD.
pub fn pd_table(alpha: f64, beta: f64, gamma: f64) -> [(f64, f64); 4] {
    [(-gamma, -gamma), (-alpha, 0.0), (0.0, -alpha), (-beta, -beta)]
}

/// Catalog entries at default parameters, loaded (and re-verified) once.
pub fn cached_entry(name: &str) -> &'static qgame::catalog::CatalogEntry {
    use std::collections::BTreeMap;
    use std::sync::OnceLock;
    static ENTRIES: OnceLock<Vec<qgame::catalog::CatalogEntry>> = OnceLock::new();
    let all = ENTRIES.get_or_init(|| {
        qgame::catalog::NAMES
            .iter()
            .map(|n| qgame::catalog::load(n, &BTreeMap::new()).unwrap())
            .collect()
    });
    all.iter().find(|e| e.name == name).expect("known catalog name")
}
