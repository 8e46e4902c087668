mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::*;
use proptest::prelude::*;
use qgame::catalog::QuantumEntry;
use qgame::classical::{
    dominant_strategies, expected_payoffs, max_deviation_gain, mixed_nash_two_player, pareto_relation,
    pure_nash, ClassicalGame, MixedProfile, ParetoRelation, Play,
};
use qgame::quantum::{
    c, evolve_density, tensor_unitaries, ComplexMatrix, DensityMatrix, PureState, UnitaryOperator, TOL,
};
use qgame::quantumizer::{
    build_ewl, computational_basis, computational_state, expected_payoffs_q, final_state,
    outcome_distribution, play_sequential, QuantumPlay,
};
use qgame::strategy::{named_operator, param_unitary, ParamPoint, StrategyFamily};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}

fn permutation_unitary(perm: &[usize]) -> UnitaryOperator {
    let n = perm.len();
    let mut rows = vec![vec![c(0.0, 0.0); n]; n];
    for (j, &to) in perm.iter().enumerate() {
        rows[to][j] = c(1.0, 0.0);
    }
    UnitaryOperator::from_rows(&rows).unwrap()
}

fn three(t: f64, p: f64, l: f64) -> UnitaryOperator {
    param_unitary(&StrategyFamily::ThreeParam, &ParamPoint(vec![t, p, l])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dominant_profiles_are_equilibria(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 3, true);
        let dom = dominant_strategies(&g, false);
        if dom.iter().all(Option::is_some) {
            let play = Play(dom.iter().map(|d| d.unwrap()).collect());
            prop_assert!(pure_nash(&g, false).contains(&play));
        }
    }

    #[test]
    fn mixed_equilibria_admit_no_profitable_deviation(seed in any::<u64>(), integer in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 2, integer);
        for m in mixed_nash_two_player(&g).unwrap() {
            prop_assert!(max_deviation_gain(&g, &m).unwrap() <= TOL);
        }
    }

    #[test]
    fn pareto_relation_is_antisymmetric(a in prop::collection::vec(-3i32..=3, 3), b in prop::collection::vec(-3i32..=3, 3)) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        prop_assert_eq!(pareto_relation(&a, &a).unwrap(), ParetoRelation::Equal);
        prop_assert_eq!(pareto_relation(&a, &b).unwrap(), pareto_relation(&b, &a).unwrap().reversed());
    }

    #[test]
    fn expected_payoffs_are_multilinear(seed in any::<u64>(), t in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 3, false);
        let shape = g.shape();
        let base: Vec<Vec<f64>> = shape.iter().map(|&k| random_distribution(&mut rng, k)).collect();
        let i = rng.gen_range(0..shape.len());
        let other = random_distribution(&mut rng, shape[i]);
        let with = |d: Vec<f64>| {
            let mut v = base.clone();
            v[i] = d;
            expected_payoffs(&g, &MixedProfile::new(v).unwrap()).unwrap()
        };
        let mix: Vec<f64> = base[i].iter().zip(&other).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let (e0, e1, em) = (with(base[i].clone()), with(other), with(mix));
        for k in 0..em.len() {
            prop_assert!((em[k] - (t * e0[k] + (1.0 - t) * e1[k])).abs() <= TOL);
        }
    }

    #[test]
    fn parametric_strategies_are_special_unitary(t in 0.0..PI, p in 0.0..TAU, l in 0.0..TAU) {
        let u = three(t, p, l);
        let m = u.matrix();
        let g = m.adjoint().matmul(m).unwrap();
        prop_assert!(g.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() <= 1e-12);
        prop_assert!((u.determinant() - c(1.0, 0.0)).norm() <= TOL);
    }

    #[test]
    fn families_nest(t in 0.0..PI, p in 0.0..FRAC_PI_2) {
        let two = param_unitary(&StrategyFamily::TwoParam, &ParamPoint(vec![t, p])).unwrap();
        prop_assert!(three(t, p, 0.0).matrix().max_abs_diff(two.matrix()).unwrap() <= 1e-15);
        let one = param_unitary(&StrategyFamily::OneParam, &ParamPoint(vec![t])).unwrap();
        let two0 = param_unitary(&StrategyFamily::TwoParam, &ParamPoint(vec![t, 0.0])).unwrap();
        prop_assert!(two0.matrix().max_abs_diff(one.matrix()).unwrap() <= 1e-15);
    }

    /// (U_D U†) applied after U on the same qubit is U_D, so the final state
    /// is the one U_D alone produces: |η_CD⟩ when the first qubit idles and
    /// the second player's qubit carries the pair.
    #[test]
    fn undoing_a_strategy_then_defecting(t in 0.0..PI, p in 0.0..TAU, l in 0.0..TAU) {
        let e = cached_entry("prisoners_dilemma");
        let QuantumEntry::Parallel(qg) = &e.quantum else { unreachable!() };
        let u = three(t, p, l);
        let ud = named_operator("UD").unwrap();
        let response = ud.compose(&u.adjoint()).unwrap();
        let b = response.compose(&u).unwrap();
        let rho = final_state(qg, &QuantumPlay::new(vec![UnitaryOperator::identity(2), b])).unwrap();
        let cd = qg.basis().index_of("CD").unwrap();
        let want = DensityMatrix::new(qg.basis().projectors()[cd].clone()).unwrap();
        prop_assert!(rho.distance(&want).unwrap() <= TOL);
    }

    #[test]
    fn one_param_play_is_a_classical_mixture(ta in 0.0..PI, tb in 0.0..PI) {
        let e = cached_entry("prisoners_dilemma");
        let QuantumEntry::Parallel(qg) = &e.quantum else { unreachable!() };
        let fam = StrategyFamily::OneParam;
        let ops = vec![
            param_unitary(&fam, &ParamPoint(vec![ta])).unwrap(),
            param_unitary(&fam, &ParamPoint(vec![tb])).unwrap(),
        ];
        let rho = final_state(qg, &QuantumPlay::new(ops)).unwrap();
        let coop = [(ta / 2.0).cos().powi(2), (tb / 2.0).cos().powi(2)];
        for (play, p) in outcome_distribution(qg, &rho).unwrap() {
            let want: f64 = (0..2).map(|i| if play.0[i] == 0 { coop[i] } else { 1.0 - coop[i] }).product();
            prop_assert!((p - want).abs() <= TOL);
        }
    }

    #[test]
    fn permutations_embed_the_classical_game(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 3, false);
        let shape = g.shape();
        let start = Play(shape.iter().map(|&k| rng.gen_range(0..k)).collect());
        let qg = build_ewl(g.clone(), computational_state(&g, &start).unwrap(), computational_basis(&g).unwrap()).unwrap();
        let perms: Vec<Vec<usize>> = shape
            .iter()
            .map(|&k| {
                let mut p: Vec<usize> = (0..k).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let locals: Vec<UnitaryOperator> = perms.iter().map(|p| permutation_unitary(p)).collect();
        let got = expected_payoffs_q(&qg, &QuantumPlay::new(locals)).unwrap();
        let moved = Play(start.0.iter().zip(&perms).map(|(&a, p)| p[a]).collect());
        prop_assert_eq!(got, g.payoff_vector(&moved).unwrap());
    }

    #[test]
    fn penny_flip_is_zero_sum(seed in any::<u64>()) {
        let e = cached_entry("penny_flip");
        let QuantumEntry::Sequential(sg) = &e.quantum else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moves: Vec<UnitaryOperator> = (0..3)
            .map(|k| match (k, rng.gen_range(0..3)) {
                (1, 0) => named_operator("N").unwrap(),
                (1, 1) => named_operator("F").unwrap(),
                _ => random_unitary(&mut rng, 2),
            })
            .collect();
        let pay = play_sequential(sg, &moves).unwrap();
        prop_assert!((pay[0] + pay[1]).abs() <= TOL);
    }

    #[test]
    fn quantum_payoffs_match_the_product_operator_route(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (qg, _) = random_quantum_game(&mut rng);
        let locals: Vec<UnitaryOperator> = qg.local_dims().iter().map(|&d| random_unitary(&mut rng, d)).collect();
        let rho = evolve_density(qg.initial_state(), &tensor_unitaries(&locals).unwrap()).unwrap();
        let direct: Vec<f64> = qg.payoff_operators().iter().map(|op| rho.matrix().trace_of_product(op).unwrap().re).collect();
        let got = expected_payoffs_q(&qg, &QuantumPlay::new(locals)).unwrap();
        for (a, b) in got.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= TOL);
        }
    }
}

#[test]
fn penny_flip_classical_plays_are_zero_sum() {
    let e = cached_entry("penny_flip");
    let g: &ClassicalGame = &e.classical;
    assert_eq!(g.plays().count(), 8);
    for p in g.plays() {
        assert_eq!(g.payoff(0, &p).unwrap(), -g.payoff(1, &p).unwrap());
    }
}

#[test]
fn classical_sequences_end_where_the_table_says() {
    let e = cached_entry("penny_flip");
    let QuantumEntry::Sequential(sg) = &e.quantum else {
        unreachable!()
    };
    // N, F, N: one flip leaves tails, so C wins.
    let ops: Vec<UnitaryOperator> = ["N", "F", "N"]
        .iter()
        .map(|m| named_operator(m).unwrap())
        .collect();
    let pay = play_sequential(sg, &ops).unwrap();
    assert_eq!(pay, vec![-1.0, 1.0]);
    let heads = PureState::basis(2, 0).unwrap().to_density();
    assert!(sg.initial_state().distance(&heads).unwrap() < 1e-15);
}
