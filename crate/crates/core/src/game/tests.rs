use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::hj_solver::InitialData;
use crate::model::{normalize_potential, PotentialField};
use crate::scalar::{ratio, ExactScalar};

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_f64_exact(x).unwrap()
}

fn delta(k: u32) -> Q {
    ratio(1, 32 * k as i64)
}

fn setup(dim: usize, k: u32) -> (PotentialField<f64>, f64, Vec<Q>) {
    let raw = PotentialField::cos1d(dim).affine(2.0, 0.0);
    let n = normalize_potential(&raw);
    let (v, shift) = (n.field, n.subtracted);
    let anchor = anchor_point::<Q>(&v, k);
    (v, shift, anchor)
}

#[test]
fn constant_player_two_round_cost() {
    let v = PotentialField::constant(1, -1.0);
    let g = InitialData::sin(1);
    let rounds: Vec<Round<Q>> = (0..64).map(|_| Round { control: Control::Two, b: vec![Q::zero()], a: vec![Q::zero()] }).collect();
    let t = GameTranscript::new(delta(2), 2, vec![Q::zero()], rounds, v).unwrap();
    assert_eq!(t.duration(), Q::one());
    assert_eq!(transcript_cost(&t, &g), q(g.eval(&[0.0])) + q(2.0) * t.duration());
}

#[test]
fn empty_transcript_costs_the_data() {
    let (v, _, anchor) = setup(1, 4);
    let g = InitialData::cos(1);
    let t = GameTranscript::new(delta(4), 4, anchor.clone(), Vec::new(), v).unwrap();
    let x = anchor[0].to_f64_approx();
    assert_eq!(transcript_cost(&t, &g), q(g.eval(&[x])));
}

#[test]
fn mixed_transcript_matches_resummation() {
    let (v, _, anchor) = setup(2, 4);
    let g = InitialData::sin(2);
    let t = conforming_transcript(&v, 4, delta(4), anchor, &StrategyParams { rounds: 150, seed: 9, ..Default::default() }).unwrap();
    // Second pass: explicit states, midpoints and player costs, summed by player.
    let mut x = t.start().to_vec();
    let (mut one, mut two) = (Q::zero(), Q::zero());
    for r in t.rounds() {
        let next: Vec<Q> = x.iter().zip(r.velocity()).map(|(c, w)| c + t.delta() * w).collect();
        let mid: Vec<f64> = x.iter().zip(&next).map(|(a, b)| ((a + b) / ratio(2, 1)).to_f64_approx() * 4.0).collect();
        let vm = v.eval(&mid);
        match r.control {
            Control::One => one += t.delta() * q(-1.0 - vm),
            Control::Two => two += t.delta() * q(1.0 - vm),
        }
        x = next;
    }
    let end: Vec<f64> = x.iter().map(|c| c.to_f64_approx()).collect();
    assert_eq!(transcript_cost(&t, &g), q(g.eval(&end)) + one + two);
}

#[test]
fn state_updates_follow_the_dynamics() {
    let (v, _, anchor) = setup(1, 2);
    let t = conforming_transcript(&v, 2, delta(2), anchor, &StrategyParams { rounds: 80, seed: 1, ..Default::default() }).unwrap();
    let s = t.states();
    for (j, r) in t.rounds().iter().enumerate() {
        let step = &s[j + 1][0] - &s[j][0];
        let expect = match r.control {
            Control::One => &r.a[0],
            Control::Two => &r.b[0],
        };
        assert_eq!(step, t.delta() * expect);
    }
}

#[test]
fn pure_player_two_is_unchanged() {
    let (v, shift, anchor) = setup(1, 4);
    let g = InitialData::sin(1);
    let rounds: Vec<Round<Q>> =
        (0..20).map(|j| Round { control: Control::Two, b: vec![ratio(if j % 3 == 0 { -1 } else { 1 }, 2)], a: vec![Q::zero()] }).collect();
    let t = GameTranscript::new(delta(4), 4, anchor.clone(), rounds, v).unwrap();
    let red = trace_reduce(&t, &anchor, &g, shift).unwrap();
    assert_eq!(red.reduced.rounds(), t.rounds());
    assert!(red.certificate.removals.is_empty());
    assert_eq!(red.certificate.removed_total(), Q::zero());
    assert_eq!(red.certificate.original_cost, red.certificate.reduced_cost);
}

#[test]
fn forward_then_mirrored_back_trace() {
    let (v, shift, anchor) = setup(1, 4);
    let g = InitialData::sin(1);
    let steps = [ratio(1, 2), ratio(3, 4), ratio(-1, 4), ratio(1, 1)];
    let mut rounds: Vec<Round<Q>> = steps.iter().map(|b| Round { control: Control::Two, b: vec![b.clone()], a: vec![Q::zero()] }).collect();
    rounds.extend(steps.iter().rev().map(|b| Round { control: Control::One, b: vec![Q::zero()], a: vec![-b.clone()] }));
    let t = GameTranscript::new(delta(4), 4, anchor.clone(), rounds, v.clone()).unwrap();
    assert_eq!(t.end(), anchor);
    let red = trace_reduce(&t, &anchor, &g, shift).unwrap();
    assert!(red.reduced.rounds().is_empty());
    assert_eq!(red.certificate.removals.len(), 4);
    // Direct summation of -2 V at the shared midpoints.
    let s = t.states();
    let direct = (0..4).fold(Q::zero(), |acc, j| {
        let mid = ((&s[j][0] + &s[j + 1][0]) / ratio(2, 1)).to_f64_approx() * 4.0;
        let vm = v.eval(&[mid]);
        acc + t.delta() * (q(1.0 - vm) + q(-1.0 - vm))
    });
    assert_eq!(red.certificate.removed_total(), direct);
    assert!(direct >= Q::zero());
    assert!(red.certificate.holds());
}

#[test]
fn strategy_violations_name_the_round() {
    let (v, shift, anchor) = setup(1, 4);
    let g = InitialData::sin(1);
    let rounds = vec![
        Round { control: Control::Two, b: vec![ratio(1, 2)], a: vec![Q::zero()] },
        Round { control: Control::One, b: vec![Q::zero()], a: vec![ratio(1, 2)] },
    ];
    let t = GameTranscript::new(delta(4), 4, anchor.clone(), rounds, v.clone()).unwrap();
    assert!(matches!(trace_reduce(&t, &anchor, &g, shift), Err(Error::StrategyPattern { round: 1, .. })));
    let moving_at_anchor = vec![Round { control: Control::One, b: vec![Q::zero()], a: vec![ratio(1, 4)] }];
    let t = GameTranscript::new(delta(4), 4, anchor.clone(), moving_at_anchor, v).unwrap();
    assert!(matches!(trace_reduce(&t, &anchor, &g, shift), Err(Error::StrategyPattern { round: 0, .. })));
}

#[test]
fn controls_must_lie_in_the_unit_ball() {
    let (v, _, anchor) = setup(2, 4);
    let r = Round { control: Control::Two, b: vec![ratio(3, 4), ratio(3, 4)], a: vec![Q::zero(), Q::zero()] };
    assert!(GameTranscript::new(delta(4), 4, anchor, vec![r], v).is_err());
}

#[test]
fn random_two_dimensional_certificate() {
    let (v, shift, anchor) = setup(2, 16);
    let g = InitialData::sin(2);
    let t = conforming_transcript(&v, 16, delta(16), anchor.clone(), &StrategyParams { rounds: 200, seed: 5, ..Default::default() }).unwrap();
    let red = trace_reduce(&t, &anchor, &g, shift).unwrap();
    let c = &red.certificate;
    assert!(!c.removals.is_empty());
    assert!(c.all_nonnegative());
    assert_eq!(c.balance(), Q::zero());
    assert!(c.original_cost >= c.reduced_cost);
    assert!(red.reduced.rounds().iter().all(|r| r.control == Control::Two));
    assert!(red.reduced.duration() <= t.duration());
    assert_eq!(red.reduced.end(), t.end());
    assert_eq!(shift, 2.0);
}

#[test]
fn float_bookkeeping_balances_on_dyadic_data() {
    let raw = PotentialField::cos1d(1).affine(2.0, 0.0);
    let n = normalize_potential(&raw);
    let (v, shift) = (n.field, n.subtracted);
    let anchor = anchor_point::<f64>(&v, 16);
    let t = conforming_transcript(&v, 16, 1.0 / 512.0, anchor.clone(), &StrategyParams { rounds: 300, seed: 2, ..Default::default() }).unwrap();
    let red = trace_reduce(&t, &anchor, &InitialData::sin(1), shift).unwrap();
    assert!(red.certificate.holds());
}

#[test]
fn quasiconvexification_on_large_oscillation() {
    let v = PotentialField::cos1d(1).affine(2.0, -2.0);
    let mut params = QuasiconvexParams::for_dim(1);
    params.nx = 512;
    params.samples = 500;
    let rep = quasiconvexification_check(&v, &params).unwrap();
    assert!(!rep.uncharted);
    assert!(rep.tables_agree(), "ratio {} discrepancy {}", rep.max_discrepancy_ratio, rep.max_discrepancy);
    assert!(rep.max_discrepancy <= 2.0 * params.cell.tolerance);
    assert!(rep.ordering_holds(), "{} {}", rep.min_hamiltonian_gap, rep.min_solution_gap);
}

#[test]
fn unconverged_tables_are_rejected() {
    let v = PotentialField::cos1d(1).affine(2.0, -2.0);
    let mut params = QuasiconvexParams::for_dim(1);
    params.steps = 2;
    params.cell.cells = 64;
    params.cell.tolerance = 1e-3;
    assert!(matches!(quasiconvexification_check(&v, &params), Err(Error::FlaggedTable)));
}

#[test]
fn hamiltonian_gap_at_zero_slope() {
    use crate::model::HamiltonianModel;
    let v = PotentialField::<f64>::cos1d(1).affine(2.0, -2.0);
    let dw = HamiltonianModel::double_well(v.clone());
    let te = HamiltonianModel::truncated_eikonal(v);
    let y = [0.3];
    assert!((dw.eval_h(&y, &[0.0]).unwrap() - te.eval_h(&y, &[0.0]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn small_oscillation_is_flagged_uncharted() {
    let v = PotentialField::cos1d(1).affine(0.25, 0.0);
    let mut params = QuasiconvexParams::for_dim(1);
    params.steps = 4;
    params.cell.cells = 64;
    params.cell.halving = false;
    params.nx = 256;
    params.samples = 50;
    let rep = quasiconvexification_check(&v, &params).unwrap();
    assert!(rep.uncharted);
    assert!(rep.ordering_holds());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_hold(seed in 0u64..10_000, dim in 1usize..=2, p_one in 0.1f64..0.7, rounds in 0usize..160) {
        let (v, shift, anchor) = setup(dim, 8);
        let g = InitialData::sin(dim);
        let t = conforming_transcript(&v, 8, delta(8), anchor.clone(), &StrategyParams { rounds, p_one, seed, grain: 8 }).unwrap();
        let red = trace_reduce(&t, &anchor, &g, shift).unwrap();
        prop_assert!(red.certificate.all_nonnegative());
        prop_assert_eq!(red.certificate.balance(), Q::zero());
        prop_assert!(red.certificate.original_cost >= red.certificate.reduced_cost);
        prop_assert_eq!(red.kept.len(), red.reduced.rounds().len());
    }
}
