use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::metric::{DiscreteActionMetric, MetricOptions};
use crate::model::{HamiltonianModel, ModelLagrangian, PotentialField};

fn free(_: &[f64], q: &[f64]) -> crate::Result<Option<f64>> {
    Ok(Some(0.5 * q.iter().map(|c| c * c).sum::<f64>()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[test]
fn coordinate_map_vanishes_at_the_poles() {
    for m in 1..=4 {
        let x = odd_map_zero(|x: &[f64]| x[..m].to_vec(), m, 1e-12).unwrap();
        assert!(norm(&x[..m]) <= 1e-12, "m={m}: {x:?}");
        assert!((x[m].abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cubic_map_on_the_two_sphere() {
    let x = odd_map_zero(|x: &[f64]| vec![x[0].powi(3), x[1]], 2, 1e-10).unwrap();
    assert!(x[0].powi(3).abs() <= 1e-10 && x[1].abs() <= 1e-10);
    assert!((norm(&x) - 1.0).abs() < 1e-12);
}

#[test]
fn even_map_is_rejected() {
    let r = odd_map_zero(|x: &[f64]| vec![x[0] * x[0] + 0.5, x[1]], 2, 1e-8);
    assert!(matches!(r, Err(Error::NotOdd { .. })));
}

#[test]
fn sphere_points_are_unit_and_spread() {
    let pts = sphere_points::<f64>(2, 2000);
    assert!(pts.iter().all(|p| (norm(p) - 1.0).abs() < 1e-12));
    // Every octant is populated roughly evenly.
    let mut counts = [0usize; 8];
    for p in &pts {
        counts[(p[0] > 0.0) as usize + 2 * (p[1] > 0.0) as usize + 4 * (p[2] > 0.0) as usize] += 1;
    }
    assert!(counts.iter().all(|&c| c > 180 && c < 320), "{counts:?}");
}

#[test]
fn random_path_map_zero_is_tight() {
    let path = PolyPath::<f64>::random(2, 10, 3).unwrap();
    let d = decompose_half(&path, 1e-8).unwrap();
    assert!(d.residual_norm() <= 1e-8);
    assert!(d.len() <= 1);
}

#[test]
fn straight_segment_gives_the_first_half() {
    let v = vec![0.7, -1.3];
    let path = PolyPath::<f64>::new(vec![0.0, 1.0], vec![vec![0.0, 0.0], v.clone()]).unwrap();
    let d = decompose_half(&path, 1e-12).unwrap();
    assert_eq!(d.len(), 1);
    assert!((d.total_length() - 0.5).abs() < 1e-12);
    assert!(d.residual_norm() < 1e-12);
}

#[test]
fn monotone_one_dimensional_path() {
    let path = PolyPath::<f64>::new(vec![0.0, 0.2, 0.9, 1.0], vec![vec![0.0], vec![3.0], vec![3.5], vec![5.0]]).unwrap();
    let d = decompose_half(&path, 1e-12).unwrap();
    assert_eq!(d.len(), 1);
    let [a, b] = d.intervals[0];
    assert!((path.eval(b)[0] - path.eval(a)[0] - 2.5).abs() < 1e-12);
}

#[test]
fn cell_enumeration_agrees_with_descent() {
    // Seeds where sampled descent alone stalls; the exact cell search still finds a zero.
    for (nv, seed) in [(6, 103u64), (7, 148), (5, 157)] {
        let path = PolyPath::<f64>::random(3, nv, seed).unwrap();
        let d = decompose_half(&path, 1e-9).unwrap();
        assert!(d.residual_norm() <= 1e-9 && d.len() <= 2);
    }
}

#[test]
fn lattice_path_and_evaluation() {
    let p = PolyPath::<f64>::from_lattice(&[[0, 0], [2, 1], [3, 3]], 2, 0.25, 0.5).unwrap();
    assert_eq!(p.duration(), 1.0);
    assert_eq!(p.eval(0.25), vec![0.25, 0.125]);
    assert_eq!(p.eval(5.0), vec![0.75, 0.75]);
    let r = p.reversed();
    assert_eq!(r.eval(0.0), vec![0.75, 0.75]);
    assert_eq!(r.eval(0.75), p.eval(0.25));
}

#[test]
fn gauss_rule_integrates_cubics() {
    let p = PolyPath::new(vec![0.0, 2.0], vec![vec![0.0], vec![2.0]]).unwrap();
    let a = p.action(|x: &[f64], _: &[f64]| Ok(Some(x[0].powi(3) - x[0]))).unwrap();
    assert!((a - (4.0 - 2.0)).abs() < 1e-12);
}

#[test]
fn straight_reassembly_matches_the_connector_budget() {
    let v = [0.8, 0.3];
    let t = 6.0;
    let gamma = PolyPath::new(vec![0.0, 2.0 * t], vec![vec![0.0, 0.0], vec![2.0 * t * v[0], 2.0 * t * v[1]]]).unwrap();
    let r = reassemble_half_time(&gamma, free, 1e-10).unwrap();
    assert_eq!(r.eta.end_time(), t);
    assert_eq!(r.eta.end(), &[t * v[0], t * v[1]][..]);
    let connectors: f64 = r.jumps.iter().map(|j| 0.5 * norm(j).powi(2) / r.connector_time).sum();
    let expect = norm(&v).powi(2) + 2.0 * connectors;
    assert!((r.c_meas - expect).abs() < 1e-8, "{} vs {expect}", r.c_meas);
}

#[test]
fn short_horizon_uses_the_direct_connector() {
    let gamma = PolyPath::new(vec![0.0, 0.5, 3.0], vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let r = reassemble_half_time(&gamma, free, 1e-10).unwrap();
    assert!(r.decomposition.is_none());
    assert_eq!(r.eta.vertices(), &[vec![0.0, 0.0], vec![0.5, 0.5]][..]);
    assert_eq!(r.eta.end_time(), 1.5);
}

#[test]
fn reassembly_of_a_lattice_minimizer() {
    let model = HamiltonianModel::quadratic(PotentialField::<f64>::cos2d());
    let metric = DiscreteActionMetric::new(&model, &MetricOptions::default()).unwrap();
    let path = metric.minimizer(metric.to_steps(8.0).unwrap(), [0, 0], [8, 4]).unwrap();
    let gamma = PolyPath::from_lattice(&path.nodes, 2, metric.h(), metric.tau()).unwrap();
    let l = ModelLagrangian::new(&model, 8.0, None, None);
    let r = reassemble_half_time(&gamma, |y: &[f64], q: &[f64]| l.eval(y, q), 1e-9).unwrap();
    let k = r.decomposition.as_ref().unwrap().len();
    assert!(k <= 2);
    assert_eq!(r.eta.end_time(), 4.0);
    assert_eq!(r.eta.end(), &[1.0, 0.5][..]);
    for j in &r.jumps[..k] {
        assert!(j.iter().all(|&c| (-1e-12..1.0).contains(&c)), "{j:?}");
    }
    assert!(r.c_meas.is_finite());
}

fn random_path() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=3, 2usize..=12, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_bounds((m, nv, seed) in random_path()) {
        let path = PolyPath::<f64>::random(m, nv, seed).unwrap();
        for p in [path.clone(), path.reversed()] {
            let d = decompose_half(&p, 1e-6).unwrap();
            prop_assert!(d.residual_norm() <= 1e-6);
            prop_assert!(d.len() <= IntervalDecomposition::<f64>::max_intervals(m));
            prop_assert!(d.is_disjoint_within(0.0, 1.0));
        }
    }
}


